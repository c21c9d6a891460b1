"""Regression corpus of planar Filippov fields.

Each entry lists admissible balls with their index, plus balls that contain
no singularity.  The indices were cross-checked against the regularized
rotation number before being frozen here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import PlanarFilippovField

UNIT_BOX = (-1.0, -1.0, 1.0, 1.0)


@dataclass(frozen=True)
class CorpusField:
    name: str
    fplus: tuple
    fminus: tuple
    switch: str
    # ((cx, cy), r, index)
    balls: tuple
    free_balls: tuple = ()
    domain: tuple = UNIT_BOX

    def build(self) -> PlanarFilippovField:
        return PlanarFilippovField.from_strings(self.fplus, self.fminus, self.switch,
                                                self.domain, self.name)


def _smooth(name, F, switch, balls, free_balls=()):
    return CorpusField(name, F, F, switch, balls, free_balls)


_STD = ((0.0, 0.0), 0.9), ((0.1, 0.05), 0.5), ((-0.05, 0.1), 0.3)


def _at(indices, balls=_STD):
    return tuple((c, r, k) for (c, r), k in zip(balls, indices))


CORPUS = (
    _smooth("source", ("x", "y"), "y", _at((1, 1, 1)), (((0.6, 0.6), 0.2),)),
    _smooth("sink", ("-x", "-y"), "y", _at((1, 1, 1))),
    _smooth("saddle", ("x", "-y"), "y", _at((-1, -1, -1)), (((-0.6, 0.5), 0.3),)),
    _smooth("center", ("-y", "x"), "y", _at((1, 1, 1))),
    _smooth("z_squared", ("x^2-y^2", "2*x*y"), "y", _at((2, 2, 2)), (((0.5, -0.5), 0.25),)),
    _smooth("conj_z_squared", ("x^2-y^2", "-2*x*y"), "y", _at((-2, -2, -2))),
    _smooth("z_cubed", ("x^3-3*x*y^2", "3*x^2*y-y^3"), "y", _at((3, 3, 3))),
    _smooth("atan_source", ("atan(x)", "atan(y)"), "y", _at((1, 1, 1))),
    _smooth("sqrt_saddle", ("sqrt(4+x)-2", "-y"), "y", _at((-1, -1, -1))),
    _smooth("node_pair_off_sigma", ("x^2-0.25", "y"), "y+0.5",
            _at((0, 1, 0), (((0.0, 0.0), 0.9), ((0.5, 0.0), 0.3), ((0.0, 0.3), 0.2))),
            (((0.0, 0.3), 0.2),)),
    CorpusField("crossing_constants", ("1", "1"), ("1", "1"), "y", _at((0, 0, 0)),
                (((0.0, 0.0), 0.9), ((0.3, -0.2), 0.4))),
    CorpusField("crossing_distinct", ("1", "1"), ("2", "1"), "y", _at((0, 0, 0)),
                (((0.0, 0.0), 0.9),)),
    CorpusField("pseudo_node", ("x", "-1"), ("x", "1"), "y", _at((-1, -1, -1)),
                (((0.6, 0.0), 0.3),)),
    CorpusField("pseudo_saddle", ("-x", "-1"), ("-x", "1"), "y", _at((1, 1, 1))),
    CorpusField("escaping_node", ("x", "1"), ("x", "-1"), "y", _at((1, 1, 1))),
    CorpusField("escaping_saddle", ("-x", "1"), ("-x", "-1"), "y", _at((-1, -1, -1)),
                (((-0.5, 0.0), 0.3),)),
    CorpusField("fold_with_crossing", ("1", "x"), ("1", "1"), "y", _at((0, 0, 0))),
    CorpusField("visible_two_fold", ("-1", "x"), ("1", "x"), "y", _at((1, 1, 1))),
    CorpusField("invisible_two_fold", ("1", "x"), ("-1", "x"), "y", _at((-1, -1, -1))),
    CorpusField("boundary_equilibrium", ("x+y", "x-y"), ("0.5", "1"), "y", _at((-1, -1, -1))),
    CorpusField("virtual_equilibria", ("x", "y+0.5"), ("x", "y-0.5"), "y", _at((1, 1, 1))),
    CorpusField("equilibrium_and_pseudo", ("x", "y-0.5"), ("1", "1"), "y",
                _at((0, 1, -1), (((0.0, 0.0), 0.9), ((0.0, 0.5), 0.3), ((-0.5, 0.0), 0.3)))),
    CorpusField("curved_pseudo_node", ("x", "-1"), ("x", "1"), "y-x^2", _at((-1, -1, -1))),
    CorpusField("wavy_pseudo_node", ("x", "-1"), ("x", "1"), "y+0.2*sin(3*x)",
                _at((-1, -1, -1))),
    CorpusField("pseudo_pair", ("x^2-0.25", "-1"), ("x^2-0.25", "1"), "y",
                _at((0, -1, 1), (((0.0, 0.0), 0.9), ((0.5, 0.0), 0.3), ((-0.5, 0.0), 0.3))),
                (((0.0, 0.0), 0.2),)),
    CorpusField("exp_pseudo_node", ("exp(x)-1", "-1"), ("exp(x)-1", "1"), "y", _at((-1, -1, -1))),
    CorpusField("spiral_over_uniform", ("x-y", "x+y"), ("0.5", "1"), "y", _at((0, 0, 0))),
    CorpusField("tilted_switch", ("x", "-1"), ("x", "1"), "y-0.3*x", _at((-1, -1, -1))),
)

BY_NAME = {c.name: c for c in CORPUS}
