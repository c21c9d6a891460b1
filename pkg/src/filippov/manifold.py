"""Filippov fields on compact surfaces given by an atlas of planar charts.

Each chart carries an ordinary :class:`PlanarFilippovField` in its own
coordinates; transitions map chart coordinates to chart coordinates.  The
index of a singularity is computed in a chart, and the Poincare-Hopf check
sums indices over a deduplicated list of singularities.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import TOL, PlanarFilippovField, Rect, Singularity, find_singularities
from .errors import (
    ChartDependence,
    DegenerateJacobian,
    IndexComputationError,
    NonIsolatedSingularity,
    NotIsolated,
    SingularityTooCloseToChartBoundary,
)
from .expr import FieldMixin, Jet, lenient_domain, parse_scalar, parse_vector, real_part
from .winding import index_at_singularity

log = logging.getLogger(__name__)

CHART_MARGIN_FRACTION = 0.05
DEDUP_RADIUS = 1e-6


# --------------------------------------------------------------------------
# Pushforward


def _as_map(m):
    """Accept a callable ``(x, y) -> (u, v)`` or a pair of expression sources."""
    if callable(m):
        return m
    return parse_vector(m)


def jacobian_at(alpha, x, y):
    """``(value, [[du/dx, du/dy], [dv/dx, dv/dy]])`` of ``alpha`` at ``(x, y)``."""
    u, v = alpha(Jet.var_x(x), Jet.var_y(y))
    u, v = (u if isinstance(u, Jet) else Jet(u)), (v if isinstance(v, Jet) else Jet(v))
    return (u.value, v.value), ((u.dx, u.dy), (v.dx, v.dy))


def pushforward_vector(F, alpha, alpha_inv, y1, y2):
    """``D alpha(alpha^-1(y)) . F(alpha^-1(y))``; works on floats, arrays and jets."""
    x1, x2 = alpha_inv(y1, y2)
    _, ((a, b), (c, d)) = jacobian_at(alpha, x1, x2)
    u, v = F(x1, x2)
    return a * u + b * v, c * u + d * v


class PushforwardField(FieldMixin):
    def __init__(self, F, alpha, alpha_inv):
        self.F, self.alpha, self.alpha_inv = F, _as_map(alpha), _as_map(alpha_inv)

    def __call__(self, x, y):
        u, v = pushforward_vector(self.F, self.alpha, self.alpha_inv, x, y)
        return _broadcast_pair(u, v, x, y)


class ComposedScalar(FieldMixin):
    """``f o alpha^-1``."""

    def __init__(self, f, alpha_inv):
        self.f, self.alpha_inv = f, _as_map(alpha_inv)

    def __call__(self, x, y):
        return self.f(*self.alpha_inv(x, y))


def _broadcast_pair(u, v, x, y):
    if isinstance(u, Jet) or isinstance(v, Jet):
        return u, v
    shape = np.broadcast(np.asarray(real_part(x)), np.asarray(real_part(y))).shape
    if shape == ():
        return u, v
    return np.broadcast_to(u, shape), np.broadcast_to(v, shape)


def pushforward(field: PlanarFilippovField, alpha, alpha_inv, domain=None,
                probe_n: int = 9) -> PlanarFilippovField:
    """Field ``alpha_* Z`` with switch ``f o alpha^-1`` on ``domain`` (the image
    region, in the new coordinates).

    The Jacobian of ``alpha`` is probed on a grid of ``domain``; a vanishing
    determinant raises :class:`DegenerateJacobian`.
    """
    alpha, alpha_inv = _as_map(alpha), _as_map(alpha_inv)
    domain = field.domain if domain is None else Rect.coerce(domain)
    gx, gy = np.meshgrid(np.linspace(domain.x0, domain.x1, probe_n),
                         np.linspace(domain.y0, domain.y1, probe_n))
    with lenient_domain():
        px, py = alpha_inv(gx.ravel(), gy.ravel())
        _, ((a, b), (c, d)) = jacobian_at(alpha, np.asarray(px, float), np.asarray(py, float))
        det = np.asarray(a * d - b * c, float) * np.ones(gx.size)
    finite = np.isfinite(det)
    if np.any(np.abs(det[finite]) <= 1e-12):
        k = int(np.flatnonzero(finite & (np.abs(det) <= 1e-12))[0])
        raise DegenerateJacobian(f"Jacobian determinant vanishes near {(gx.ravel()[k], gy.ravel()[k])}")
    return PlanarFilippovField(
        PushforwardField(field.fplus, alpha, alpha_inv),
        PushforwardField(field.fminus, alpha, alpha_inv),
        ComposedScalar(field.switch, alpha_inv),
        domain,
        field.name,
    )


# --------------------------------------------------------------------------
# Atlas


@dataclass(frozen=True)
class Chart:
    name: str
    field: PlanarFilippovField

    @property
    def domain(self) -> Rect:
        return self.field.domain

    def margin(self, p) -> float:
        return self.domain.margin(p)

    def min_margin(self) -> float:
        return CHART_MARGIN_FRACTION * self.domain.diameter


@dataclass(frozen=True)
class Transition:
    """Coordinate change from chart ``source`` to chart ``target``."""

    source: str
    target: str
    forward: Callable


@dataclass
class ManifoldField:
    name: str
    charts: list
    transitions: list
    euler_characteristic: int
    _found: dict = field(default_factory=dict, repr=False, compare=False)

    def chart(self, name: str) -> Chart:
        for c in self.charts:
            if c.name == name:
                return c
        raise KeyError(name)

    def transition(self, source: str, target: str) -> Optional[Callable]:
        if source == target:
            return lambda x, y: (x, y)
        for t in self.transitions:
            if t.source == source and t.target == target:
                return t.forward
        return None

    def to_chart(self, source: str, target: str, p):
        """Coordinates of ``p`` (in ``source``) in ``target``, or None."""
        fwd = self.transition(source, target)
        if fwd is None:
            return None
        try:
            with lenient_domain():
                q = fwd(float(p[0]), float(p[1]))
        except ArithmeticError:
            return None
        q = (float(real_part(q[0])), float(real_part(q[1])))
        if not all(math.isfinite(c) for c in q):
            return None
        return q

    def singularities_in(self, chart: Chart, grid_n: int = 64, tol: float = TOL):
        key = (chart.name, grid_n, tol)
        if key not in self._found:
            self._found[key] = find_singularities(chart.field, chart.domain, grid_n, tol)
        return self._found[key]

    def canonical(self, chart_name: str, p):
        """First chart holding ``p`` with the required margin, and its coordinates."""
        for c in self.charts:
            q = self.to_chart(chart_name, c.name, p)
            if q is not None and c.margin(q) >= c.min_margin():
                return c, q
        return None, None


def index_at_manifold_singularity(MF: ManifoldField, chart: Chart, s: Singularity,
                                  grid_n: int = 64, tol: float = TOL) -> int:
    """Index of ``s`` (given in ``chart`` coordinates), cross-checked in every
    other chart that holds it with margin.
    """
    if chart.margin(s.location) < chart.min_margin():
        raise SingularityTooCloseToChartBoundary(
            f"{s.location} is within {chart.min_margin():.3g} of the boundary of chart {chart.name!r}"
        )
    results = {}
    for c in MF.charts:
        q = MF.to_chart(chart.name, c.name, s.location)
        if q is None or c.margin(q) < c.min_margin():
            continue
        others = MF.singularities_in(c, grid_n, tol)
        here = Singularity(q, s.kind)
        try:
            results[c.name] = index_at_singularity(c.field, here, others, grid_n, tol)
        except NotIsolated as exc:
            raise NonIsolatedSingularity(f"{s.kind} at {q} in chart {c.name!r}: {exc}") from exc
    values = set(results.values())
    if len(values) != 1:
        raise ChartDependence(f"charts disagree on the index at {s.location}: {results}")
    return values.pop()


@dataclass(frozen=True)
class ManifoldSingularity:
    chart: str
    location: tuple
    kind: str
    index: Optional[int]
    seen_in: tuple = ()

    def as_dict(self):
        return {"chart": self.chart, "location": list(self.location), "kind": str(self.kind),
                "index": self.index, "seen_in": list(self.seen_in)}


@dataclass(frozen=True)
class PoincareHopfReport:
    manifold: str
    singularities: tuple
    euler_characteristic: int
    inconclusive: tuple = ()
    errors: tuple = ()

    @property
    def total(self) -> Optional[int]:
        if any(s.index is None for s in self.singularities):
            return None
        return sum(s.index for s in self.singularities)

    @property
    def nonempty_ok(self) -> bool:
        # a nonzero Euler characteristic forces a singularity somewhere
        return self.euler_characteristic == 0 or len(self.singularities) > 0

    @property
    def passed(self) -> bool:
        return (not self.inconclusive and not self.errors and self.nonempty_ok
                and self.total == self.euler_characteristic)

    def summary_line(self) -> str:
        total = "?" if self.total is None else str(self.total)
        verdict = "PASS" if self.passed else "FAIL"
        return f"sum={total} chi={self.euler_characteristic} {verdict}"

    def as_dict(self):
        return {
            "manifold": self.manifold,
            "singularities": [s.as_dict() for s in self.singularities],
            "sum": self.total,
            "chi": self.euler_characteristic,
            "passed": self.passed,
            "nonempty_ok": self.nonempty_ok,
            "inconclusive": [list(p) for p in self.inconclusive],
            "errors": list(self.errors),
        }


def collect_singularities(MF: ManifoldField, grid_n: int = 64, tol: float = TOL):
    """Deduplicated singularities as ``(canonical chart, Singularity, seen_in)``
    plus the list of points no chart holds with margin.
    """
    unique = []
    inconclusive = []
    for chart in MF.charts:
        for s in MF.singularities_in(chart, grid_n, tol):
            home, q = MF.canonical(chart.name, s.location)
            if home is None:
                inconclusive.append((chart.name,) + s.location)
                continue
            for entry in unique:
                if entry[0].name == home.name and entry[1].distance(q) < DEDUP_RADIUS:
                    if chart.name not in entry[2]:
                        entry[2].append(chart.name)
                    break
            else:
                unique.append((home, Singularity(q, s.kind, None, s.residual), [chart.name]))
    return unique, inconclusive


def poincare_hopf_check(MF: ManifoldField, grid_n: int = 64, tol: float = TOL) -> PoincareHopfReport:
    unique, inconclusive = collect_singularities(MF, grid_n, tol)
    out, errors = [], []
    for home, s, seen in unique:
        try:
            k = index_at_manifold_singularity(MF, home, s, grid_n, tol)
        except (IndexComputationError, ChartDependence, NonIsolatedSingularity) as exc:
            errors.append(f"{type(exc).__name__}: {exc}")
            k = None
        out.append(ManifoldSingularity(home.name, s.location, str(s.kind), k, tuple(seen)))
    report = PoincareHopfReport(MF.name, tuple(out), MF.euler_characteristic,
                                tuple(inconclusive), tuple(errors))
    log.info("%s: %s", MF.name, report.summary_line())
    return report


def overlap_consistency(MF: ManifoldField, samples: int = 15, tol: float = 1e-6):
    """Largest mismatch between transported and native fields (and switch
    signs) over sampled overlap points, per transition.
    """
    worst = {}
    for t in MF.transitions:
        src, dst = MF.chart(t.source), MF.chart(t.target)
        d = src.domain
        gx, gy = np.meshgrid(np.linspace(d.x0, d.x1, samples), np.linspace(d.y0, d.y1, samples))
        err = 0.0
        sign_mismatch = 0
        for x, y in zip(gx.ravel(), gy.ravel()):
            q = MF.to_chart(src.name, dst.name, (x, y))
            if q is None or dst.margin(q) <= 0:
                continue
            fs = float(src.field.switch(x, y))
            fd = float(dst.field.switch(*q))
            if abs(fs) < 1e-3:
                continue
            if (fs > 0) != (fd > 0):
                sign_mismatch += 1
                continue
            piece = 1 if fs > 0 else -1
            _, ((a, b), (c, e)) = jacobian_at(t.forward, x, y)
            u, v = src.field.piece(piece)(x, y)
            pu, pv = a * u + b * v, c * u + e * v
            nu, nv = dst.field.piece(piece)(*q)
            err = max(err, math.hypot(pu - nu, pv - nv) / max(1.0, math.hypot(nu, nv)))
        worst[(t.source, t.target)] = (err, sign_mismatch)
    ok = all(e <= tol and m == 0 for e, m in worst.values())
    return ok, worst


# --------------------------------------------------------------------------
# Built-in surfaces

SPHERE_CHART_BOX = Rect(-1.5, -1.5, 1.5, 1.5)


_inversion = parse_vector("x/(x^2+y^2)", "y/(x^2+y^2)")


def sphere_field(north, south, name: str = "sphere") -> ManifoldField:
    """Sphere split along the equator into two stereographic charts.

    ``north`` is the field on the northern hemisphere in north-chart
    coordinates, ``south`` the field on the southern hemisphere in
    south-chart coordinates; both are pairs of expression sources or
    callables.  In each chart the equator is the unit circle and the
    transition is ``(x, y) / (x^2 + y^2)``.  ``F+`` is the northern field in
    both charts.
    """
    north = _as_map(north)
    south = _as_map(south)
    f_north = parse_scalar("1 - x^2 - y^2")
    f_south = parse_scalar("x^2 + y^2 - 1")
    north_chart = PlanarFilippovField(north, PushforwardField(south, _inversion, _inversion),
                                      f_north, SPHERE_CHART_BOX, f"{name}:north")
    south_chart = PlanarFilippovField(PushforwardField(north, _inversion, _inversion), south,
                                      f_south, SPHERE_CHART_BOX, f"{name}:south")
    return ManifoldField(
        name,
        [Chart("north", north_chart), Chart("south", south_chart)],
        [Transition("north", "south", _inversion), Transition("south", "north", _inversion)],
        2,
    )


TORUS_HALF_WIDTH = 0.35
TORUS_CENTERS = ((0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75))


class _Shift:
    """``g(x + a, y + b)`` for a scalar or vector function ``g``."""

    def __init__(self, g, a, b):
        self.g, self.a, self.b = g, a, b

    def __call__(self, x, y):
        return self.g(x + self.a, y + self.b)


class _ShiftField(_Shift, FieldMixin):
    pass


def _wrap(a):
    k = np.round(real_part(a))
    return a - k


class _TorusTransition:
    def __init__(self, dx, dy):
        self.dx, self.dy = dx, dy

    def __call__(self, x, y):
        return _wrap(x + self.dx), _wrap(y + self.dy)


def torus_field(fplus, fminus, switch, name: str = "torus") -> ManifoldField:
    """Flat torus ``R^2 / Z^2`` with four square charts.

    ``fplus``, ``fminus`` and ``switch`` are 1-periodic expressions in global
    coordinates.  Chart ``k`` uses coordinates relative to the centre
    ``TORUS_CENTERS[k]`` on ``[-0.35, 0.35]^2``.
    """
    Fp, Fm = _as_map(fplus), _as_map(fminus)
    f = switch if callable(switch) else parse_scalar(switch)
    box = Rect(-TORUS_HALF_WIDTH, -TORUS_HALF_WIDTH, TORUS_HALF_WIDTH, TORUS_HALF_WIDTH)
    charts, transitions = [], []
    for k, (a, b) in enumerate(TORUS_CENTERS):
        charts.append(Chart(f"c{k}", PlanarFilippovField(
            _ShiftField(Fp, a, b), _ShiftField(Fm, a, b), _ShiftField(f, a, b), box, f"{name}:c{k}")))
    for i, ci in enumerate(TORUS_CENTERS):
        for j, cj in enumerate(TORUS_CENTERS):
            if i != j:
                transitions.append(Transition(f"c{i}", f"c{j}",
                                              _TorusTransition(ci[0] - cj[0], ci[1] - cj[1])))
    return ManifoldField(name, charts, transitions, 0)


__all__ = [
    "pushforward", "pushforward_vector", "PushforwardField", "ComposedScalar", "jacobian_at",
    "Chart", "Transition", "ManifoldField", "ManifoldSingularity", "PoincareHopfReport",
    "index_at_manifold_singularity", "poincare_hopf_check", "collect_singularities",
    "overlap_consistency", "sphere_field", "torus_field",
]
