import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filippov.core import PlanarFilippovField, Singularity, SingularityKind, find_singularities
from filippov.corpus import BY_NAME
from filippov.errors import DegenerateJacobian, SingularityTooCloseToChartBoundary
from filippov.expr import parse_vector
from filippov.manifold import (
    collect_singularities,
    index_at_manifold_singularity,
    jacobian_at,
    overlap_consistency,
    poincare_hopf_check,
    pushforward,
    pushforward_vector,
    sphere_field,
    torus_field,
)
from filippov.winding import index_at_singularity

P = PlanarFilippovField.from_strings

SPHERE_ROTATION = ("-y-0.1*x", "x-0.1*y")
SPHERE_PSEUDO = ("0.1*x-x*y", "0.1*y+x^2")


def test_identity_pushforward_is_the_field():
    Z = BY_NAME["pseudo_node"].build()
    W = pushforward(Z, ("x", "y"), ("x", "y"))
    for p in [(0.3, 0.2), (-0.5, -0.1), (0.0, 0.7)]:
        assert W.fplus(*p) == pytest.approx(Z.fplus(*p), abs=1e-15)
        assert W.fminus(*p) == pytest.approx(Z.fminus(*p), abs=1e-15)
        assert W.switch(*p) == pytest.approx(Z.switch(*p), abs=1e-15)


def test_rotation_leaves_the_radial_source_unchanged():
    source = parse_vector("x", "y")
    for p in [(0.3, 0.2), (-0.5, 0.1)]:
        got = pushforward_vector(source, parse_vector("-y", "x"), parse_vector("y", "-x"), *p)
        assert got == pytest.approx(p, abs=1e-15)


def test_stretch_pushforward():
    got = pushforward_vector(parse_vector("1", "0"), parse_vector("2*x", "y"),
                             parse_vector("x/2", "y"), 2.0, 0.0)
    assert got == pytest.approx((2.0, 0.0))


def test_jacobian_at():
    value, J = jacobian_at(parse_vector("x+0.1*y^2", "y"), 1.0, 2.0)
    assert value == pytest.approx((1.4, 2.0))
    assert J[0] == pytest.approx((1.0, 0.4)) and J[1] == pytest.approx((0.0, 1.0))


def test_degenerate_map_is_rejected():
    Z = BY_NAME["pseudo_node"].build()
    with pytest.raises(DegenerateJacobian):
        pushforward(Z, ("x^2", "y"), ("x", "y"))


SHEAR = (("x+0.1*y^2", "y"), ("x-0.1*y^2", "y"))


@pytest.mark.parametrize("name", [
    "saddle", "z_squared", "pseudo_node", "escaping_saddle", "visible_two_fold",
    "invisible_two_fold", "boundary_equilibrium", "equilibrium_and_pseudo", "pseudo_pair",
])
def test_index_survives_a_nonlinear_change_of_coordinates(name):
    Z = BY_NAME[name].build()
    W = pushforward(Z, *SHEAR)
    before = find_singularities(Z)
    after = find_singularities(W)
    fwd = parse_vector(*SHEAR[0])
    assert len(before) == len(after)
    for s in before:
        image = tuple(float(c) for c in fwd(*s.location))
        (t,) = [t for t in after if t.distance(image) < 1e-6]
        assert t.kind == s.kind
        assert index_at_singularity(W, t, after) == index_at_singularity(Z, s, before)


@settings(max_examples=25)
@given(st.floats(0, 2 * math.pi), st.floats(0.5, 2.0), st.booleans(),
       st.sampled_from(["pseudo_node", "escaping_saddle", "visible_two_fold", "saddle"]))
def test_index_survives_linear_maps(angle, stretch, mirror, name):
    c, s = math.cos(angle), math.sin(angle)
    m = -1.0 if mirror else 1.0
    # (x, y) -> R(angle) . diag(stretch, m) . (x, y)
    fwd = (f"{c * stretch}*x-{s * m}*y", f"{s * stretch}*x+{c * m}*y")
    inv = (f"({c}*x+{s}*y)/{stretch}", f"({-s}*x+{c}*y)/{m}")
    Z = BY_NAME[name].build()
    box = 2.2
    W = pushforward(Z, fwd, inv, (-box, -box, box, box))
    (s0,) = find_singularities(Z)
    (t0,) = find_singularities(W)
    assert t0.distance((0.0, 0.0)) < 1e-6
    assert index_at_singularity(W, t0) == index_at_singularity(Z, s0)


@pytest.mark.parametrize("north", [SPHERE_ROTATION, SPHERE_PSEUDO])
def test_sphere_satisfies_poincare_hopf(north):
    rep = poincare_hopf_check(sphere_field(north, north), 64)
    assert rep.passed, rep.as_dict()
    assert rep.total == 2 and rep.summary_line() == "sum=2 chi=2 PASS"


def test_sphere_pseudo_equilibria_are_seen_in_both_charts():
    MF = sphere_field(SPHERE_PSEUDO, SPHERE_PSEUDO)
    unique, inconclusive = collect_singularities(MF, 64)
    assert not inconclusive
    on_equator = [u for u in unique if u[1].kind == SingularityKind.PSEUDO_EQUILIBRIUM]
    assert len(on_equator) == 2
    assert all(set(u[2]) == {"north", "south"} for u in on_equator)


def test_wrong_euler_characteristic_fails():
    MF = dataclasses.replace(sphere_field(SPHERE_ROTATION, SPHERE_ROTATION), euler_characteristic=0)
    rep = poincare_hopf_check(MF, 64)
    assert not rep.passed and rep.summary_line() == "sum=2 chi=0 FAIL"


@pytest.mark.parametrize("fp, fm, switch", [
    (("1", "0.3"), ("1", "0.3"), "sin(2*pi*y)"),
    (("sin(2*pi*x)", "-1"), ("sin(2*pi*x)", "1"), "sin(2*pi*y)"),
    (("sin(2*pi*x)", "sin(2*pi*y)"), ("sin(2*pi*x)", "sin(2*pi*y)"), "cos(2*pi*y)+0.5"),
])
def test_torus_satisfies_poincare_hopf(fp, fm, switch):
    rep = poincare_hopf_check(torus_field(fp, fm, switch), 64)
    assert rep.passed, rep.as_dict()
    assert rep.total == 0


def test_torus_pseudo_count():
    rep = poincare_hopf_check(torus_field(("sin(2*pi*x)", "-1"), ("sin(2*pi*x)", "1"), "sin(2*pi*y)"))
    assert sorted(s.index for s in rep.singularities) == [-1, -1, 1, 1]


@pytest.mark.parametrize("MF", [
    sphere_field(SPHERE_PSEUDO, SPHERE_PSEUDO),
    torus_field(("sin(2*pi*x)", "-1"), ("sin(2*pi*x)", "1"), "sin(2*pi*y)"),
], ids=["sphere", "torus"])
def test_transitions_carry_fields_onto_each_other(MF):
    ok, worst = overlap_consistency(MF)
    assert ok, worst


def test_canonical_chart():
    MF = sphere_field(SPHERE_ROTATION, SPHERE_ROTATION)
    chart, q = MF.canonical("north", (0.2, 0.0))
    assert chart.name == "north" and q == pytest.approx((0.2, 0.0))
    chart, q = MF.canonical("north", (1.45, 0.0))
    assert chart.name == "south" and q == pytest.approx((1 / 1.45, 0.0))


def test_singularity_near_chart_edge_is_refused():
    MF = sphere_field(SPHERE_ROTATION, SPHERE_ROTATION)
    s = Singularity((1.49, 1.49), SingularityKind.EQUILIBRIUM_PLUS)
    with pytest.raises(SingularityTooCloseToChartBoundary):
        index_at_manifold_singularity(MF, MF.chart("north"), s)
