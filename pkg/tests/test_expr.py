import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filippov.errors import (
    EvaluationDomainError,
    ExprSyntaxError,
    UnknownFunctionError,
    UnknownVariableError,
)
from filippov.expr import (
    Add,
    Call,
    Const,
    Div,
    Jet,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    Var,
    eval_jet,
    eval_vec,
    lenient_domain,
    parse_scalar,
    parse_vector,
    to_text,
)


def test_parse_polynomial_tree():
    assert parse_scalar("x^2 - y").node == Sub(Pow(Var("x"), Num(2.0)), Var("y"))


def test_parse_function_call_tree():
    assert parse_scalar("sin(x*y)").node == Call("sin", Mul(Var("x"), Var("y")))


def test_syntax_error_reports_byte_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_scalar("x + * y")
    assert info.value.offset == 4
    assert "offset 4" in str(info.value)


def test_offset_counts_utf8_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse_scalar("x + é")
    assert info.value.offset == 4
    with pytest.raises(ExprSyntaxError) as info:
        parse_scalar("é")
    assert info.value.offset == 0


@pytest.mark.parametrize("src", ["", "(x", "x)", "x y", "sin x", "2 ^", "sin()"])
def test_malformed_inputs(src):
    with pytest.raises(ExprSyntaxError):
        parse_scalar(src)


def test_unknown_names():
    with pytest.raises(UnknownFunctionError):
        parse_scalar("abs(x)")
    with pytest.raises(UnknownVariableError):
        parse_scalar("x + z")


def test_precedence_and_associativity():
    assert parse_scalar("-x^2").node == Neg(Pow(Var("x"), Num(2.0)))
    assert parse_scalar("2^3^2")(0.0, 0.0) == 512.0
    assert parse_scalar("2^-1")(0.0, 0.0) == 0.5
    assert parse_scalar("1 - 2 - 3")(0.0, 0.0) == -4.0
    assert parse_scalar("8 / 4 / 2")(0.0, 0.0) == 1.0
    assert parse_scalar("-2*3 + 1")(0.0, 0.0) == -5.0


def test_pi_constant():
    assert parse_scalar("pi").node == Const("pi")
    assert parse_scalar("sin(pi/2)")(0.0, 0.0) == pytest.approx(1.0)


def test_polynomial_jet():
    j = eval_jet(parse_scalar("x^2 - y"), 2.0, 1.0)
    assert (j.value, j.dx, j.dy) == (3.0, 4.0, -1.0)


def test_constant_jet():
    j = eval_jet(parse_scalar("7"), 0.0, 0.0)
    assert (j.value, j.dx, j.dy) == (7.0, 0.0, 0.0)


def test_trig_jet_against_finite_differences():
    e = parse_scalar("sin(x*y)")
    j = eval_jet(e, 1.0, 2.0)
    h = 1e-6
    assert j.dx == pytest.approx((e(1 + h, 2.0) - e(1 - h, 2.0)) / (2 * h), abs=1e-6)
    assert j.dy == pytest.approx((e(1.0, 2 + h) - e(1.0, 2 - h)) / (2 * h), abs=1e-6)
    assert j.dx == pytest.approx(2 * math.cos(2.0), abs=1e-12)
    assert j.dy == pytest.approx(math.cos(2.0), abs=1e-12)


@pytest.mark.parametrize("v, p, expected", [
    (("x", "-y"), (3.0, 2.0), (3.0, -2.0)),
    (("1", "1"), (0.7, -5.0), (1.0, 1.0)),
    (("-y", "x"), (0.0, 1.0), (-1.0, 0.0)),
])
def test_eval_vec(v, p, expected):
    assert eval_vec(parse_vector(*v), *p) == expected


@pytest.mark.parametrize("src, point, fragment", [
    ("log(x)", (0.0, 1.0), "log"),
    ("1/(x-y)", (1.0, 1.0), "division"),
    ("sqrt(x)", (-1.0, 0.0), "sqrt"),
    ("x^0.5", (-1.0, 0.0), "power"),
    ("x^-1", (0.0, 0.0), "negative power"),
])
def test_domain_errors_name_the_subexpression(src, point, fragment):
    with pytest.raises(EvaluationDomainError) as info:
        parse_scalar(src)(*point)
    assert fragment in str(info.value)
    assert info.value.subexpression


def test_lenient_domain_gives_nan_instead_of_raising():
    e = parse_scalar("log(x)")
    with lenient_domain():
        out = e(np.array([-1.0, 1.0]), np.zeros(2))
    assert np.isnan(out[0]) and out[1] == 0.0
    with pytest.raises(EvaluationDomainError):
        e(np.array([-1.0, 1.0]), np.zeros(2))


def test_vectorized_evaluation_matches_scalar():
    e = parse_scalar("exp(x)*cos(y) + atan(x*y) - tan(0.3*y)")
    xs = np.linspace(-1, 1, 7)
    ys = np.linspace(-0.5, 0.8, 7)
    out = e(xs, ys)
    assert out.shape == (7,)
    for k in range(7):
        assert out[k] == e(float(xs[k]), float(ys[k]))


def test_constant_broadcasts_over_arrays():
    e = parse_scalar("7")
    out = e(np.zeros(3), np.zeros(3))
    assert out.shape == (3,) and np.all(out == 7.0)
    j = e.jet(np.zeros(3), np.zeros(3))
    assert np.all(j.value == 7.0) and np.all(j.dx == 0.0)


def test_nested_jets_give_second_derivatives():
    e = parse_scalar("x^3*y")
    inner = e(Jet(Jet.var_x(2.0), 1.0, 0.0), Jet(Jet.var_y(3.0), 0.0, 1.0))
    # outer dx is d/dx; its own jet carries d2/dx2 and d2/dxdy
    assert inner.dx.value == pytest.approx(36.0)
    assert inner.dx.dx == pytest.approx(36.0)
    assert inner.dx.dy == pytest.approx(12.0)


def test_evaluation_is_deterministic_across_threads():
    e = parse_scalar("sin(x)^2 + exp(-y)*cos(3*x*y)")
    xs = np.linspace(-1, 1, 1001)
    expected = e(xs, xs[::-1]).tobytes()
    results = []

    def work():
        results.append(e(xs, xs[::-1]).tobytes())

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r == expected for r in results)


# -- generated expressions ---------------------------------------------------

_leaf = st.one_of(
    st.sampled_from([Var("x"), Var("y")]),
    st.floats(0.0, 3.0, allow_nan=False).map(lambda v: Num(round(v, 3))),
)


def _grow(children):
    return st.one_of(
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Neg, children),
        st.builds(lambda b, n: Pow(b, Num(float(n))), children, st.integers(0, 3)),
        st.builds(lambda a: Call("sin", a), children),
        st.builds(lambda a: Call("cos", a), children),
        st.builds(lambda a: Call("atan", a), children),
        st.builds(lambda a: Call("exp", Call("sin", a)), children),
    )


smooth_trees = st.recursive(_leaf, _grow, max_leaves=8)


@settings(max_examples=200)
@given(smooth_trees, st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_jet_matches_central_differences(tree, x, y):
    e = parse_scalar(to_text(tree))
    j = e.jet(x, y)
    h = 1e-6
    fd_x = (e(x + h, y) - e(x - h, y)) / (2 * h)
    fd_y = (e(x, y + h) - e(x, y - h)) / (2 * h)
    scale = max(1.0, abs(j.value))
    assert abs(j.dx - fd_x) <= 1e-5 * max(scale, abs(fd_x))
    assert abs(j.dy - fd_y) <= 1e-5 * max(scale, abs(fd_y))


@settings(max_examples=200)
@given(st.recursive(_leaf, lambda c: st.one_of(_grow(c), st.builds(Div, c, c),
                                                st.builds(Pow, c, c)), max_leaves=10))
def test_print_parse_round_trip(tree):
    assert parse_scalar(to_text(tree)).node == tree
