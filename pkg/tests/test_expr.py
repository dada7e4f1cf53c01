import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quatsub.errors import DomainError, ParseError
from quatsub.expr import (
    eval_jet2,
    evaluate,
    jet2,
    parse_expr,
    parse_list,
    parse_map,
    to_source,
)

from conftest import central_grad


def test_parse_precedence_and_power():
    e = parse_expr("1 + 2*x1^2 - x2/4", 2)
    assert evaluate(e, [3.0, 8.0]) == pytest.approx(1 + 18 - 2)
    assert evaluate(parse_expr("-x1^2"), [3.0]) == pytest.approx(-9.0)


def test_structurally_equal_sources_give_equal_trees():
    assert parse_expr("x1*(x2+1)") == parse_expr(" x1 * ( x2 + 1 ) ")
    assert parse_expr("x1+x2") != parse_expr("x2+x1")


def test_round_trip_through_source():
    for src in ["sqrt(x1^2 + x2^2)", "exp(2*x1*x2)", "-x3/(2*x1)", "sin(x1)*cos(x2) - log(x3)"]:
        e = parse_expr(src, 3)
        assert parse_expr(to_source(e), 3) == e


def test_parse_list_splits_at_top_level_commas():
    comps = parse_list("(x2 + x3)/sqrt(2), (x1 + x4)/sqrt(2)", 4)
    assert len(comps) == 2


@pytest.mark.parametrize(
    "src, col",
    [("x1 + $", 6), ("x1 +", 5), ("foo(x1)", 1), ("x1^x2", 4), ("(x1", 4)],
)
def test_parse_errors_report_position(src, col):
    with pytest.raises(ParseError) as info:
        parse_expr(src, 2)
    assert info.value.line == 1
    assert info.value.column == col


def test_parse_error_on_second_line():
    with pytest.raises(ParseError) as info:
        parse_list("x1,\n x2 + @", 2)
    assert info.value.line == 2


def test_variable_beyond_dimension_rejected():
    with pytest.raises(ParseError):
        parse_expr("x3", 2)


def test_sqrt_jet_at_unit_point():
    # value 1, gradient (1, 0), Hessian [[0, 0], [0, 1]] for sqrt(x1^2 + x2^2) at (1, 0)
    j = jet2(parse_expr("sqrt(x1^2 + x2^2)", 2), np.array([[1.0, 0.0]]))
    assert j.value[0] == pytest.approx(1.0)
    np.testing.assert_allclose(j.grad[0], [1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(j.hess[0], [[0.0, 0.0], [0.0, 1.0]], atol=1e-14)


def test_domain_errors():
    with pytest.raises(DomainError):
        jet2(parse_expr("sqrt(x1)"), np.array([[-1.0]]))
    with pytest.raises(DomainError):
        jet2(parse_expr("log(x1)"), np.array([[0.0]]))
    spec = parse_map("x1", 1, [[0, 1]])
    with pytest.raises(DomainError):
        eval_jet2(spec, [2.0])


def test_jets_against_mpmath():
    src = "exp(x1*x2) * sin(x2) + sqrt(1 + x1^2) / (2 + cos(x1)) - log(3 + x2)^2"
    e = parse_expr(src, 2)
    p = (0.3, -0.7)
    f = lambda a, b: mpmath.e ** (a * b) * mpmath.sin(b) + mpmath.sqrt(1 + a**2) / (2 + mpmath.cos(a)) - mpmath.log(3 + b) ** 2
    j = jet2(e, np.array([p]))
    mpmath.mp.dps = 30
    assert j.value[0] == pytest.approx(float(f(*p)), rel=1e-14)
    grad = [float(mpmath.diff(f, p, (1, 0))), float(mpmath.diff(f, p, (0, 1)))]
    np.testing.assert_allclose(j.grad[0], grad, rtol=1e-12)
    hess = [
        [float(mpmath.diff(f, p, (2, 0))), float(mpmath.diff(f, p, (1, 1)))],
        [float(mpmath.diff(f, p, (1, 1))), float(mpmath.diff(f, p, (0, 2)))],
    ]
    np.testing.assert_allclose(j.hess[0], hess, rtol=1e-11)


def test_batched_jets_match_single_point_jets():
    e = parse_expr("x1^3*x2 + sin(x1*x2)", 2)
    pts = np.array([[0.1, 0.2], [0.5, -1.0], [1.5, 0.3]])
    batch = jet2(e, pts)
    for i, p in enumerate(pts):
        single = jet2(e, p[None, :])
        np.testing.assert_allclose(batch.hess[i], single.hess[0])


def test_evaluate_with_numpy_lib_matches_math():
    e = parse_expr("sqrt(x1) + exp(-x1)", 1)
    assert evaluate(e, [0.25], np) == pytest.approx(evaluate(e, [0.25], math))


# random polynomial / trig expressions built from a small grammar
_leaf = st.one_of(
    st.sampled_from(["x1", "x2", "x3"]),
    st.integers(1, 5).map(str),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda t: f"{t[0]}({t[1]}/4)"),
        st.tuples(children, st.integers(2, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
    )


expressions = st.recursive(_leaf, _extend, max_leaves=6)


@settings(max_examples=60, deadline=None)
@given(expressions, st.lists(st.floats(-0.8, 0.8), min_size=3, max_size=3))
def test_jet_matches_central_differences(src, p):
    e = parse_expr(src, 3)
    p = np.array(p)
    j = jet2(e, p[None, :])
    f = lambda q: evaluate(e, q)
    g = lambda q: jet2(e, np.asarray(q)[None, :]).grad[0]
    scale = 1.0 + np.max(np.abs(j.grad[0]))
    np.testing.assert_allclose(j.grad[0], central_grad(f, p), atol=1e-6 * scale)
    hscale = 1.0 + np.max(np.abs(j.hess[0]))
    np.testing.assert_allclose(j.hess[0], central_grad(g, p), atol=1e-6 * hscale)
    np.testing.assert_allclose(j.hess[0], j.hess[0].T, atol=1e-12 * hscale)
