import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quatsub.errors import NotPositiveDefiniteError
from quatsub.expr import parse_expr
from quatsub.riemann import (
    ExprVectorField,
    MatJet,
    MetricField,
    christoffel,
    covariant_derivative,
    lie_bracket,
)

from conftest import central_grad

POLAR = MetricField.parse([["1", "0"], ["0", "x1^2"]], 2)


def test_polar_christoffel_symbols():
    gamma = christoffel(POLAR, [2.0, 0.3])
    assert gamma[0, 1, 1] == pytest.approx(-2.0)
    assert gamma[1, 0, 1] == pytest.approx(0.5)
    assert gamma[1, 1, 0] == pytest.approx(0.5)
    assert gamma[0, 0, 0] == 0.0


def test_christoffel_vanish_for_euclidean():
    np.testing.assert_array_equal(christoffel(MetricField.euclidean(3), [0.1, 0.2, 0.3]), 0.0)


def test_unit_circle_field_accelerates_inward():
    V = ExprVectorField.parse("-x2, x1", 2)
    np.testing.assert_allclose(covariant_derivative(MetricField.euclidean(2), V, V, [1.0, 0.0]), [-1.0, 0.0])


def test_coordinate_brackets():
    U = ExprVectorField.parse("0, x1", 2)
    np.testing.assert_allclose(lie_bracket(U, [1.0, 0.0], [0.3, 0.4]), [0.0, -1.0])


def test_heisenberg_left_invariant_bracket():
    X = ExprVectorField.parse("1, 0, -x2/2", 3)
    Y = ExprVectorField.parse("0, 1, x1/2", 3)
    np.testing.assert_allclose(lie_bracket(X, Y, [0.2, -0.4, 0.9]), [0.0, 0.0, 1.0])


def test_not_positive_definite_reports_eigenvalue():
    g = MetricField.parse([["1", "0"], ["0", "x1"]], 2)
    with pytest.raises(NotPositiveDefiniteError) as info:
        christoffel(g, [-0.5, 0.0])
    assert info.value.smallest_eigenvalue == pytest.approx(-0.5)


def test_coframe_metric_is_gram_of_rows():
    rows = [[parse_expr("1"), parse_expr("x2")], [parse_expr("0"), parse_expr("2")]]
    g = MetricField.from_coframe(rows)
    E = np.array([[1.0, 0.7], [0.0, 2.0]])
    np.testing.assert_allclose(g.values(np.array([[0.1, 0.7]]))[0], E.T @ E)


def _metric_compatibility(g, p):
    """nabla g = 0: d_k g_ij = g_lj gamma^l_ki + g_il gamma^l_kj."""
    G, dG = g.jets(np.asarray(p)[None, :])
    G, dG = G[0], dG[0]
    gamma = christoffel(g, p)
    rhs = np.einsum("lj,lki->kij", G, gamma) + np.einsum("il,lkj->kij", G, gamma)
    return dG - rhs


def test_levi_civita_is_metric_compatible_and_torsion_free():
    g = MetricField.parse([["1 + x2^2", "x1*x2/3"], ["x1*x2/3", "2 + sin(x1)"]], 2)
    p = [0.4, -0.3]
    np.testing.assert_allclose(_metric_compatibility(g, p), 0.0, atol=1e-13)
    gamma = christoffel(g, p)
    np.testing.assert_allclose(gamma, gamma.transpose(0, 2, 1), atol=1e-15)


@st.composite
def matrices(draw, n=3):
    vals = draw(st.lists(st.floats(-1, 1), min_size=n * n, max_size=n * n))
    return np.array(vals).reshape(n, n) + 3 * np.eye(n)


@settings(max_examples=40, deadline=None)
@given(matrices(), matrices(), matrices(), matrices())
def test_matjet_product_and_inverse_rules(A0, A1, B0, B1):
    # linear paths A(t) = A0 + t A1 through matrix space, one direction
    a = MatJet(A0, A1[None])
    b = MatJet(B0, B1[None])
    prod = central_grad(lambda t: (A0 + t[0] * A1) @ (B0 + t[0] * B1), [0.0])[..., 0]
    np.testing.assert_allclose((a @ b).partials[0], prod, atol=1e-6)
    inv = central_grad(lambda t: np.linalg.inv(A0 + t[0] * A1), [0.0])[..., 0]
    np.testing.assert_allclose(a.inv().partials[0], inv, atol=1e-6)
