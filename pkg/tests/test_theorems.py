import numpy as np
import pytest

from quatsub.errors import InconsistencyError
from quatsub.theorems import (
    CHECKS,
    INAPPLICABLE,
    ONEILL_IDENTITIES,
    ProductType,
    covariant_identity_suite,
    foliation_flags,
    harmonic_check,
    horizontal_umbilic_check,
    integrability_check,
    nonexistence_invariants,
    oneill_identity_suite,
    product_classification,
    totally_geodesic_check,
    vertical_umbilic_check,
)
from quatsub.sampling import SamplePlan

STRUCTURED = ["example-3-1", "example-3-2", "gibbons-hawking-v1"]


@pytest.mark.parametrize("name", STRUCTURED)
@pytest.mark.parametrize("check", list(CHECKS))
def test_condition_and_direct_paths_agree(corpus, name, check):
    fx = corpus[name]
    rep = CHECKS[check](fx, points=fx.sample_points(SamplePlan(count=20)))
    assert rep.verdict == "pass", (rep.disagreements, rep.summary)
    assert rep.applicable_points == 20
    assert all(pr.agrees for pr in rep.points)


def test_example_anti_invariant_has_every_property(corpus):
    fx = corpus["example-3-1"]
    for check in CHECKS.values():
        assert check(fx).property_holds is True


def test_gibbons_hawking_is_curved(corpus):
    fx = corpus["gibbons-hawking-v1"]
    tg = totally_geodesic_check(fx)
    assert tg.property_holds is False
    assert max(v for k, v in tg.summary.items() if k.startswith("worst[")) > 1e-3
    assert harmonic_check(fx).property_holds is False
    # 1-dim fibres are umbilic, and the projected condition sees that
    assert vertical_umbilic_check(fx).property_holds is True


def test_integrability_identity_with_nonzero_terms(corpus):
    fx = corpus["gibbons-hawking-v1"]
    rep = integrability_check(fx, points=fx.sample_points(SamplePlan(count=20)))
    assert rep.summary["worst_identity_residual"] < 1e-6
    assert rep.summary["worst_direct_residual"] > 1e-2
    assert rep.property_holds is False


def test_heisenberg_not_integrable_but_unstructured(corpus):
    rep = integrability_check(corpus["heisenberg"])
    assert rep.verdict == INAPPLICABLE
    assert rep.property_holds is False
    assert rep.summary["worst_direct_residual"] == pytest.approx(1.0)


def test_polar_is_inapplicable_with_direct_flags(corpus):
    rep = CHECKS["vertical-geodesic"](corpus["polar"])
    assert rep.verdict == INAPPLICABLE
    assert rep.property_holds is False


def test_lagrangian_example_is_harmonic(corpus):
    rep = harmonic_check(corpus["example-3-2"])
    assert rep.property_holds
    assert rep.summary["worst_direct_residual"] < 1e-9


def test_horizontal_umbilic_key_step_everywhere(corpus):
    for name, fx in corpus.items():
        rep = horizontal_umbilic_check(fx)
        assert rep.summary["worst_key_step"] < 1e-8, name
        assert rep.verdict == "pass", name


def test_flat_product_horizontal_flags(corpus):
    rep = horizontal_umbilic_check(corpus["flat-product"])
    assert rep.property_holds
    assert rep.summary["worst_|H_perp|"] < 1e-9
    flags = foliation_flags(corpus["flat-product"], "horizontal")
    assert flags.umbilic.holds and flags.totally_geodesic.holds


def test_polar_warped_vertical_is_spheric(corpus):
    flags = foliation_flags(corpus["polar-warped"], "vertical")
    assert flags.umbilic.holds and flags.spheric.holds
    assert not flags.totally_geodesic.holds
    assert flags.spheric.residual < 1e-4


def test_twisted_vertical_is_umbilic_not_spheric(corpus):
    fx = corpus["twisted-exp"]
    flags = foliation_flags(fx, "vertical", points=np.array([[1.0, 1.0]]))
    assert flags.umbilic.holds
    assert not flags.spheric.holds
    # hand computation: H = -s d_r, and for unit V = exp(-rs) d_s the horizontal
    # part of nabla_V H is -exp(-rs) d_r, of length exp(-1) at (1, 1)
    assert flags.spheric.residual == pytest.approx(np.exp(-1.0), rel=1e-4)


@pytest.mark.parametrize(
    "name, expected",
    [
        ("flat-product", ProductType.RIEMANNIAN_PRODUCT),
        ("example-3-1", ProductType.RIEMANNIAN_PRODUCT),
        ("example-3-2", ProductType.RIEMANNIAN_PRODUCT),
        ("polar-warped", ProductType.WARPED),
        ("polar", ProductType.WARPED),
        ("twisted-exp", ProductType.TWISTED),
        ("heisenberg", ProductType.NONE),
    ],
)
def test_product_types(corpus, name, expected):
    prod = product_classification(corpus[name])
    assert prod.product == expected
    assert prod.label == f"flags consistent with {expected.value}"


def test_twisted_is_not_warped(corpus):
    assert product_classification(corpus["twisted-exp"]).product != ProductType.WARPED


def test_oneill_suite_on_every_fixture(corpus):
    for name, fx in corpus.items():
        rep = oneill_identity_suite(fx, points=fx.sample_points(SamplePlan(count=20)))
        assert rep.passed, (name, rep.worst)
        assert set(rep.worst) == set(ONEILL_IDENTITIES)


def test_covariant_suite_skips_without_anti_invariant_points(corpus):
    rep = covariant_identity_suite(corpus["example-3-2"])
    assert rep.skipped and rep.points_checked == 0


def test_nonexistence_holds_on_corpus(corpus):
    records = nonexistence_invariants(list(corpus.values()))
    assert not any(r.forbidden for r in records)
    by_name = {r.fixture: r for r in records}
    assert by_name["example-3-1"].product == "RiemannianProduct"


def test_nonexistence_raises_on_forbidden_pattern(monkeypatch, corpus):
    import quatsub.theorems as th

    real = th.product_classification

    def fake(*args, **kwargs):
        prod = real(*args, **kwargs)
        prod.horizontal.totally_geodesic.holds = False
        return prod

    monkeypatch.setattr(th, "product_classification", fake)
    with pytest.raises(InconsistencyError):
        nonexistence_invariants([corpus["example-3-1"]])
