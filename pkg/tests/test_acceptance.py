"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line
(visible with ``pytest -v``) before asserting, so a failing criterion is
reported honestly rather than hidden behind an error."""

import time

import numpy as np
import pytest

from quatsub import fixtures
from quatsub.classify import H_ANTI_INVARIANT, H_LAGRANGIAN, classify
from quatsub.cli import main
from quatsub.expr import evaluate, jet2, parse_expr
from quatsub.linalg import max_principal_angle
from quatsub.quaternionic import TAGS
from quatsub.riemann import MetricField, christoffel
from quatsub.sampling import SamplePlan
from quatsub.submersion import at, harmonicity, local_geometries
from quatsub.theorems import (
    CHECKS,
    ProductType,
    covariant_identity_suite,
    foliation_flags,
    horizontal_integrability,
    horizontal_umbilic_check,
    integrability_check,
    oneill_identity_suite,
    product_classification,
)

from conftest import central_grad


@pytest.fixture
def verdict(capsys, request):
    """Call with (ok, detail); prints the line and returns ok."""

    def emit(ok: bool, detail: str) -> bool:
        with capsys.disabled():
            print(f"\nACCEPTANCE {request.node.name}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return emit


def e(i, n):
    v = np.zeros(n)
    v[i - 1] = 1.0
    return v


def test_criterion_01_anti_invariant_example(verdict):
    start = time.perf_counter()
    fx = fixtures.load("example-3-1")
    cls = classify(fx)
    local = at(fx, fx.sample_points()[0])
    angle = max_principal_angle(local.vertical_basis, np.stack([e(1, 12), e(5, 12), e(9, 12)], axis=1))
    images = {"I": (2, 6, 10), "J": (3, 7, 11), "K": (4, 8, 12)}
    exact = all(
        np.array_equal(fx.structure.matrix(t, local.p) @ e(s, 12), e(d, 12))
        for t, dst in images.items()
        for s, d in zip((1, 5, 9), dst)
    )
    elapsed = time.perf_counter() - start
    ok = cls.overall == H_ANTI_INVARIANT and angle < 1e-10 and exact and elapsed < 1.0
    assert verdict(ok, f"class={cls.overall} angle={angle:.1e} images_exact={exact} time={elapsed:.2f}s")


def test_criterion_02_lagrangian_example(verdict):
    fx = fixtures.load("example-3-2")
    cls = classify(fx)
    harm = harmonicity(fx)
    obs = cls.obstruction
    ok = cls.overall == H_LAGRANGIAN and harm.worst_trace_norm < 1e-9 and not obs.h_anti_invariant_possible
    assert verdict(ok, f"class={cls.overall} harmonic_residual={harm.worst_trace_norm:.1e} "
                       f"h-anti-invariant possible={obs.h_anti_invariant_possible}")


def test_criterion_03_oneill_suite(verdict):
    start = time.perf_counter()
    worst = {}
    for name in fixtures.names():
        fx = fixtures.load(name)
        rep = oneill_identity_suite(fx, points=fx.sample_points(SamplePlan(count=100)))
        worst[name] = max(rep.worst.values())
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) < 1e-7 and elapsed < 10.0
    assert verdict(ok, f"worst={max(worst.values()):.1e} fixtures={len(worst)} time={elapsed:.2f}s")


def test_criterion_04_analytic_tensor_values(verdict):
    polar = fixtures.load("polar")
    V = np.array([0.0, 1.0])
    T = at(polar, [1.0, 0.0]).T(V, V)
    t_err = float(np.abs(T - [-1.0, 0.0]).max())
    h_err = 0.0
    for r in np.linspace(0.55, 1.95, 20):
        p = np.array([r * np.cos(0.2), r * np.sin(0.2)])
        h_err = max(h_err, float(np.abs(at(polar, p).mean_curvature() + p / r**2).max()))
    heis = fixtures.load("heisenberg")
    a_err = 0.0
    for p in heis.sample_points(SamplePlan(count=20)):
        X = np.array([1.0, 0.0, -p[1] / 2])
        Y = np.array([0.0, 1.0, p[0] / 2])
        a_err = max(a_err, float(np.abs(at(heis, p).A(X, Y) - [0.0, 0.0, 0.5]).max()))
    integ = horizontal_integrability(heis)
    bracket = integ.summary["worst_direct_residual"]
    ok = (t_err < 1e-6 and h_err < 1e-6 and a_err < 1e-6
          and integ.property_holds is False and abs(bracket - 1.0) < 1e-6)
    assert verdict(ok, f"T_err={t_err:.1e} H_err={h_err:.1e} A_err={a_err:.1e} |V[X,Y]|={bracket:.9f}")


def test_criterion_05_two_path_equivalence(verdict):
    bad = []
    for name in ("example-3-1", "example-3-2", "gibbons-hawking-v1"):
        fx = fixtures.load(name)
        locs = local_geometries(fx, fx.sample_points())
        for cid, check in CHECKS.items():
            rep = check(fx, locals_=locs)
            if rep.verdict != "pass" or rep.applicable_points != len(locs):
                bad.append(f"{name}:{cid}")
    gh = fixtures.load("gibbons-hawking-v1")
    integ = integrability_check(gh)
    identity = integ.summary["worst_identity_residual"]
    nonzero = integ.summary["worst_direct_residual"]
    ok = not bad and identity < 1e-6 and nonzero > 1e-3
    assert verdict(ok, f"disagreeing={bad or 'none'} identity_residual={identity:.1e} "
                       f"bracket_term={nonzero:.2e}")


def test_criterion_06_umbilic_horizontal_invariant(verdict):
    worst = 0.0
    for name in fixtures.names():
        rep = horizontal_umbilic_check(fixtures.load(name))
        worst = max(worst, rep.summary["worst_key_step"])
    flat = fixtures.load("flat-product")
    rep = horizontal_umbilic_check(flat)
    flags = foliation_flags(flat, "horizontal")
    hperp = rep.summary["worst_|H_perp|"]
    ok = worst < 1e-8 and flags.umbilic.holds and hperp < 1e-9 and flags.totally_geodesic.holds
    assert verdict(ok, f"key_step={worst:.1e} flat: umbilic={flags.umbilic.holds} "
                       f"H_perp={hperp:.1e} geodesic={flags.totally_geodesic.holds}")


def test_criterion_07_product_classification(verdict):
    flat = product_classification(fixtures.load("flat-product")).product
    warped = product_classification(fixtures.load("polar-warped"))
    twisted = product_classification(fixtures.load("twisted-exp")).product
    at11 = foliation_flags(fixtures.load("twisted-exp"), "vertical", points=np.array([[1.0, 1.0]]))
    ok = (
        flat == ProductType.RIEMANNIAN_PRODUCT
        and warped.product == ProductType.WARPED
        and warped.vertical.spheric.residual < 1e-4
        and twisted == ProductType.TWISTED
        and twisted != ProductType.WARPED
        and at11.spheric.residual > 0.1
    )
    assert verdict(ok, f"flat={flat.value} polar-warped={warped.product.value} "
                       f"(spheric {warped.vertical.spheric.residual:.1e}) twisted-exp={twisted.value} "
                       f"(spheric at (1,1) {at11.spheric.residual:.3f})")


def _random_expr(rng, dim):
    terms = []
    for _ in range(rng.integers(2, 5)):
        i, j = rng.integers(1, dim + 1, size=2)
        c = rng.uniform(-1, 1)
        kind = rng.integers(0, 4)
        if kind == 0:
            terms.append(f"{c:.3f}*x{i}*x{j}")
        elif kind == 1:
            terms.append(f"{c:.3f}*sin(x{i} + {rng.uniform(-1, 1):.3f}*x{j})")
        elif kind == 2:
            terms.append(f"{c:.3f}*cos(x{i})*x{j}^2")
        else:
            terms.append(f"{c:.3f}*exp({rng.uniform(-0.5, 0.5):.3f}*x{i})")
    return " + ".join(terms)


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def test_criterion_08_derivative_integrity(verdict):
    rng = np.random.default_rng(2024)
    worst = {"jacobian": 0.0, "hessian": 0.0, "christoffel": 0.0}
    for _ in range(100):
        dim = int(rng.integers(2, 5))
        p = rng.uniform(-0.8, 0.8, dim)
        # scalar component: jet gradient and Hessian against differences of values and gradients
        ex = parse_expr(_random_expr(rng, dim), dim)
        j = jet2(ex, p[None, :])
        fd_grad = central_grad(lambda q: evaluate(ex, q), p)
        fd_hess = central_grad(lambda q: jet2(ex, np.asarray(q)[None, :]).grad[0], p)
        worst["jacobian"] = max(worst["jacobian"], _rel(j.grad[0], fd_grad))
        worst["hessian"] = max(worst["hessian"], _rel(j.hess[0], fd_hess))
        # metric diag(2 + small) + small symmetric off-diagonal part keeps it positive-definite
        rows = [["0"] * dim for _ in range(dim)]
        for a in range(dim):
            rows[a][a] = f"2 + 0.3*sin({_random_expr(rng, dim)})"
            for b in range(a + 1, dim):
                off = f"0.2*cos({_random_expr(rng, dim)})"
                rows[a][b] = rows[b][a] = off
        g = MetricField.parse(rows, dim)
        dG = central_grad(lambda q: g.values(np.asarray(q)[None, :])[0], p)  # [l, j, i] = d_i g_lj
        Ginv = np.linalg.inv(g.values(p[None, :])[0])
        low = 0.5 * (np.einsum("lji->lij", dG) + np.einsum("lij->lij", dG) - np.einsum("ijl->lij", dG))
        fd_gamma = np.einsum("kl,lij->kij", Ginv, low)
        worst["christoffel"] = max(worst["christoffel"], _rel(christoffel(g, p), fd_gamma))
    ok = max(worst.values()) < 1e-6
    assert verdict(ok, " ".join(f"{k}={v:.1e}" for k, v in worst.items()) + " manifests=100")


def test_criterion_09_covariant_identity_suite(verdict):
    out = {}
    for name in ("example-3-1", "gibbons-hawking-v1"):
        fx = fixtures.load(name)
        rep = covariant_identity_suite(fx, points=fx.sample_points(SamplePlan(count=20)))
        out[name] = (rep.points_checked, max(rep.worst.values()), len(rep.worst))
    ok = all(n == 20 and w < 1e-7 and k == 6 for n, w, k in out.values())
    assert verdict(ok, " ".join(f"{k}: points={n} worst={w:.1e} identities={c}" for k, (n, w, c) in out.items()))


def test_criterion_10_determinism(verdict, tmp_path, capsys):
    paths = [tmp_path / "one.json", tmp_path / "two.json"]
    codes = [main(["report", "--all", "--fixture", "example-3-1", "--seed", "11", "--json", str(p)])
             for p in paths]
    capsys.readouterr()
    same = paths[0].read_bytes() == paths[1].read_bytes()
    ok = same and codes == [0, 0]
    assert verdict(ok, f"byte_identical={same} exit_codes={codes} size={paths[0].stat().st_size}")
