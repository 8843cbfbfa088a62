"""Acceptance suite: one test per quantitative claim, printed pass/fail.

Run with ``pytest -v -s tests/test_acceptance.py`` to see one line per
criterion.  Every tolerance is fixed here; nothing is calibrated at run
time.
"""

import numpy as np
import pytest

import branevortex as bv
from branevortex import NonConvergenceError, build_coupling
from branevortex.diagnostics import (check_flux, check_flux_refined,
                                     check_K_identity,
                                     check_symmetric_reduction,
                                     check_uniqueness, finite_max_diff,
                                     flux_expected)
from branevortex.periodic import (energy, existence_condition, gradient,
                                  hessian_vector, make_periodic_problem,
                                  minimize)
from branevortex.planar import decay_rate, make_planar_problem, planar_minimize

TWO_PI = 2.0 * np.pi


def _report(criterion, ok, detail):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} -- {detail}")
    assert ok, detail


# ---------------------------------------------------------------------------
# shared expensive solves
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def torus256_problem():
    grid = bv.TorusGrid(TWO_PI, TWO_PI, 256, 256)      # |cell| = 4 pi^2
    spec = bv.make_vortex_spec([[[2.2, 3.3]], [[4.1, 2.9]]], grid)
    return make_periodic_problem(spec)


@pytest.fixture(scope="module")
def torus256_result(torus256_problem):
    return minimize(torus256_problem, tol=1e-10)


def test_criterion_1_coupling_identities():
    worst = 0.0
    for l in range(2, 51):
        cd = build_coupling(l)
        eye = np.eye(l)
        worst = max(
            worst,
            float(np.max(np.abs(cd.L @ cd.L.T - cd.A))),
            float(np.max(np.abs(cd.L @ cd.L_inv - eye))),
            float(np.max(np.abs(cd.A @ cd.A_inv - eye))),
            float(np.max(np.abs(np.sort(cd.eigenvalues)
                                - np.sort(np.linalg.eigvalsh(cd.A))))),
            float(np.max(np.abs(np.sort(cd.eigenvalues)
                                - np.r_[np.ones(l - 1), l + 1.0]))))
    _report(1, worst < 1e-12,
            f"coupling identities for l=2..50, worst deviation {worst:.2e}")


def test_criterion_2_variational_consistency():
    grid = bv.TorusGrid(TWO_PI, TWO_PI, 32, 32)
    spec = bv.make_vortex_spec([[[2.0, 2.5]], [[4.0, 3.5]], []], grid)
    prob = make_periodic_problem(spec)
    rng = np.random.default_rng(42)
    w = 0.4 * rng.standard_normal((3, 32, 32))
    ca = grid.cell_area

    s = rng.standard_normal((3, 32, 32))
    eps = 1e-5
    fd = (energy(prob, w + eps * s) - energy(prob, w - eps * s)) / (2 * eps)
    inner = float(np.sum(gradient(prob, w) * s)) * ca
    grad_rel = abs(fd - inner) / abs(inner)

    fdg = (gradient(prob, w + eps * s) - gradient(prob, w - eps * s)) / (2 * eps)
    hs = hessian_vector(prob, w, s)
    hess_rel = float(np.max(np.abs(fdg - hs))) / float(np.max(np.abs(hs)))

    pos_ok = True
    for _ in range(100):
        z = rng.standard_normal((3, 32, 32))
        if float(np.sum(z * hessian_vector(prob, w, z))) * ca <= 0.0:
            pos_ok = False
            break
    ok = grad_rel < 1e-6 and hess_rel < 1e-5 and pos_ok
    _report(2, ok, f"gradient FD rel {grad_rel:.2e} (<1e-6), Hessian FD rel "
                   f"{hess_rel:.2e} (<1e-5), 100 positive curvatures: {pos_ok}")


def test_criterion_3_sharp_existence_gate():
    grid_a = bv.TorusGrid(TWO_PI, TWO_PI, 32, 32)
    spec_a = bv.make_vortex_spec([[[1.0, 1.0]], [[2.0, 2.0]]], grid_a)
    gate_a = existence_condition(spec_a)
    admissible_ok = gate_a.admissible \
        and gate_a.threshold == pytest.approx(3.0 * np.pi, abs=1e-12)

    L = np.sqrt(4.0 * np.pi)
    grid_b = bv.TorusGrid(L, L, 64, 64)
    p = [L / 2, L / 2]
    with pytest.warns(RuntimeWarning):
        spec_b = bv.make_vortex_spec([[p, p, p], []], grid_b)
        prob_b = make_periodic_problem(spec_b)
    gate_b = prob_b.gate
    rejected_ok = (not gate_b.admissible
                   and gate_b.K[0] == pytest.approx(-4.0 * np.pi, abs=1e-12))

    with pytest.raises(NonConvergenceError) as excinfo:
        minimize(prob_b, tol=1e-10, force=True, max_outer=200)
    means = np.array(excinfo.value.history.mean_w)[:, 0]
    drift_ok = abs(means[-1]) > 1e3 and bool(np.all(np.diff(means) < 1e-12))

    ok = admissible_ok and rejected_ok and drift_ok
    _report(3, ok, f"gate: N=(1,1) admissible at threshold 3pi ({admissible_ok}); "
                   f"N=(3,0) rejected with K1=-4pi ({rejected_ok}); forced run "
                   f"drifts monotonically to |mean w1|={abs(means[-1]):.2e} "
                   f"(>1e3) without converging ({drift_ok})")


def test_criterion_4_torus_solve(torus256_problem, torus256_result):
    prob, res = torus256_problem, torus256_result
    grad_ok = res.converged and res.grad_norm <= 1e-10
    resid_ok = res.residual <= 1e-8 * (prob.spec.l + 1) * np.sqrt(prob.grid.area)
    K_int = np.array([prob.grid.integrate(res.exp_u[j]) for j in range(2)])
    K_rel = float(np.max(np.abs(K_int - prob.K) / prob.K))
    K_ok = K_rel < 1e-3 and np.allclose(prob.K, 35.2896, atol=1e-3)
    flux = check_flux(res)
    flux_rel = float(np.max(np.abs(flux - 4 * np.pi))) / (4 * np.pi)
    flux_ok = flux_rel < 0.005
    ok = grad_ok and resid_ok and K_ok and flux_ok
    _report(4, ok, f"256^2 torus: grad {res.grad_norm:.2e} (<=1e-10), residual "
                   f"{res.residual:.2e}, K rel err {K_rel:.2e} (<1e-3, K~35.290), "
                   f"flux rel err {flux_rel:.2e} (<0.5%)")


def test_criterion_5_uniqueness(torus256_problem):
    delta = check_uniqueness(torus256_problem, trials=3, seed=2026)
    _report(5, delta < 1e-6,
            f"3 random initializations agree to {delta:.2e} max norm (<1e-6)")


def test_criterion_6_symmetric_reduction():
    torus = bv.TorusGrid(TWO_PI, TWO_PI, 128, 128)
    sym2 = check_symmetric_reduction(2, [[np.pi, np.pi]], torus)
    box = bv.PlanarGrid(12.0, 256, 256)
    sym4 = check_symmetric_reduction(4, [[0.0, 0.0]], box)
    ok = (sym2.max_pair_delta < 1e-10 and sym4.max_pair_delta < 1e-10
          and sym4.profile_delta < 1e-3)
    _report(6, ok, f"l=2 torus deviation {sym2.max_pair_delta:.2e} and l=4 "
                   f"planar deviation {sym4.max_pair_delta:.2e} (<1e-10); "
                   f"l=4 profile vs radial shooting {sym4.profile_delta:.2e} "
                   f"(<1e-3)")


def test_criterion_7_planar_quantization_and_decay():
    grid = bv.PlanarGrid(20.0, 256, 256)
    spec = bv.make_vortex_spec([[[0.0, 0.0]], []], grid)
    prob = make_planar_problem(spec, mu=1.0)
    res = planar_minimize(prob, tol=1e-10)

    integrand = res.exp_u + res.exp_u.sum(axis=0)[None] - 3.0
    q = np.array([grid.integrate(integrand[j]) for j in range(2)])
    q_err = float(np.max(np.abs(q + flux_expected(res)))) / (4 * np.pi)
    quant_ok = q_err < 0.01

    fit = decay_rate(res, window=(6.0, 12.0))
    decay_ok = 0.8 <= fit.rate <= 1.1 and abs(fit.grad_rate - fit.rate) <= 0.15

    big = bv.PlanarGrid(25.0, 320, 320)         # same spacing, aligned nodes
    spec_big = bv.make_vortex_spec([[[0.0, 0.0]], []], big)
    prob_big = make_planar_problem(spec_big, mu=1.0, blend=prob.blend)
    res_big = planar_minimize(prob_big, tol=1e-10)
    s = 32
    delta_R = finite_max_diff(res.u, res_big.u[:, s:s + 256, s:s + 256])
    trunc_ok = delta_R < 1e-5

    ok = quant_ok and decay_ok and trunc_ok
    _report(7, ok, f"R=20 quantized integrals rel err {q_err:.2e} (<1%); decay "
                   f"rate {fit.rate:.3f} in [0.8,1.1] with gradient rate "
                   f"{fit.grad_rate:.3f} (gap {abs(fit.grad_rate - fit.rate):.3f}"
                   f" <= 0.15); R=20 vs R=25 change {delta_R:.2e} (<1e-5)")


def test_criterion_8_refinement_order():
    pts = [[[2.2, 3.3]], [[4.1, 2.9]]]
    errs = []
    for n in (64, 128, 256):
        grid = bv.TorusGrid(TWO_PI, TWO_PI, n, n)
        spec = bv.make_vortex_spec(pts, grid)
        res = minimize(make_periodic_problem(spec), tol=1e-11)
        errs.append(float(np.max(np.abs(check_flux_refined(res)
                                        - flux_expected(res)))))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = errs[0] > errs[1] > errs[2] and min(orders) >= 2.0
    _report(8, ok, f"flux errors {errs[0]:.2e} -> {errs[1]:.2e} -> "
                   f"{errs[2]:.2e}; observed orders "
                   f"{orders[0]:.1f}, {orders[1]:.1f} (>=2, monotone)")
