import dataclasses
import json

import numpy as np
import pytest

import branevortex as bv
from branevortex import NotConvergedError, WrongDomainError
from branevortex.diagnostics import (build_report, check_flux,
                                     check_flux_refined, check_K_identity,
                                     check_K_identity_refined,
                                     check_symmetric_reduction,
                                     check_uniqueness, finite_max_diff,
                                     flux_expected, reconstruct_fields)
from branevortex.periodic import make_periodic_problem, minimize
from branevortex.planar import make_planar_problem, planar_minimize

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def torus_result():
    grid = bv.TorusGrid(TWO_PI, TWO_PI, 64, 64)
    spec = bv.make_vortex_spec([[[2.2, 3.3]], [[4.1, 2.9]], []], grid)
    return minimize(make_periodic_problem(spec), tol=1e-10)


@pytest.fixture(scope="module")
def vacuum_result(vacuum_torus_problem):
    return minimize(vacuum_torus_problem, tol=1e-10)


@pytest.fixture(scope="module")
def planar_result():
    grid = bv.PlanarGrid(12.0, 128, 128)
    spec = bv.make_vortex_spec([[[0.0, 0.0]], []], grid)
    return planar_minimize(make_planar_problem(spec, mu=1.0), tol=1e-10)


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def test_vacuum_reconstruction(vacuum_result):
    q_abs, F = reconstruct_fields(vacuum_result)
    assert np.max(np.abs(q_abs - 1.0)) < 1e-13
    assert np.max(np.abs(F)) < 1e-12


def test_field_bounds_and_center_values(torus_result):
    q_abs, F = reconstruct_fields(torus_result)
    l = 3
    assert np.all(F <= l + 1.0)
    grid = torus_result.problem.grid
    # at the first component's vortex the density vanishes and F_1 > 0
    ix = int(round(2.2 / grid.hx)) % grid.nx
    iy = int(round(3.3 / grid.hy)) % grid.ny
    assert q_abs[0, ix, iy] < 0.05
    assert F[0, ix, iy] > 0.0


def test_reconstruction_requires_convergence(torus_result):
    broken = dataclasses.replace(torus_result, converged=False)
    with pytest.raises(NotConvergedError):
        reconstruct_fields(broken)


# ---------------------------------------------------------------------------
# flux and K checks
# ---------------------------------------------------------------------------

def test_flux_quantization_torus(torus_result):
    flux = check_flux(torus_result)
    expected = flux_expected(torus_result)
    assert np.allclose(expected, [4 * np.pi, 4 * np.pi, 0.0])
    assert np.max(np.abs(flux - expected)) < 0.005 * 4 * np.pi


def test_flux_vacuum_zero(vacuum_result):
    assert np.max(np.abs(check_flux(vacuum_result))) < 1e-12


def test_flux_refined_senses_discretization(torus_result):
    refined = check_flux_refined(torus_result)
    expected = flux_expected(torus_result)
    err = np.max(np.abs(refined - expected))
    assert err < 1e-4          # small, but above the native-quadrature lock
    assert err > 0.0


def test_K_identity(torus_result):
    res = check_K_identity(torus_result)
    K = torus_result.problem.K
    assert np.max(np.abs(res) / K) < 1e-3


def test_K_identity_refined(torus_result):
    res = check_K_identity_refined(torus_result)
    assert np.max(np.abs(res) / torus_result.problem.K) < 1e-3


def test_K_identity_example_l3():
    # N = (2, 1, 0) on |cell| = 16 pi: threshold (l+1)|cell|/(4 pi) = 16
    L = np.sqrt(16 * np.pi)
    grid = bv.TorusGrid(L, L, 64, 64)
    pts = [[[1.0, 1.0], [2.5, 2.0]], [[3.0, 3.5]], []]
    spec = bv.make_vortex_spec(pts, grid)
    prob = make_periodic_problem(spec)
    counts = np.array([2.0, 1.0, 0.0])
    K_manual = 16 * np.pi - 4 * np.pi * counts + np.pi * counts.sum()
    assert np.allclose(prob.K, K_manual)
    res = minimize(prob, tol=1e-10)
    integrals = np.array([grid.integrate(res.exp_u[j]) for j in range(3)])
    assert np.max(np.abs(integrals - K_manual) / K_manual) < 1e-3


def test_K_identity_rejects_planar(planar_result):
    with pytest.raises(WrongDomainError):
        check_K_identity(planar_result)


def test_flux_quantization_planar(planar_result):
    flux = check_flux(planar_result)
    expected = flux_expected(planar_result)
    assert np.max(np.abs(flux - expected)) < 0.01 * 4 * np.pi


# ---------------------------------------------------------------------------
# uniqueness and symmetry
# ---------------------------------------------------------------------------

def test_uniqueness_torus(torus_result):
    delta = check_uniqueness(torus_result.problem, trials=3, seed=5)
    assert delta < 1e-6


def test_uniqueness_vacuum(vacuum_torus_problem):
    delta = check_uniqueness(vacuum_torus_problem, trials=2, seed=7)
    assert delta < 1e-7


def test_uniqueness_needs_two_trials(vacuum_torus_problem):
    with pytest.raises(ValueError):
        check_uniqueness(vacuum_torus_problem, trials=1)


def test_symmetric_reduction_torus():
    grid = bv.TorusGrid(TWO_PI, TWO_PI, 64, 64)
    sym = check_symmetric_reduction(2, [[np.pi, np.pi]], grid)
    assert sym.max_pair_delta < 1e-10
    assert sym.profile_delta is None


def test_symmetric_reduction_planar_profile():
    grid = bv.PlanarGrid(12.0, 128, 128)
    sym = check_symmetric_reduction(2, [[0.0, 0.0]], grid)
    assert sym.max_pair_delta < 1e-10
    assert sym.profile_delta < 1e-3


def test_symmetric_reduction_vacuum():
    grid = bv.TorusGrid(TWO_PI, TWO_PI, 32, 32)
    sym = check_symmetric_reduction(2, np.zeros((0, 2)), grid)
    assert sym.max_pair_delta == 0.0


def test_finite_max_diff_masks_centers():
    a = np.array([[-np.inf, 1.0], [2.0, 3.0]])
    b = np.array([[-np.inf, 1.5], [2.0, 3.0]])
    assert finite_max_diff(a, b) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------

def test_report_keys_and_pass(torus_result):
    rep = build_report(torus_result, uniqueness_trials=2, seed=3)
    d = rep.to_dict()
    for key in ("flux", "flux_expected", "K_residuals", "residuals", "decay",
                "multistart_delta", "symmetric_delta", "tolerances"):
        assert key in d
    assert rep.all_passed
    assert d["decay"] is None
    assert d["multistart_delta"] < 1e-6
    # serialization is deterministic
    assert rep.to_json() == rep.to_json()
    json.loads(rep.to_json())


def test_report_planar_with_decay(planar_result):
    rep = build_report(planar_result, decay_window=(5.0, 9.0))
    d = rep.to_dict()
    assert d["K_residuals"] is None
    assert 0.8 <= d["decay"]["rate"] <= 1.1
    assert rep.all_passed
