import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from branevortex import (DomainError, ExistenceGateError,
                         PeriodicVortexSolver, PlanarVortexSolver, ShapeError)

TWO_PI = 2.0 * np.pi


def test_get_params_round_trip():
    est = PeriodicVortexSolver(nx=32, tol=1e-9)
    params = est.get_params()
    assert params["nx"] == 32
    assert params["tol"] == 1e-9
    est2 = PeriodicVortexSolver(**params)
    assert est2.get_params() == params


def test_clone_preserves_params():
    est = PlanarVortexSolver(R=10.0, nx=64, mu=2.0)
    copy = clone(est)
    assert copy.get_params() == est.get_params()


def test_set_params_chain():
    est = PeriodicVortexSolver()
    est.set_params(nx=16, ny=24)
    assert est.nx == 16 and est.ny == 24


def test_periodic_fit_attributes():
    est = PeriodicVortexSolver(nx=32, tol=1e-10)
    est.fit([[[2.0, 3.0]], [[4.0, 2.0]]])
    assert est.converged_
    assert est.u_.shape == (2, 32, 32)
    assert est.n_iter_ > 0
    assert np.allclose(est.flux_expected_, 4 * np.pi)
    assert np.max(np.abs(est.flux_ - est.flux_expected_)) < 0.005 * 4 * np.pi
    assert np.max(np.abs(est.K_residuals_) / est.K_) < 1e-3
    assert est.gate_.admissible
    rep = est.report()
    assert rep.all_passed


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_periodic_gate_method_without_solving():
    est = PeriodicVortexSolver(Lx=np.sqrt(4 * np.pi), Ly=np.sqrt(4 * np.pi),
                               nx=32)
    p = [0.3, 0.3]
    gate = est.gate([[p, p, p], []])
    assert not gate.admissible
    with pytest.raises(ExistenceGateError):
        est.fit([[p, p, p], []])


def test_unfitted_report_raises():
    with pytest.raises(NotFittedError):
        PeriodicVortexSolver().report()
    with pytest.raises(NotFittedError):
        PlanarVortexSolver().decay()


def test_planar_fit_and_decay():
    est = PlanarVortexSolver(R=12.0, nx=128, mu=1.0, tol=1e-10)
    est.fit([[[0.0, 0.0]], []])
    assert est.converged_
    assert est.mu_ == pytest.approx(8.0)     # escalated from 1
    fit = est.decay(window=(5.0, 9.0))
    assert 0.8 <= fit.rate <= 1.1


def test_input_validation_errors():
    est = PeriodicVortexSolver(nx=32)
    with pytest.raises(ShapeError):
        est.fit(np.zeros((3, 2)))            # flat point array, not per component
    with pytest.raises(ShapeError):
        est.fit([[[1.0, 1.0]]])              # single component
    with pytest.raises(DomainError):
        PeriodicVortexSolver(nx=4).fit([[], []])
    with pytest.raises(DomainError):
        PlanarVortexSolver(R=-3.0).fit([[], []])


def test_params_stored_verbatim():
    # sklearn convention: __init__ must not transform its arguments
    est = PlanarVortexSolver(R=20, nx=256, ny=None, mu=1.0)
    assert est.ny is None
    assert est.R == 20
