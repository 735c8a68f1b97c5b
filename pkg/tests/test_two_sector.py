import math

import numpy as np
import pytest

from errors import DegenerateRates, InadmissibleState, InequalityDivergence, NonFiniteState
from two_sector import (SectorParams, SectorState, asymptotic_inequality, closed_form, closed_form_path,
                        decompose, eigen, eigen_formula, inequality, integrate, relaxation_time, rhs,
                        system_matrix, time_grid, total_activity)

REFERENCE = SectorParams(alpha1=0.02, alpha2=-0.05, beta=0.01)
START = SectorState(w1=0.1, w2=0.9)


def test_eigen_formula_matches_direct_decomposition():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 1000:
        alpha1, alpha2 = rng.uniform(-0.2, 0.2, size=2)
        beta = rng.uniform(0.0, 1.0)
        if abs(alpha1 - alpha2) < 1e-6 or math.hypot(alpha1 - alpha2, beta) < 1e-3:
            continue
        params = SectorParams(alpha1, alpha2, beta)
        system = eigen_formula(params)
        values, vectors = np.linalg.eigh(system_matrix(params))
        assert system.lambda_plus == pytest.approx(values[1], abs=1e-12)
        assert system.lambda_minus == pytest.approx(values[0], abs=1e-12)
        assert abs(np.dot(system.v_plus, vectors[:, 1])) == pytest.approx(1.0, abs=1e-10)
        assert abs(np.dot(system.v_minus, vectors[:, 0])) == pytest.approx(1.0, abs=1e-10)
        checked += 1


def test_reference_eigenvalues():
    system = eigen(REFERENCE)
    assert system.lambda_plus == pytest.approx(0.015355, abs=1e-6)
    assert system.lambda_minus == pytest.approx(-0.055355, abs=1e-6)


def test_trace_and_determinant():
    system = eigen(REFERENCE)
    assert system.lambda_plus + system.lambda_minus == pytest.approx(0.02 - 0.05 - 0.01, abs=1e-15)
    assert system.lambda_plus * system.lambda_minus == pytest.approx(0.02 * -0.05 - 0.01 * (0.02 - 0.05) / 2,
                                                                     abs=1e-15)


def test_eigenvectors_are_orthonormal():
    system = eigen(REFERENCE)
    assert np.linalg.norm(system.v_plus) == pytest.approx(1.0, abs=1e-15)
    assert np.linalg.norm(system.v_minus) == pytest.approx(1.0, abs=1e-15)
    assert np.dot(system.v_plus, system.v_minus) == pytest.approx(0.0, abs=1e-15)
    assert system.v_plus[0] > system.v_plus[1] > 0.0


def test_no_transfer_gives_intrinsic_rates():
    system = eigen(SectorParams(0.02, -0.05, 0.0))
    assert (system.lambda_plus, system.lambda_minus) == (0.02, -0.05)
    assert system.v_plus == (1.0, 0.0)
    assert system.v_minus == (0.0, 1.0)


def test_reversed_rates_swap_the_sectors():
    system = eigen(SectorParams(-0.05, 0.02, 0.01))
    assert system.lambda_plus == pytest.approx(eigen(REFERENCE).lambda_plus, abs=1e-15)
    assert system.v_plus[1] > system.v_plus[0] > 0.0


def test_equal_rates_fall_back_to_direct_decomposition():
    params = SectorParams(0.01, 0.01, 0.2)
    with pytest.raises(DegenerateRates):
        eigen_formula(params)
    system = eigen(params)
    assert system.lambda_plus == pytest.approx(0.01, abs=1e-15)
    assert system.lambda_minus == pytest.approx(0.01 - 0.2, abs=1e-15)
    assert system.v_plus[0] == pytest.approx(system.v_plus[1])


def test_rates_decrease_with_transfer():
    betas = np.linspace(0.0, 1.0, 101)
    plus = [eigen(SectorParams(0.02, -0.05, beta)).lambda_plus for beta in betas]
    minus = [eigen(SectorParams(0.02, -0.05, beta)).lambda_minus for beta in betas]
    assert all(a >= b for a, b in zip(plus, plus[1:]))
    assert all(a > b for a, b in zip(minus, minus[1:]))


def test_decomposition_reconstructs_the_state():
    system = decompose(REFERENCE, START)
    w1 = system.omega_plus * system.v_plus[0] + system.omega_minus * system.v_minus[0]
    w2 = system.omega_plus * system.v_plus[1] + system.omega_minus * system.v_minus[1]
    assert (w1, w2) == pytest.approx((0.1, 0.9), abs=1e-12)
    assert system.omega_plus ** 2 + system.omega_minus ** 2 == pytest.approx(0.1 ** 2 + 0.9 ** 2, rel=1e-12)


def test_pure_growing_mode_has_no_decaying_amplitude():
    v_plus = eigen(REFERENCE).v_plus
    system = decompose(REFERENCE, SectorState(w1=v_plus[0], w2=v_plus[1]))
    assert system.omega_minus == pytest.approx(0.0, abs=1e-15)


def test_closed_form_at_start_is_the_initial_state():
    state = closed_form(REFERENCE, START, 0.0)
    assert (state.w1, state.w2) == pytest.approx((0.1, 0.9), abs=1e-12)


def test_closed_form_without_transfer():
    state = closed_form(SectorParams(0.02, -0.05, 0.0), SectorState(w1=1.0, w2=1.0), 10.0)
    assert state.w1 == pytest.approx(math.exp(0.2), rel=1e-12)
    assert state.w2 == pytest.approx(math.exp(-0.5), rel=1e-12)
    assert state.t == 10.0


def test_integration_matches_closed_form():
    trajectory = integrate(REFERENCE, START, 50.0, dt=0.01)
    exact = closed_form_path(REFERENCE, START, trajectory.times)
    np.testing.assert_allclose(trajectory.w1, exact.w1, rtol=1e-6)
    np.testing.assert_allclose(trajectory.w2, exact.w2, rtol=1e-6)


def test_integration_matches_closed_form_random_configurations():
    rng = np.random.default_rng(5)
    for _ in range(5):
        params = SectorParams(rng.uniform(0.0, 0.05), rng.uniform(-0.1, 0.0), rng.uniform(0.0, 1.0))
        state0 = SectorState(w1=rng.uniform(0.05, 0.5), w2=rng.uniform(0.5, 1.0))
        trajectory = integrate(params, state0, 100.0, dt=0.01)
        exact = closed_form(params, state0, 100.0)
        assert trajectory.w1[-1] == pytest.approx(exact.w1, rel=1e-6)
        assert trajectory.w2[-1] == pytest.approx(exact.w2, rel=1e-6)


def test_transfer_conserves_total_activity():
    rng = np.random.default_rng(17)
    for _ in range(10_000):
        alpha1, alpha2 = rng.uniform(-0.2, 0.2, size=2)
        beta = rng.uniform(0.0, 1.0)
        w1, w2 = rng.uniform(0.0, 1.0, size=2)
        dw1, dw2 = rhs(alpha1, alpha2, beta, w1, w2)
        assert dw1 + dw2 == pytest.approx(alpha1 * w1 + alpha2 * w2, abs=1e-14)


def test_pure_diffusion_keeps_the_total():
    trajectory = integrate(SectorParams(0.0, 0.0, 0.5), SectorState(w1=0.2, w2=0.8), 20.0, dt=0.01)
    np.testing.assert_allclose(trajectory.W, 1.0, rtol=1e-12)
    assert abs(trajectory.w1[-1] - trajectory.w2[-1]) < 0.6 * 1e-3


def test_total_activity_matches_closed_form():
    state = closed_form(REFERENCE, START, 3.0)
    assert total_activity(0.02, -0.05, 0.01, 0.1, 0.9, 3.0) == pytest.approx(state.w1 + state.w2, rel=1e-12)


def test_asymptotic_inequality():
    assert asymptotic_inequality(SectorParams(0.1, 0.0, 0.01)) == pytest.approx(20.0499, rel=1e-5)
    zeta = 0.05
    assert asymptotic_inequality(SectorParams(0.1, 0.0, zeta * 0.1)) == pytest.approx(2.0 / zeta, rel=0.05)


def test_inequality_converges_to_its_limit():
    horizon = 10.0 * relaxation_time(REFERENCE)
    trajectory = integrate(REFERENCE, START, horizon, dt=0.01)
    assert trajectory.delta[-1] == pytest.approx(asymptotic_inequality(REFERENCE), rel=0.01)


def test_inequality_without_transfer_diverges():
    with pytest.raises(InequalityDivergence):
        asymptotic_inequality(SectorParams(0.02, -0.05, 0.0))
    with pytest.raises(ZeroDivisionError):
        inequality(SectorState(w1=1.0, w2=0.0))


def test_relaxation_times():
    assert relaxation_time(REFERENCE) == pytest.approx(1.0 / math.hypot(0.07, 0.01), rel=1e-9)
    assert relaxation_time(REFERENCE) == pytest.approx(14.142, rel=1e-4)
    assert relaxation_time(SectorParams(0.02, -0.05, 0.0)) == pytest.approx(14.2857, rel=1e-4)


def test_log_growth_tends_to_the_growing_rate():
    trajectory = integrate(REFERENCE, START, 300.0, dt=0.05)
    W = trajectory.W
    rate = math.log(W[-1] / W[-21]) / (trajectory.times[-1] - trajectory.times[-21])
    assert rate == pytest.approx(eigen(REFERENCE).lambda_plus, abs=1e-6)


def test_time_grid_ends_at_horizon():
    grid = time_grid(1.05, 0.1)
    assert grid[0] == 0.0
    assert grid[-1] == 1.05
    assert len(grid) == 12


def test_overflow_raises():
    with pytest.raises(NonFiniteState):
        integrate(SectorParams(1e3, 0.0, 0.0), SectorState(w1=1.0, w2=1.0), 100.0, dt=1.0)


def test_negative_initial_state_rejected():
    with pytest.raises(InadmissibleState):
        integrate(REFERENCE, SectorState(w1=-0.1, w2=1.0), 10.0)
    with pytest.raises(ValueError):
        SectorParams(0.02, -0.05, -0.1)
