from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from errors import DegenerateRates, InadmissibleState, InequalityDivergence, NonFiniteState

DEFAULT_DT = 0.01


@dataclass(frozen=True)
class SectorParams:
    """
    Intrinsic rates of the growing (alpha1) and shrinking (alpha2) sectors and the
    symmetric transfer rate beta, all per period
    """
    alpha1: float
    alpha2: float
    beta: float = 0.0

    def __post_init__(self):
        if self.beta < 0.0:
            raise ValueError(f'Transfer rate beta must be non-negative, got {self.beta}')

    @property
    def delta(self) -> float:
        return self.alpha1 - self.alpha2

    @property
    def sigma(self) -> float:
        return self.alpha1 + self.alpha2

    @property
    def zeta(self) -> float:
        return self.beta / self.delta


@dataclass(frozen=True)
class SectorState:
    w1: float
    w2: float
    t: float = 0.0

    @property
    def total(self) -> float:
        return self.w1 + self.w2


@dataclass(frozen=True)
class EigenSystem:
    lambda_plus: float
    lambda_minus: float
    v_plus: tuple
    v_minus: tuple
    omega_plus: float = None
    omega_minus: float = None


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    w1: np.ndarray
    w2: np.ndarray

    def __len__(self):
        return len(self.times)

    @property
    def W(self) -> np.ndarray:
        return self.w1 + self.w2

    @property
    def delta(self) -> np.ndarray:
        if np.any(self.w2 == 0.0):
            raise InequalityDivergence('Sector inequality diverges where w2 = 0')
        return self.w1 / self.w2

    def state(self, i: int) -> SectorState:
        return SectorState(w1=float(self.w1[i]), w2=float(self.w2[i]), t=float(self.times[i]))

    def table(self) -> list[dict]:
        delta = self.delta
        total = self.W
        return [{'t': float(self.times[i]), 'w1': float(self.w1[i]), 'w2': float(self.w2[i]),
                 'W': float(total[i]), 'delta': float(delta[i])} for i in range(len(self.times))]


def system_matrix(params: SectorParams) -> np.ndarray:
    half = params.beta / 2.0
    return np.array([[params.alpha1 - half, half],
                     [half, params.alpha2 - half]])


def _formula_modes(alpha1: float, alpha2: float, beta: float):
    """
    (lambda_plus, lambda_minus, v_plus, v_minus) from the closed-form expressions.
    Eigenvectors use the forms (1+s, zeta) and (-zeta, 1+s), s = sqrt(1+zeta^2),
    which stay accurate for small zeta.
    """
    delta = alpha1 - alpha2
    if delta == 0.0:
        raise DegenerateRates('alpha1 == alpha2: eigen formulas need distinct intrinsic rates')
    if delta < 0.0:
        lambda_plus, lambda_minus, (p1, p2), (m1, m2) = _formula_modes(alpha2, alpha1, beta)
        return lambda_plus, lambda_minus, (p2, p1), (m2, m1)
    if beta == 0.0:
        return alpha1, alpha2, (1.0, 0.0), (0.0, 1.0)

    zeta = beta / delta
    s = math.hypot(1.0, zeta)
    trace = alpha1 + alpha2 - beta
    root = delta * s
    determinant = alpha1 * alpha2 - beta * (alpha1 + alpha2) / 2.0
    # the root of larger magnitude is computed directly, the other from the determinant
    if trace >= 0.0:
        lambda_plus = (trace + root) / 2.0
        lambda_minus = determinant / lambda_plus
    else:
        lambda_minus = (trace - root) / 2.0
        lambda_plus = determinant / lambda_minus
    norm = math.hypot(1.0 + s, zeta)
    v_plus = ((1.0 + s) / norm, zeta / norm)
    v_minus = (-zeta / norm, (1.0 + s) / norm)
    return lambda_plus, lambda_minus, v_plus, v_minus


def _oriented(vector) -> tuple:
    x, y = float(vector[0]), float(vector[1])
    if (x if abs(x) >= abs(y) else y) < 0.0:
        x, y = -x, -y
    return x, y


def _numeric_modes(params: SectorParams):
    values, vectors = np.linalg.eigh(system_matrix(params))
    return float(values[1]), float(values[0]), _oriented(vectors[:, 1]), _oriented(vectors[:, 0])


def eigen_formula(params: SectorParams) -> EigenSystem:
    lambda_plus, lambda_minus, v_plus, v_minus = _formula_modes(params.alpha1, params.alpha2, params.beta)
    return EigenSystem(lambda_plus=lambda_plus, lambda_minus=lambda_minus, v_plus=v_plus, v_minus=v_minus)


def eigen(params: SectorParams) -> EigenSystem:
    """
    Eigenvalues and orthonormal eigenvectors of the system matrix. Equal intrinsic
    rates fall back to a direct symmetric eigendecomposition.
    """
    try:
        return eigen_formula(params)
    except DegenerateRates:
        logging.debug(f'Degenerate rates {params}, using direct eigendecomposition')
        lambda_plus, lambda_minus, v_plus, v_minus = _numeric_modes(params)
        return EigenSystem(lambda_plus=lambda_plus, lambda_minus=lambda_minus, v_plus=v_plus, v_minus=v_minus)


def _check_initial(state0: SectorState):
    if state0.w1 < 0.0 or state0.w2 < 0.0 or state0.w1 + state0.w2 <= 0.0:
        raise InadmissibleState(f'Initial state must be non-negative with positive total, got {state0}')


def decompose(params: SectorParams, state0: SectorState) -> EigenSystem:
    """
    Eigensystem with the modal amplitudes omega = w(0) . v of the initial state
    """
    _check_initial(state0)
    system = eigen(params)
    omega_plus = state0.w1 * system.v_plus[0] + state0.w2 * system.v_plus[1]
    omega_minus = state0.w1 * system.v_minus[0] + state0.w2 * system.v_minus[1]
    return replace(system, omega_plus=omega_plus, omega_minus=omega_minus)


def _modal_sum(system: EigenSystem, elapsed):
    grow = system.omega_plus * np.exp(system.lambda_plus * elapsed)
    decay = system.omega_minus * np.exp(system.lambda_minus * elapsed)
    w1 = grow * system.v_plus[0] + decay * system.v_minus[0]
    w2 = grow * system.v_plus[1] + decay * system.v_minus[1]
    return w1, w2


def _check_admissible(w1, w2):
    scale = np.abs(w1) + np.abs(w2)
    if np.any(w1 < -1e-9 * scale) or np.any(w2 < -1e-9 * scale):
        raise InadmissibleState('Closed-form solution has a negative sector')


def closed_form(params: SectorParams, state0: SectorState, t: float) -> SectorState:
    """
    Modal solution a time t after state0
    """
    w1, w2 = _modal_sum(decompose(params, state0), t)
    _check_admissible(w1, w2)
    return SectorState(w1=float(w1), w2=float(w2), t=state0.t + t)


def closed_form_path(params: SectorParams, state0: SectorState, times) -> Trajectory:
    """
    Modal solution sampled at times measured from state0
    """
    times = np.asarray(times, dtype=float)
    w1, w2 = _modal_sum(decompose(params, state0), times)
    _check_admissible(w1, w2)
    return Trajectory(times=state0.t + times, w1=w1, w2=w2)


def total_activity(alpha1: float, alpha2: float, beta: float, w1: float, w2: float, t: float) -> float:
    """
    W(t) = w1(t) + w2(t) under constant beta from (w1, w2); scalar fast path of closed_form
    """
    try:
        lambda_plus, lambda_minus, v_plus, v_minus = _formula_modes(alpha1, alpha2, beta)
    except DegenerateRates:
        lambda_plus, lambda_minus, v_plus, v_minus = _numeric_modes(SectorParams(alpha1, alpha2, beta))
    omega_plus = w1 * v_plus[0] + w2 * v_plus[1]
    omega_minus = w1 * v_minus[0] + w2 * v_minus[1]
    return omega_plus * (v_plus[0] + v_plus[1]) * math.exp(lambda_plus * t) \
        + omega_minus * (v_minus[0] + v_minus[1]) * math.exp(lambda_minus * t)


def rhs(alpha1: float, alpha2: float, beta: float, w1: float, w2: float) -> tuple[float, float]:
    """
    dw1/dt = alpha1 w1 + beta (<w> - w1), dw2/dt = alpha2 w2 + beta (<w> - w2)
    """
    transfer = beta * (w2 - w1) / 2.0
    return alpha1 * w1 + transfer, alpha2 * w2 - transfer


def rk4_step(alpha1: float, alpha2: float, beta: float, w1: float, w2: float, h: float) -> tuple[float, float]:
    k1 = rhs(alpha1, alpha2, beta, w1, w2)
    k2 = rhs(alpha1, alpha2, beta, w1 + h * k1[0] / 2.0, w2 + h * k1[1] / 2.0)
    k3 = rhs(alpha1, alpha2, beta, w1 + h * k2[0] / 2.0, w2 + h * k2[1] / 2.0)
    k4 = rhs(alpha1, alpha2, beta, w1 + h * k3[0], w2 + h * k3[1])
    return (w1 + h * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0,
            w2 + h * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0)


def time_grid(horizon: float, dt: float) -> np.ndarray:
    """
    0, dt, 2 dt, ... with the last sample at exactly horizon
    """
    if dt <= 0.0:
        raise ValueError(f'Step dt must be positive, got {dt}')
    if horizon < dt:
        raise ValueError(f'Horizon {horizon} is shorter than the step {dt}')
    steps = int(math.ceil(horizon / dt - 1e-9))
    return np.minimum(np.arange(steps + 1) * dt, horizon)


def _beta_function(params: SectorParams, schedule):
    if schedule is None:
        return lambda t: params.beta
    if isinstance(schedule, (int, float)):
        return lambda t: float(schedule)
    return schedule.beta_at


def integrate(params: SectorParams, state0: SectorState, horizon: float, dt: float = DEFAULT_DT,
              schedule=None) -> Trajectory:
    """
    Classic RK4 integration of the coupled sectors. beta comes from schedule (a constant or
    anything with beta_at(t)) or from params, and is held at its value at the start of each step.
    """
    _check_initial(state0)
    grid = time_grid(horizon, dt)
    beta_at = _beta_function(params, schedule)
    w1 = np.empty(len(grid))
    w2 = np.empty(len(grid))
    w1[0], w2[0] = state0.w1, state0.w2
    for k in range(len(grid) - 1):
        h = grid[k + 1] - grid[k]
        w1[k + 1], w2[k + 1] = rk4_step(params.alpha1, params.alpha2, beta_at(state0.t + grid[k]), w1[k], w2[k], h)
        if not (math.isfinite(w1[k + 1]) and math.isfinite(w2[k + 1])):
            raise NonFiniteState(f'Non-finite state at t={grid[k + 1]}')
    return Trajectory(times=state0.t + grid, w1=w1, w2=w2)


def inequality(state: SectorState) -> float:
    if state.w2 == 0.0:
        raise InequalityDivergence('Sector inequality diverges for w2 = 0')
    return state.w1 / state.w2


def asymptotic_inequality(params: SectorParams) -> float:
    """
    Long-run w1/w2, the component ratio of the growing eigenvector: (1+s)/zeta for delta > 0
    """
    if params.beta == 0.0:
        raise InequalityDivergence('Asymptotic inequality diverges without transfer (beta = 0)')
    v_plus = eigen(params).v_plus
    if v_plus[1] == 0.0:
        raise InequalityDivergence('Growing mode has no second-sector component')
    return v_plus[0] / v_plus[1]


def relaxation_time(params: SectorParams) -> float:
    system = eigen(params)
    rate = system.lambda_plus + abs(system.lambda_minus)
    return math.inf if rate == 0.0 else 1.0 / rate
