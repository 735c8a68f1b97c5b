from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from episode_fitter import FitOptions, FitResult, SeriesSegment, fit_episode
from two_sector import (SectorParams, SectorState, Trajectory, closed_form_path, eigen, integrate,
                        relaxation_time, rk4_step, time_grid, total_activity)

BETA_MIN = 1e-5
BETA_MAX = 1.0
ENVELOPE_GRID_SIZE = 1000
SEARCH_TOLERANCE = 1e-8
TIE_TOLERANCE = 1e-12

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2

STATIC = 'static'
DYNAMIC = 'dynamic'
INDETERMINATE = 'indeterminate'


@dataclass(frozen=True, eq=False)
class PolicySchedule:
    """
    Transfer rate beta sampled at increasing times; beta is held constant from one
    sample to the next
    """
    times: np.ndarray
    betas: np.ndarray
    beta_min: float = BETA_MIN
    beta_max: float = BETA_MAX

    def __post_init__(self):
        object.__setattr__(self, 'times', np.asarray(self.times, dtype=float))
        object.__setattr__(self, 'betas', np.asarray(self.betas, dtype=float))
        if len(self.times) != len(self.betas) or len(self.times) == 0:
            raise ValueError('A schedule needs one beta per sample time')
        if self.beta_min <= 0.0 or self.beta_min > self.beta_max:
            raise ValueError(f'Invalid beta bounds [{self.beta_min}, {self.beta_max}]: need 0 < beta_min <= beta_max')
        if np.any(self.betas < self.beta_min) or np.any(self.betas > self.beta_max):
            raise ValueError(f'Schedule leaves the bounds [{self.beta_min}, {self.beta_max}]')

    @classmethod
    def constant(cls, beta: float, times, beta_min: float = BETA_MIN, beta_max: float = BETA_MAX) -> PolicySchedule:
        times = np.asarray(times, dtype=float)
        return cls(times=times, betas=np.full(len(times), float(beta)), beta_min=beta_min, beta_max=beta_max)

    def beta_at(self, t: float) -> float:
        index = int(np.searchsorted(self.times, t, side='right')) - 1
        return float(self.betas[min(max(index, 0), len(self.betas) - 1)])


@dataclass(frozen=True, eq=False)
class PolicyOutcome:
    name: str
    alpha1: float
    alpha2: float
    schedule: PolicySchedule
    trajectory: Trajectory
    effective_fit: FitResult = None
    lookahead: float = None
    envelope_exceeded: bool = False

    @property
    def W(self) -> np.ndarray:
        return self.trajectory.W

    @property
    def delta(self) -> np.ndarray:
        return self.trajectory.delta

    @property
    def final_params(self) -> SectorParams:
        return SectorParams(self.alpha1, self.alpha2, float(self.schedule.betas[-1]))

    def with_effective_fit(self, options: FitOptions = None) -> PolicyOutcome:
        return replace(self, effective_fit=effective_fit(self, options))

    def summary(self) -> dict:
        summary = {
            'policy': self.name,
            'beta_start': float(self.schedule.betas[0]),
            'beta_end': float(self.schedule.betas[-1]),
            'W_final': float(self.W[-1]),
            'delta_final': float(self.delta[-1]),
            'asymptotic_growth': asymptotic_growth(self),
            'classification': classify_policy(self.delta, self.trajectory.times,
                                              relaxation_time(self.final_params)),
        }
        if self.lookahead is not None:
            summary['lookahead'] = self.lookahead
        if self.name == 'envelope':
            summary['envelope_exceeded'] = self.envelope_exceeded
        return summary


def static_sweep(alpha1: float, alpha2: float, beta_grid, state0: SectorState, T: float, dt: float,
                 beta_min: float = BETA_MIN, beta_max: float = BETA_MAX) -> list[PolicyOutcome]:
    """
    One constant-beta scenario per grid value, from the closed-form solution.
    Every beta must respect the floor beta_min > 0; runs without any transfer go through
    two_sector directly.
    """
    grid = [float(beta) for beta in beta_grid]
    if not grid:
        raise ValueError('The beta grid is empty')
    times = time_grid(T, dt)
    outcomes = []
    for beta in grid:
        if not beta_min <= beta <= beta_max:
            raise ValueError(f'beta={beta} outside [{beta_min}, {beta_max}]')
        trajectory = closed_form_path(SectorParams(alpha1, alpha2, beta), state0, times)
        outcomes.append(PolicyOutcome(name='static', alpha1=alpha1, alpha2=alpha2,
                                      schedule=PolicySchedule.constant(beta, trajectory.times, beta_min, beta_max),
                                      trajectory=trajectory))
    return outcomes


def log_beta_grid(beta_min: float = BETA_MIN, beta_max: float = BETA_MAX,
                  size: int = ENVELOPE_GRID_SIZE) -> np.ndarray:
    return np.geomspace(beta_min, beta_max, size)


def envelope_policy(alpha1: float, alpha2: float, beta_grid, state0: SectorState, T: float, dt: float,
                    tolerance: float = 1e-9) -> tuple[np.ndarray, PolicySchedule, PolicyOutcome]:
    """
    Follows, at every time, the beta of the constant-beta scenario with the largest W.
    Returns the envelope, the schedule that chases it and the W actually attained.
    """
    grid = np.sort(np.asarray(beta_grid, dtype=float))
    if len(grid) == 0:
        raise ValueError('The beta grid is empty')
    times = time_grid(T, dt)
    envelope = np.full(len(times), -np.inf)
    chosen = np.empty(len(times))
    # ascending grid with a strict comparison: ties keep the smaller beta
    for beta in grid:
        total = closed_form_path(SectorParams(alpha1, alpha2, float(beta)), state0, times).W
        better = total > envelope
        envelope[better] = total[better]
        chosen[better] = beta

    schedule = PolicySchedule(times=state0.t + times, betas=chosen, beta_min=float(grid[0]), beta_max=float(grid[-1]))
    trajectory = integrate(SectorParams(alpha1, alpha2, float(grid[0])), state0, T, dt, schedule=schedule)
    exceeded = bool(np.any(trajectory.W > envelope * (1.0 + tolerance)))
    if exceeded:
        excess = float(np.max(trajectory.W / envelope - 1.0))
        logging.warning(f'Attained W exceeds the envelope by up to {excess:.3g} (relative)')
    attained = PolicyOutcome(name='envelope', alpha1=alpha1, alpha2=alpha2, schedule=schedule,
                             trajectory=trajectory, envelope_exceeded=exceeded)
    logging.info(f'Envelope policy over {len(grid)} scenarios: final W {trajectory.W[-1]:.6g} '
                 f'against envelope {envelope[-1]:.6g}')
    return envelope, schedule, attained


def golden_section_max(objective, lower: float, upper: float, tolerance: float) -> float:
    """
    Golden-section search for the maximum of a unimodal objective on [lower, upper],
    stopping once the bracket is narrower than tolerance
    """
    a, b = min(lower, upper), max(lower, upper)
    h = b - a
    if h <= tolerance:
        return (a + b) / 2.0

    # Required steps to achieve tolerance
    n = int(math.ceil(math.log(tolerance / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = objective(c)
    yd = objective(d)
    for _ in range(n - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = objective(c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = objective(d)
    return (a + d) / 2.0 if yc > yd else (c + b) / 2.0


def _best_beta(objective, beta_min: float, beta_max: float) -> float:
    """
    Interior golden-section maximum checked against both bounds; near-ties go to beta_min
    """
    best = beta_min
    best_value = objective(beta_min)
    interior = golden_section_max(objective, beta_min, beta_max, SEARCH_TOLERANCE * max(beta_max - beta_min, 1e-300))
    for candidate in (interior, beta_max):
        value = objective(candidate)
        if value - best_value > TIE_TOLERANCE * abs(best_value):
            best, best_value = candidate, value
    return best


def optimal_policy(alpha1: float, alpha2: float, beta_bounds, state0: SectorState, T: float, dt: float,
                   lookahead: float = 1.0) -> PolicyOutcome:
    """
    Greedy policy: at every step pick the beta that maximizes the closed-form W(t + lookahead)
    under that beta held constant, then advance one RK4 step with it
    """
    beta_min, beta_max = (float(b) for b in beta_bounds)
    if lookahead <= 0.0:
        raise ValueError(f'Lookahead must be positive, got {lookahead}')
    if beta_min <= 0.0 or beta_min > beta_max:
        raise ValueError(f'Invalid beta bounds [{beta_min}, {beta_max}]: need 0 < beta_min <= beta_max')

    times = time_grid(T, dt)
    w1 = np.empty(len(times))
    w2 = np.empty(len(times))
    betas = np.empty(len(times))
    w1[0], w2[0] = state0.w1, state0.w2
    for k in range(len(times) - 1):
        current1, current2 = w1[k], w2[k]

        def objective(beta):
            return total_activity(alpha1, alpha2, beta, current1, current2, lookahead)

        betas[k] = _best_beta(objective, beta_min, beta_max)
        w1[k + 1], w2[k + 1] = rk4_step(alpha1, alpha2, betas[k], current1, current2, times[k + 1] - times[k])
    betas[-1] = betas[-2] if len(times) > 1 else beta_min

    schedule = PolicySchedule(times=state0.t + times, betas=betas, beta_min=beta_min, beta_max=beta_max)
    trajectory = Trajectory(times=state0.t + times, w1=w1, w2=w2)
    logging.info(f'Optimal policy (lookahead {lookahead}): beta {betas[0]:.4g} -> {betas[-1]:.4g}, '
                 f'final W {w1[-1] + w2[-1]:.6g}')
    return PolicyOutcome(name='optimal', alpha1=alpha1, alpha2=alpha2, schedule=schedule,
                         trajectory=trajectory, lookahead=lookahead)


def classify_policy(delta, times=None, horizon: float = None) -> str:
    """
    Static or dynamic from the inequality trajectory alone.

    Under a constant beta the log-slope of delta is exactly delta_rates + beta * (1/delta - delta) / 2,
    an affine function of x = (1/delta - delta) / 2 with positive slope, which makes log delta concave.
    A trajectory that follows such a line is static; one that leaves it had a varying beta.
    This line fit stands in for reading the sign of the second differences of delta (negative
    for static, flat then positive for dynamic): those signs also depend on the starting
    inequality, the residual from the line does not.
    Only samples with t < horizon are used when times and horizon are given.
    """
    delta = np.asarray(delta, dtype=float)
    if len(delta) < 5:
        raise ValueError(f'At least 5 samples are required, got {len(delta)}')
    times = np.arange(len(delta), dtype=float) if times is None else np.asarray(times, dtype=float)
    if horizon is not None:
        count = max(int(np.sum(times < horizon)), 5)
        delta, times = delta[:count], times[:count]
    if np.any(delta <= 0.0) or not np.all(np.isfinite(delta)):
        return INDETERMINATE

    log_delta = np.log(delta)
    slope = (log_delta[2:] - log_delta[:-2]) / (times[2:] - times[:-2])
    x = (1.0 / delta[1:-1] - delta[1:-1]) / 2.0
    spread = float(np.max(slope) - np.min(slope))
    scale = float(np.max(np.abs(slope)))
    if scale == 0.0 or spread <= 1e-12 * scale or np.ptp(x) == 0.0:
        return INDETERMINATE

    design = np.column_stack([np.ones_like(x), x])
    (intercept, beta_estimate), *_ = np.linalg.lstsq(design, slope, rcond=None)
    misfit = float(np.max(np.abs(slope - design @ np.array([intercept, beta_estimate]))))
    if misfit > 1e-2 * spread:
        return DYNAMIC
    if beta_estimate * np.ptp(x) > 1e-9 * scale:
        return STATIC
    return INDETERMINATE


def _unit_samples(outcome: PolicyOutcome) -> np.ndarray:
    times = outcome.trajectory.times
    periods = np.arange(times[0], np.floor(times[-1] + 1e-9) + 1.0)
    return np.interp(periods, times, outcome.W)


def effective_fit(outcome: PolicyOutcome, options: FitOptions = None) -> FitResult:
    """
    Fits the response function to the simulated W sampled once per period
    """
    samples = _unit_samples(outcome)
    segment = SeriesSegment(values=samples, label=outcome.name, period_unit='period').normalized()
    fit = fit_episode(segment, options)
    logging.info(f'Effective fit of {outcome.name}: f={fit.params.f:.4f} lambda+={fit.params.lambda_plus:.5f} '
                 f'lambda-={fit.params.lambda_minus:.5f}')
    return fit


def asymptotic_growth(outcome: PolicyOutcome) -> float:
    """
    Mean log-growth rate of W over the final 10% of the horizon
    """
    times = outcome.trajectory.times
    start = int(np.searchsorted(times, times[0] + 0.9 * (times[-1] - times[0])))
    start = min(start, len(times) - 2)
    return float(math.log(outcome.W[-1] / outcome.W[start]) / (times[-1] - times[start]))


def asymptotic_rate(alpha1: float, alpha2: float, beta: float) -> float:
    return eigen(SectorParams(alpha1, alpha2, beta)).lambda_plus
