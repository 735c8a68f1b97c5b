from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from errors import DegenerateSegment, NonConvergence
from response_model import PARAMETER_NAMES, ResponseParams, canonicalize, evaluate, gradient

MIN_OBSERVATIONS = 4
BOUND_TOLERANCE = 1e-9

# (lower, upper) per parameter, in PARAMETER_NAMES order
PARAMETER_BOUNDS = (
    (0.0, 1.0),
    (-1.0, 1.0),
    (-1.0, 0.0),
    (1e-12, np.inf),
)


@dataclass(frozen=True, eq=False)
class SeriesSegment:
    """
    An ordered run of GDP observations on a common scale.
    Values are indexed locally from 0; start_index places the first value on the
    absolute period axis. periods holds the display label of every observation.
    """
    values: np.ndarray
    start_index: int = 0
    period_unit: str = 'year'
    label: str = ''
    periods: tuple = None
    raw: np.ndarray = None
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'values', np.asarray(self.values, dtype=float))
        if self.periods is None:
            labels = tuple(str(self.start_index + i) for i in range(len(self.values)))
            object.__setattr__(self, 'periods', labels)
        if self.raw is not None:
            object.__setattr__(self, 'raw', np.asarray(self.raw, dtype=float))

    def __len__(self):
        return len(self.values)

    @property
    def first_period(self) -> str:
        return self.periods[0] if self.periods else ''

    @property
    def last_period(self) -> str:
        return self.periods[-1] if self.periods else ''

    def slice(self, start: int, stop: int) -> SeriesSegment:
        """
        Sub-segment of local indices [start, stop), keeping absolute positions
        """
        return replace(
            self,
            values=self.values[start:stop],
            start_index=self.start_index + start,
            periods=self.periods[start:stop],
            raw=None if self.raw is None else self.raw[start:stop],
        )

    def normalized(self) -> SeriesSegment:
        """
        Rescaled copy whose first value is 100
        """
        factor = 100.0 / self.values[0]
        return replace(self, values=self.values * factor, scale=self.scale / factor)


@dataclass(frozen=True)
class FitOptions:
    free_w0: bool = False
    max_iterations: int = 500
    gradient_tolerance: float = 1e-10
    seed: int = 0


@dataclass(frozen=True)
class FitResult:
    params: ResponseParams
    std_errors: dict
    srs: float
    srm: float
    rsrs: float
    rsrm: float
    n: int
    converged: bool
    boundary_hit: frozenset = field(default_factory=frozenset)
    start_index: int = 0
    label: str = ''
    period_unit: str = 'year'
    first_period: str = ''
    last_period: str = ''

    @property
    def degenerate(self) -> bool:
        """
        True when one of the two components has (numerically) zero weight
        """
        return self.params.f <= BOUND_TOLERANCE or self.params.f >= 1.0 - BOUND_TOLERANCE

    def row(self) -> dict:
        """
        Table row: the growth-factor columns first, then rates and uncertainties
        """
        growth_plus, growth_minus = self.params.growth_factors
        return {
            'first': self.first_period,
            'last': self.last_period,
            'f': self.params.f,
            'exp_lambda_plus': growth_plus,
            'exp_lambda_minus': growth_minus,
            'srs': self.srs,
            'srm': self.srm,
            'rsrs': self.rsrs,
            'rsrm': self.rsrm,
            'n': self.n,
            'lambda_plus': self.params.lambda_plus,
            'lambda_minus': self.params.lambda_minus,
            'f_err': self.std_errors['f'],
            'lambda_plus_err': self.std_errors['lambda_plus'],
            'lambda_minus_err': self.std_errors['lambda_minus'],
            'w0': self.params.w0,
            'converged': self.converged,
            'boundary': ','.join(sorted(self.boundary_hit)) or '-',
        }


def residual_stats(segment: SeriesSegment, params: ResponseParams) -> tuple[float, float, float, float]:
    """
    Returns (srs, srm, rsrs, rsrm); relative residuals are in percent of the model value
    """
    data = segment.values
    model = np.asarray(evaluate(params, np.arange(len(data), dtype=float)))
    residuals = data - model
    srs = float(np.sum(residuals ** 2))
    rsrs = float(np.sum((100.0 * residuals / model) ** 2))
    n = len(data)
    return srs, srs / n, rsrs, rsrs / n


def initial_guess(values: np.ndarray) -> ResponseParams:
    """
    Heuristic start: lambda_minus from the opening slope, lambda_plus from the closing
    slope, f so that the curve passes through the last observation
    """
    n = len(values)
    lambda_minus = math.log(values[1] / values[0])
    if lambda_minus >= 0.0:
        lambda_minus = -0.05
    lambda_minus = min(max(lambda_minus, -0.99), -1e-4)

    window = max(n // 4, 1)
    lambda_plus = math.log(values[-1] / values[-1 - window]) / window
    lambda_plus = min(max(lambda_plus, -0.99), 0.99)
    if lambda_plus <= lambda_minus:
        lambda_plus = lambda_minus + 0.01

    horizon = n - 1
    ratio = values[-1] / values[0]
    grow, decay = math.exp(lambda_plus * horizon), math.exp(lambda_minus * horizon)
    f = (ratio - decay) / (grow - decay) if grow != decay else 0.5
    f = min(max(f, 0.01), 0.99)
    return ResponseParams(f=f, lambda_plus=lambda_plus, lambda_minus=lambda_minus, w0=float(values[0]))


def _check_segment(segment: SeriesSegment):
    if len(segment) < MIN_OBSERVATIONS:
        raise DegenerateSegment(f'Segment {segment.label!r} has {len(segment)} observations, '
                                f'at least {MIN_OBSERVATIONS} are required')
    if not np.all(np.isfinite(segment.values)) or np.any(segment.values <= 0.0):
        raise DegenerateSegment(f'Segment {segment.label!r} contains non-positive or non-finite values')


def _interior(vector: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    margin = 1e-6
    return np.clip(vector, lower + margin, np.where(np.isinf(upper), upper, upper - margin))


def _fit_from(segment: SeriesSegment, options: FitOptions, start: ResponseParams) -> FitResult:
    data = segment.values
    times = np.arange(len(data), dtype=float)
    w0_fixed = float(data[0])
    n_free = 4 if options.free_w0 else 3
    names = PARAMETER_NAMES[:n_free]
    lower = np.array([b[0] for b in PARAMETER_BOUNDS[:n_free]])
    upper = np.array([b[1] for b in PARAMETER_BOUNDS[:n_free]])

    def to_params(x):
        w0 = x[3] if options.free_w0 else w0_fixed
        return ResponseParams(f=min(max(float(x[0]), 0.0), 1.0), lambda_plus=float(x[1]), lambda_minus=float(x[2]), w0=float(w0))

    def residuals(x):
        return evaluate(to_params(x), times) - data

    def jacobian(x):
        return gradient(to_params(x), times)[:, :n_free]

    x0 = start.as_vector()[:n_free]
    if options.free_w0:
        x0[3] = start.w0
    x0 = _interior(x0, lower, upper)

    result = least_squares(residuals, x0, jac=jacobian, bounds=(lower, upper), method='trf',
                           x_scale='jac', gtol=options.gradient_tolerance, ftol=1e-15, xtol=1e-15,
                           max_nfev=options.max_iterations)
    if result.status == 0:
        raise NonConvergence(f'No convergence within {options.max_iterations} evaluations '
                             f'for segment {segment.label!r}')

    raw_params = to_params(result.x)
    params = canonicalize(raw_params)
    swapped = params is not raw_params

    srs, srm, rsrs, rsrm = residual_stats(segment, params)
    dof = max(len(data) - n_free, 1)
    covariance = (srs / dof) * np.linalg.pinv(result.jac.T @ result.jac)
    errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    std_errors = {name: float(errors[i]) for i, name in enumerate(names)}
    std_errors.setdefault('w0', 0.0)

    hit = {name for i, name in enumerate(names)
           if abs(result.x[i] - lower[i]) <= BOUND_TOLERANCE or abs(result.x[i] - upper[i]) <= BOUND_TOLERANCE}
    if swapped:
        rename = {'lambda_plus': 'lambda_minus', 'lambda_minus': 'lambda_plus'}
        hit = {rename.get(name, name) for name in hit}
        std_errors['lambda_plus'], std_errors['lambda_minus'] = std_errors['lambda_minus'], std_errors['lambda_plus']

    return FitResult(
        params=params, std_errors=std_errors, srs=srs, srm=srm, rsrs=rsrs, rsrm=rsrm, n=len(data),
        converged=result.status > 0, boundary_hit=frozenset(hit), start_index=segment.start_index,
        label=segment.label, period_unit=segment.period_unit,
        first_period=segment.first_period, last_period=segment.last_period,
    )


def fit_episode(segment: SeriesSegment, options: FitOptions = None) -> FitResult:
    """
    Bounded least-squares fit of the response function to one episode.
    w0 is pinned to the first observation unless options.free_w0 is set.
    """
    options = options or FitOptions()
    _check_segment(segment)
    fit = _fit_from(segment, options, initial_guess(segment.values))
    logging.debug(f'Fitted {segment.label or "segment"} ({fit.n} points): f={fit.params.f:.4f} '
                  f'lambda+={fit.params.lambda_plus:.5f} lambda-={fit.params.lambda_minus:.5f} srs={fit.srs:.6g}')
    return fit


def fit_with_restarts(segment: SeriesSegment, k: int, options: FitOptions = None) -> FitResult:
    """
    Best (lowest srs) of k fits. The first start is the heuristic one, the others are
    seeded perturbations of it.
    """
    if k < 1:
        raise ValueError(f'k must be at least 1, got {k}')
    options = options or FitOptions()
    _check_segment(segment)

    base = initial_guess(segment.values)
    rng = np.random.default_rng(options.seed)
    starts = [base]
    for _ in range(k - 1):
        f = float(np.clip(base.f + rng.normal(0.0, 0.2), 0.01, 0.99))
        lambda_minus = float(np.clip(base.lambda_minus * rng.lognormal(0.0, 0.5), -0.99, -1e-4))
        spread = 0.5 * max(abs(base.lambda_plus), 0.01)
        lambda_plus = float(np.clip(base.lambda_plus + rng.normal(0.0, spread), -0.99, 0.99))
        starts.append(replace(base, f=f, lambda_plus=lambda_plus, lambda_minus=lambda_minus))

    best, failure = None, None
    for start in starts:
        try:
            fit = _fit_from(segment, options, start)
        except NonConvergence as e:
            failure = e
            continue
        if best is None or fit.srs < best.srs:
            best = fit
    if best is None:
        raise failure
    return best
