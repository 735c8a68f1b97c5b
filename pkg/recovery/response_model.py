from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

PARAMETER_NAMES = ('f', 'lambda_plus', 'lambda_minus', 'w0')


@dataclass(frozen=True)
class ResponseParams:
    """
    Parameters of the two-exponential recession/recovery response
    W(t) = w0 * [f * exp(lambda_plus * (t - t0)) + (1 - f) * exp(lambda_minus * (t - t0))]
    Rates are per period; t0 is a period index.
    """
    f: float
    lambda_plus: float
    lambda_minus: float
    w0: float = 100.0
    t0: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.f <= 1.0:
            raise ValueError(f'f must lie in [0, 1], got {self.f}')
        if not self.w0 > 0.0:
            raise ValueError(f'w0 must be positive, got {self.w0}')

    @property
    def growth_factors(self) -> tuple[float, float]:
        """
        Per-period growth factors (e^lambda_plus, e^lambda_minus)
        """
        return math.exp(self.lambda_plus), math.exp(self.lambda_minus)

    def as_vector(self) -> np.ndarray:
        return np.array([self.f, self.lambda_plus, self.lambda_minus, self.w0])


@dataclass(frozen=True)
class RecessionProfile:
    j_shaped: bool
    trough_time: float | None
    depth: float
    recovery_time: float | None


def evaluate(params: ResponseParams, t):
    """
    Evaluates the response function at period index t (scalar or array)
    """
    tau = np.asarray(t, dtype=float) - params.t0
    value = params.w0 * (params.f * np.exp(params.lambda_plus * tau)
                         + (1.0 - params.f) * np.exp(params.lambda_minus * tau))
    return float(value) if np.ndim(value) == 0 else value


def gradient(params: ResponseParams, t) -> np.ndarray:
    """
    Partial derivatives of evaluate with respect to (f, lambda_plus, lambda_minus, w0).
    For array t the result has shape (len(t), 4).
    """
    tau = np.asarray(t, dtype=float) - params.t0
    grow = np.exp(params.lambda_plus * tau)
    decay = np.exp(params.lambda_minus * tau)
    jacobian = np.stack([
        params.w0 * (grow - decay),
        params.w0 * params.f * tau * grow,
        params.w0 * (1.0 - params.f) * tau * decay,
        params.f * grow + (1.0 - params.f) * decay,
    ], axis=-1)
    return jacobian


def is_j_shaped(params: ResponseParams) -> bool:
    """
    True when the response starts by falling, i.e. W'(t0) < 0
    """
    return params.f * params.lambda_plus + (1.0 - params.f) * params.lambda_minus < 0.0


def canonicalize(params: ResponseParams) -> ResponseParams:
    """
    Returns the equivalent parameterization with lambda_plus >= lambda_minus
    """
    if params.lambda_plus >= params.lambda_minus:
        return params
    return replace(params, f=1.0 - params.f,
                   lambda_plus=params.lambda_minus, lambda_minus=params.lambda_plus)


def asymptotic_growth(params: ResponseParams, t: float) -> float:
    """
    Log growth over one period starting at t; tends to lambda_plus for large t
    """
    return math.log(evaluate(params, t + 1.0) / evaluate(params, t))


def recession_profile(params: ResponseParams) -> RecessionProfile:
    """
    Time and depth of the GDP minimum and the time at which the initial level is regained.
    Depth is the relative loss 1 - W(trough) / w0.
    """
    params = canonicalize(params)
    j_shaped = is_j_shaped(params)
    if not j_shaped or params.f == 0.0 or params.lambda_plus <= 0.0:
        return RecessionProfile(j_shaped=j_shaped, trough_time=None, depth=0.0, recovery_time=None)

    gap = params.lambda_plus - params.lambda_minus
    ratio = -(1.0 - params.f) * params.lambda_minus / (params.f * params.lambda_plus)
    tau_min = math.log(ratio) / gap

    def relative(tau):
        return params.f * math.exp(params.lambda_plus * tau) \
            + (1.0 - params.f) * math.exp(params.lambda_minus * tau) - 1.0

    depth = -relative(tau_min)

    upper = max(2.0 * tau_min, 1.0)
    while relative(upper) <= 0.0:
        upper *= 2.0
        if upper > 1e9:
            return RecessionProfile(j_shaped=True, trough_time=params.t0 + tau_min,
                                    depth=depth, recovery_time=None)
    tau_rec = brentq(relative, tau_min, upper, xtol=1e-12)
    return RecessionProfile(j_shaped=True, trough_time=params.t0 + tau_min,
                            depth=depth, recovery_time=params.t0 + tau_rec)
