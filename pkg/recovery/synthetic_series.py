from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from episode_fitter import SeriesSegment
from response_model import ResponseParams, evaluate

# 1 + nu * eta is redrawn until it exceeds this floor
NOISE_FLOOR = 0.01


@dataclass(frozen=True)
class NoiseSpec:
    nu: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.nu < 0.0:
            raise ValueError(f'Noise strength must be non-negative, got {self.nu}')


def _noise_factors(noise: NoiseSpec, n: int) -> np.ndarray:
    rng = np.random.default_rng(noise.seed)
    eta = rng.standard_normal(n)
    factors = 1.0 + noise.nu * eta
    bad = factors <= NOISE_FLOOR
    while np.any(bad):
        eta[bad] = rng.standard_normal(int(bad.sum()))
        factors = 1.0 + noise.nu * eta
        bad = factors <= NOISE_FLOOR
    return factors


def generate(params: ResponseParams, noise: NoiseSpec, n: int, label: str = 'synthetic',
             period_unit: str = 'quarter') -> SeriesSegment:
    """
    G(t) = W(t) * (1 + nu * eta(t)) for t = 0..n-1 with eta i.i.d. standard normal
    """
    if n < 1:
        raise ValueError(f'Series length must be at least 1, got {n}')
    curve = np.asarray(evaluate(params, np.arange(n, dtype=float)), dtype=float)
    values = curve if noise.nu == 0.0 else curve * _noise_factors(noise, n)
    return SeriesSegment(values=values, label=label, period_unit=period_unit)


def generate_piecewise(episodes: list[tuple[ResponseParams, int]], noise: NoiseSpec,
                       label: str = 'synthetic', period_unit: str = 'quarter') -> SeriesSegment:
    """
    Concatenates episodes, each starting from the noiseless level reached by the previous one.
    A new episode resets the component weights and rates (a trend break); an episode whose
    (f, lambda_plus, lambda_minus) equal the previous one's simply continues it.
    """
    if not episodes:
        raise ValueError('At least one episode is required')

    pieces = []
    current, elapsed = None, 0
    for params, length in episodes:
        if length < 1:
            raise ValueError(f'Episode length must be at least 1, got {length}')
        if current is None:
            current, elapsed = params, 0
        elif (params.f, params.lambda_plus, params.lambda_minus) != \
                (current.f, current.lambda_plus, current.lambda_minus):
            level = evaluate(current, elapsed)
            current, elapsed = replace(params, w0=level, t0=0.0), 0
        times = elapsed + np.arange(length, dtype=float)
        pieces.append(np.asarray(evaluate(current, times), dtype=float))
        elapsed += length

    curve = np.concatenate(pieces)
    values = curve if noise.nu == 0.0 else curve * _noise_factors(noise, len(curve))
    logging.debug(f'Generated {len(values)} points from {len(episodes)} episodes (nu={noise.nu}, seed={noise.seed})')
    return SeriesSegment(values=values, label=label, period_unit=period_unit)


def episode_starts(episodes: list[tuple[ResponseParams, int]]) -> list[int]:
    """
    Indices at which generate_piecewise injects a trend break
    """
    starts, position, previous = [], 0, None
    for params, length in episodes:
        key = (params.f, params.lambda_plus, params.lambda_minus)
        if previous is not None and key != previous:
            starts.append(position)
        previous = key
        position += length
    return starts
