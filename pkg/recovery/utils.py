from __future__ import annotations

import os

from errors import UsageError


def env_bool(name: str, default: bool = False) -> bool:
    """
    Reads a true/false environment variable
    """
    return os.environ.get(name, str(default)).lower() == 'true'


def parse_range(text: str) -> list[float]:
    """
    Parses lo:hi:step into the inclusive list lo, lo + step, ..., hi
    """
    try:
        lo, hi, step = (float(part) for part in text.split(':'))
    except ValueError:
        raise UsageError(f'Expected lo:hi:step, got {text!r}') from None
    if step <= 0.0 or hi < lo:
        raise UsageError(f'Invalid range {text!r}: need step > 0 and hi >= lo')
    count = int((hi - lo) / step + 1e-9) + 1
    # rounding removes the drift of repeated float additions
    return [round(lo + k * step, 12) for k in range(count)]


def parse_float_list(text: str) -> list[float]:
    """
    Parses a comma separated list of numbers
    """
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise UsageError(f'Expected a comma separated list of numbers, got {text!r}') from None


def sample_stride(dt: float, every: float) -> int:
    """
    Number of integration steps between two emitted rows
    """
    return max(1, int(round(every / dt)))


def strided(rows: list, stride: int) -> list:
    """
    Every stride-th row, always keeping the last one
    """
    picked = rows[::stride]
    if rows and (len(rows) - 1) % stride:
        picked.append(rows[-1])
    return picked
