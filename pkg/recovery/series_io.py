from __future__ import annotations

import io
import logging
import math
import pathlib
import re
from dataclasses import dataclass

import numpy as np
import pandas as pd

from episode_fitter import SeriesSegment
from errors import DataError, GapError, NonPositiveValue, ParseError

QUARTER_LABEL = re.compile(r'^(\d{4})-?[Qq]([1-4])$')


@dataclass(frozen=True)
class SeriesFile:
    path: str
    period_column: str = 'period'
    value_column: str = 'value'
    period_unit: str = None
    label: str = None
    format: str = 'csv'


def _parse_period(text: str, row: int, column: str) -> tuple[int, bool]:
    """
    Returns (absolute period index, is_quarter_label). 1990Q2 maps to 1990 * 4 + 1.
    """
    text = text.strip()
    match = QUARTER_LABEL.match(text)
    if match:
        return int(match.group(1)) * 4 + int(match.group(2)) - 1, True
    try:
        return int(text), False
    except ValueError:
        raise ParseError(f'Cannot parse period {text!r}', row=row, column=column) from None


def period_label(index: int, period_unit: str, quarter_labels: bool) -> str:
    if period_unit == 'quarter' and quarter_labels:
        return f'{index // 4}Q{index % 4 + 1}'
    return str(index)


def _read_frame(source: SeriesFile) -> pd.DataFrame:
    if source.format != 'csv':
        raise DataError(f'Unsupported series format {source.format!r}')
    try:
        return pd.read_csv(source.path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError:
        raise DataError(f'Series file {source.path} not found') from None
    except pd.errors.EmptyDataError:
        raise ParseError(f'Series file {source.path} is empty') from None
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ParseError(f'Cannot read {source.path}: {str(e)}') from None


def ingest(source: SeriesFile) -> SeriesSegment:
    """
    Reads a period/value CSV into a segment normalized to 100 at its first period.
    The raw values stay on the segment so the series can be written back unchanged.
    """
    frame = _read_frame(source)
    for column in (source.period_column, source.value_column):
        if column not in frame.columns:
            raise ParseError(f'Missing column {column!r} in {source.path}', column=column)
    if len(frame) == 0:
        raise ParseError(f'Series file {source.path} has no rows')

    indices, raw = [], []
    quarter_labels = set()
    for row, (period_text, value_text) in enumerate(zip(frame[source.period_column], frame[source.value_column]),
                                                    start=1):
        index, is_quarter = _parse_period(period_text, row, source.period_column)
        quarter_labels.add(is_quarter)
        try:
            value = float(value_text)
        except ValueError:
            raise ParseError(f'Cannot parse value {value_text!r}', row=row, column=source.value_column) from None
        if not math.isfinite(value):
            raise ParseError(f'Non-finite value {value_text!r}', row=row, column=source.value_column)
        if value <= 0.0:
            raise NonPositiveValue(f'Non-positive value {value_text} for period {period_text.strip()} (row {row})')
        indices.append(index)
        raw.append(value)

    if len(quarter_labels) > 1:
        raise ParseError('Mixed period formats', column=source.period_column)
    labelled_quarters = quarter_labels == {True}
    period_unit = source.period_unit or ('quarter' if labelled_quarters else 'year')

    for previous, current in zip(indices, indices[1:]):
        if current <= previous:
            raise ParseError(f'Periods are not strictly increasing at {period_label(current, period_unit, labelled_quarters)}',
                             column=source.period_column)
        if current > previous + 1:
            raise GapError(period_label(previous + 1, period_unit, labelled_quarters))

    raw = np.array(raw, dtype=float)
    values = raw * 100.0 / raw[0]
    label = source.label or pathlib.Path(source.path).stem
    periods = tuple(period_label(index, period_unit, labelled_quarters) for index in indices)
    logging.info(f'Read {len(values)} {period_unit}s of {label} ({periods[0]} to {periods[-1]})')
    return SeriesSegment(values=values, start_index=indices[0], period_unit=period_unit, label=label,
                         periods=periods, raw=raw, scale=raw[0] / 100.0)


def locate(segment: SeriesSegment, period: str) -> int:
    """
    Local index of a period label such as 1995 or 1995Q3
    """
    wanted = period.strip()
    match = QUARTER_LABEL.match(wanted)
    if match:
        wanted = f'{match.group(1)}Q{match.group(2)}'
    try:
        return segment.periods.index(wanted)
    except ValueError:
        raise DataError(f'Period {period} is not part of {segment.label or "the series"}') from None


def write_series(segment: SeriesSegment, period_column: str = 'period', value_column: str = 'value') -> str:
    """
    CSV text of the segment; raw values when available, written with round-trip precision
    """
    values = segment.raw if segment.raw is not None else segment.values
    buffer = io.StringIO()
    buffer.write(f'{period_column},{value_column}\n')
    for period, value in zip(segment.periods, values):
        buffer.write(f'{period},{float(value)!r}\n')
    return buffer.getvalue()
