from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from episode_fitter import MIN_OBSERVATIONS, FitOptions, FitResult, SeriesSegment, fit_episode, fit_with_restarts
from errors import FitFailed, NonConvergence
from response_model import evaluate

# t_pred values this close to a plateau's first value belong to the same plateau
PLATEAU_WIDTH = 1


@dataclass(frozen=True)
class ScanOptions:
    restarts: int = 5
    retries: int = 3
    workers: int = 1
    t0_start: int = 6
    fit: FitOptions = field(default_factory=FitOptions)


@dataclass(frozen=True)
class HorizonPoint:
    t0: int
    t_pred: int
    in_sample_rms: float


@dataclass(frozen=True)
class HorizonCurve:
    """
    Horizon samples of one scan. t0 and t_pred count from start, the first index of the
    scanned part of the series; series_length is the length of that part.
    """
    tolerance_p: float
    points: tuple
    series_length: int
    skipped: tuple = ()
    start: int = 0

    def table(self) -> list[dict]:
        return [{'t0': point.t0, 't_pred': point.t_pred} for point in self.points]


@dataclass(frozen=True)
class ShockReport:
    shocks: tuple
    tolerance_p: float
    episodes: tuple
    curves: tuple = ()

    @property
    def times(self) -> list[int]:
        return [time for time, _ in self.shocks]


@dataclass(frozen=True)
class EpisodeFit:
    start: int
    end: int
    fit: FitResult = None
    error: str = None


@dataclass(frozen=True)
class HorizonScan:
    """
    In-sample fits for every t0 of a scan, reduced to the relative deviation of their
    out-of-sample predictions. Fits do not depend on p, so one scan serves any tolerance.
    """
    series_length: int
    entries: tuple
    skipped: tuple = ()
    start: int = 0

    def curve(self, p: float) -> HorizonCurve:
        _check_tolerance(p)
        points = tuple(HorizonPoint(t0=t0, t_pred=_first_break(deviation, t0, p, self.series_length),
                                    in_sample_rms=rms)
                       for t0, rms, deviation in self.entries)
        return HorizonCurve(tolerance_p=p, points=points, series_length=self.series_length,
                            skipped=self.skipped, start=self.start)


def _check_tolerance(p: float):
    if not 0.0 < p < 1.0:
        raise ValueError(f'Tolerance p must lie in (0, 1), got {p}')


def _check_min_support(min_support: int):
    if min_support < 2:
        raise ValueError(f'min_support must be at least 2, got {min_support}')


def _first_break(deviation: np.ndarray, t0: int, p: float, series_length: int) -> int:
    exceeded = np.nonzero(deviation > p)[0]
    return t0 + int(exceeded[0]) if len(exceeded) else series_length


def _in_sample_fit(series: SeriesSegment, t0: int, options: ScanOptions) -> FitResult:
    """
    Multistart fit on [0, t0), retried with a fresh seed when no start converges
    """
    in_sample = series.slice(0, t0)
    for attempt in Retrying(stop=stop_after_attempt(options.retries),
                            retry=retry_if_exception_type(NonConvergence), reraise=True):
        with attempt:
            seed = options.fit.seed + attempt.retry_state.attempt_number - 1
            fit = fit_with_restarts(in_sample, options.restarts, replace(options.fit, seed=seed))
    return fit


def _deviation(series: SeriesSegment, t0: int, options: ScanOptions) -> tuple[float, np.ndarray]:
    fit = _in_sample_fit(series, t0, options)
    data = series.values[t0:]
    prediction = np.asarray(evaluate(fit.params, np.arange(t0, len(series), dtype=float)))
    return math.sqrt(fit.rsrm) / 100.0, np.abs(data - prediction) / data


def _check_t0(series: SeriesSegment, t0: int):
    if not MIN_OBSERVATIONS <= t0 <= len(series):
        raise ValueError(f'In-sample size t0 must lie in [{MIN_OBSERVATIONS}, {len(series)}], got {t0}')


def _t0_values(series: SeriesSegment, t0_range, options: ScanOptions) -> list[int]:
    n = len(series)
    t0_values = list(t0_range) if t0_range is not None else list(range(max(options.t0_start, MIN_OBSERVATIONS), n))
    for t0 in t0_values:
        _check_t0(series, t0)
    return t0_values


def prediction_horizon(series: SeriesSegment, t0: int, p: float, options: ScanOptions = None) -> int:
    """
    First index t >= t0 where the fit on [0, t0) misses the data by more than the
    relative tolerance p, or the series length when it never does
    """
    options = options or ScanOptions()
    _check_t0(series, t0)
    _check_tolerance(p)
    _, deviation = _deviation(series, t0, options)
    return _first_break(deviation, t0, p, len(series))


class HorizonScanner:
    """
    Runs in-sample fits on demand and keeps them by (start, t0), start being the index
    where the scanned part of the series begins. Fits that keep failing are cached as
    their error message.
    """

    def __init__(self, series: SeriesSegment, options: ScanOptions = None):
        self.series = series
        self.options = options or ScanOptions()
        self.__fits = {}

    def remaining(self, start: int) -> SeriesSegment:
        return self.series if start == 0 else self.series.slice(start, len(self.series))

    def entries(self, start: int, t0_values) -> list[tuple]:
        """
        (t0, (in-sample rms, relative deviation) or error message) for every t0, in order.
        Missing fits run on the thread pool when more than one worker is configured.
        """
        t0_values = list(t0_values)
        missing = [t0 for t0 in t0_values if (start, t0) not in self.__fits]
        if missing:
            segment = self.remaining(start)

            def scan_one(t0):
                try:
                    return _deviation(segment, t0, self.options)
                except FitFailed as e:
                    return str(e)

            if self.options.workers > 1 and len(missing) > 1:
                with ThreadPoolExecutor(max_workers=self.options.workers) as executor:
                    results = list(executor.map(scan_one, missing))
            else:
                results = [scan_one(t0) for t0 in missing]
            for t0, result in zip(missing, results):
                if isinstance(result, str):
                    logging.warning(f'Skipping t0={t0} of the scan from {start}: {result}')
                self.__fits[(start, t0)] = result
        return [(t0, self.__fits[(start, t0)]) for t0 in t0_values]

    def scan(self, start: int = 0, t0_values=None) -> HorizonScan:
        segment = self.remaining(start)
        if t0_values is None:
            t0_values = range(max(self.options.t0_start, MIN_OBSERVATIONS), len(segment))
        entries, skipped = [], []
        for t0, result in self.entries(start, t0_values):
            if isinstance(result, str):
                skipped.append((t0, result))
            else:
                entries.append((t0, *result))
        logging.debug(f'Horizon scan of {self.series.label or "series"} from {start}: '
                      f'{len(entries)} fits, {len(skipped)} skipped')
        return HorizonScan(series_length=len(segment), entries=tuple(entries), skipped=tuple(skipped), start=start)


def scan_horizons(series: SeriesSegment, t0_range=None, options: ScanOptions = None) -> HorizonScan:
    """
    Runs the in-sample fits of a horizon scan. t0 values whose fit keeps failing are
    skipped and recorded.
    """
    options = options or ScanOptions()
    return HorizonScanner(series, options).scan(0, _t0_values(series, t0_range, options))


def horizon_curve(series: SeriesSegment, p: float, t0_range=None, options: ScanOptions = None) -> HorizonCurve:
    _check_tolerance(p)
    return scan_horizons(series, t0_range, options).curve(p)


def _plateau_runs(curve: HorizonCurve, min_support: int) -> list[tuple[int, int, int]]:
    runs, run = [], []
    previous_t0 = None

    def close(run):
        if len(run) >= min_support:
            runs.append((int(np.round(np.median([t_pred for _, t_pred in run]))), len(run), run[-1][0]))

    for point in curve.points:
        eligible = (point.t0 < point.t_pred < curve.series_length
                    and point.in_sample_rms <= curve.tolerance_p)
        contiguous = previous_t0 is not None and point.t0 == previous_t0 + 1
        previous_t0 = point.t0
        if eligible and contiguous and run and abs(point.t_pred - run[0][1]) <= PLATEAU_WIDTH:
            run.append((point.t0, point.t_pred))
            continue
        close(run)
        run = [(point.t0, point.t_pred)] if eligible else []
    close(run)
    return runs


def find_plateaus(curve: HorizonCurve, min_support: int) -> list[tuple[int, int]]:
    """
    Runs of consecutive t0 values whose t_pred stays within PLATEAU_WIDTH of the run's
    first value. Points that predict nothing (t_pred == t0), never break
    (t_pred == series_length) or whose own fit misses by more than p do not count.
    Returns (median t_pred, support) for every run of at least min_support points.
    """
    return [(value, support) for value, support, _ in _plateau_runs(curve, min_support)]


def _candidates(curve: HorizonCurve, min_support: int) -> list[tuple[int, int, int]]:
    """
    Plateaus as (value, support, last t0), neighbours within PLATEAU_WIDTH merged and
    plateaus that do not lie after the previous one dropped
    """
    candidates = []
    for value, support, last_t0 in _plateau_runs(curve, min_support):
        if candidates and abs(value - candidates[-1][0]) <= PLATEAU_WIDTH:
            candidates[-1] = (candidates[-1][0], candidates[-1][1] + support, last_t0)
        elif (not candidates or value > candidates[-1][0]) and 0 < value < curve.series_length:
            candidates.append((value, support, last_t0))
        else:
            logging.debug(f'Dropping plateau at {value}: not after the previous one')
    return candidates


def _collapsed(point: HorizonPoint, p: float) -> bool:
    return point.t_pred == point.t0 or point.in_sample_rms > p


def _followers(curve: HorizonCurve, value: int, min_support: int) -> list[HorizonPoint]:
    """
    The first min_support points whose in-sample window holds at least two periods past value
    """
    return [point for point in curve.points if point.t0 >= value + 1 + PLATEAU_WIDTH][:min_support]


def is_confirmed(curve: HorizonCurve, value: int, min_support: int) -> bool:
    """
    A plateau at value marks a shock when the next min_support fits that see past it
    all collapse: each either misses its first out-of-sample period or its own window
    by more than p. Transient plateaus of short windows are followed by longer horizons.
    """
    followers = _followers(curve, value, min_support)
    return len(followers) == min_support and all(_collapsed(point, curve.tolerance_p) for point in followers)


def _episodes(shock_times: list[int], start: int, stop: int) -> tuple:
    bounds = [start] + list(shock_times) + [stop]
    return tuple((bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1))


def shocks_from_curve(curve: HorizonCurve, min_support: int = 3, confirm: bool = True) -> ShockReport:
    """
    Shocks at the plateaus of one horizon curve. With confirm set, only plateaus followed
    by a collapse count.
    """
    _check_min_support(min_support)
    shocks = []
    for value, support, _ in _candidates(curve, min_support):
        if confirm and not is_confirmed(curve, value, min_support):
            logging.debug(f'Dropping plateau at {value}: the horizon does not collapse after it')
            continue
        shocks.append((curve.start + value, support))
    return ShockReport(shocks=tuple(shocks), tolerance_p=curve.tolerance_p,
                       episodes=_episodes([time for time, _ in shocks], curve.start,
                                          curve.start + curve.series_length),
                       curves=(curve,))


def _first_shock(curve: HorizonCurve, min_support: int, confirm: bool, finished: bool):
    """
    (value, support) of the first plateau that is a shock, or None when there is none yet.
    Undecided plateaus stop the search until the scan has gone far enough.
    """
    scanned = max([point.t0 for point in curve.points] + [t0 for t0, _ in curve.skipped], default=None)
    for value, support, last_t0 in _candidates(curve, min_support):
        if confirm:
            decided = finished or len(_followers(curve, value, min_support)) == min_support
        else:
            decided = finished or scanned > last_t0
        if not decided:
            return None
        if not confirm or is_confirmed(curve, value, min_support):
            return value, support
    return None


def _scan_for_shock(scanner: HorizonScanner, start: int, t0_values: list[int], p: float,
                    min_support: int, confirm: bool):
    length = len(scanner.series) - start
    batch = max(scanner.options.workers, 1)
    points, skipped = [], []
    curve = HorizonCurve(tolerance_p=p, points=(), series_length=length, start=start)
    for i in range(0, len(t0_values), batch):
        for t0, result in scanner.entries(start, t0_values[i:i + batch]):
            if isinstance(result, str):
                skipped.append((t0, result))
                continue
            rms, deviation = result
            points.append(HorizonPoint(t0=t0, t_pred=_first_break(deviation, t0, p, length), in_sample_rms=rms))
        curve = HorizonCurve(tolerance_p=p, points=tuple(points), series_length=length,
                             skipped=tuple(skipped), start=start)
        shock = _first_shock(curve, min_support, confirm, finished=False)
        if shock is not None:
            return curve, shock
    return curve, _first_shock(curve, min_support, confirm, finished=True)


def detect_shocks(series: SeriesSegment, p: float, min_support: int = 3, t0_range=None,
                  options: ScanOptions = None, confirm: bool = True, scanner: HorizonScanner = None) -> ShockReport:
    """
    Shocks are plateaus of the horizon curve below the series length.
    The scan stops at the first shock and starts again from it, with t0 counted from the
    shock, until the rest of the series holds none. t0_range applies to every scan.
    """
    _check_tolerance(p)
    _check_min_support(min_support)
    scanner = scanner or HorizonScanner(series, options)
    n = len(series)
    t0_values = _t0_values(series, t0_range, scanner.options)

    shocks, curves, start = [], [], 0
    while True:
        local = [t0 for t0 in t0_values if t0 <= n - start]
        curve, shock = _scan_for_shock(scanner, start, local, p, min_support, confirm)
        curves.append(curve)
        if shock is None:
            break
        value, support = shock
        start += value
        shocks.append((start, support))

    report = ShockReport(shocks=tuple(shocks), tolerance_p=p,
                         episodes=_episodes([time for time, _ in shocks], 0, n), curves=tuple(curves))
    logging.info(f'Found {len(report.shocks)} shock(s) in {series.label or "series"} at p={p}: {report.times}')
    return report


def p_sweep(series: SeriesSegment, ps, min_support: int = 3, t0_range=None,
            options: ScanOptions = None, confirm: bool = True) -> list[tuple[HorizonCurve, ShockReport]]:
    """
    Horizon curve over the whole series and shocks for every tolerance in ps, sharing
    one set of in-sample fits
    """
    scanner = HorizonScanner(series, options)
    scan = scanner.scan(0, _t0_values(series, t0_range, scanner.options))
    return [(scan.curve(p), detect_shocks(series, p, min_support, t0_range, confirm=confirm, scanner=scanner))
            for p in ps]


def fit_episodes(series: SeriesSegment, report: ShockReport, options: FitOptions = None) -> list[EpisodeFit]:
    """
    Fits every episode of a shock report separately, each rescaled to 100 at its start.
    Short episodes and failed fits are reported, not raised.
    """
    fits = []
    for start, end in report.episodes:
        episode = series.slice(start, end)
        if len(episode) < MIN_OBSERVATIONS:
            logging.warning(f'Episode [{start}, {end}) has {len(episode)} points, leaving it unfitted')
            fits.append(EpisodeFit(start=start, end=end, error=f'only {len(episode)} observations'))
            continue
        try:
            fit = fit_episode(episode.normalized(), options)
        except FitFailed as e:
            logging.warning(f'Episode [{start}, {end}) could not be fitted: {str(e)}')
            fits.append(EpisodeFit(start=start, end=end, error=str(e)))
            continue
        fits.append(EpisodeFit(start=start, end=end, fit=fit))
    return fits


def segment_and_fit(series: SeriesSegment, p: float, min_support: int = 3, t0_range=None,
                    options: ScanOptions = None, confirm: bool = True) -> list[EpisodeFit]:
    options = options or ScanOptions()
    report = detect_shocks(series, p, min_support, t0_range, options, confirm=confirm)
    return fit_episodes(series, report, options.fit)
