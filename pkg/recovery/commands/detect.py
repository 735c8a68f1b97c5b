from typing import Dict

from errors import UsageError
from report import Report
from shock_detector import ScanOptions, p_sweep
from utils import parse_range

from .command import Command, fit_options, load_series, options_of, series_properties


def detection_properties(config: Dict) -> Dict:
    detection = config['detection']
    return {
        "p": {"type": "number", "default": detection['tolerance'],
              "description": "Relative tolerance of a valid prediction"},
        "min_support": {"type": "integer", "default": detection['min_support'],
                        "description": "Consecutive in-sample sizes needed to accept a plateau"},
        "t0_start": {"type": "integer", "default": detection['t0_start'],
                     "description": "Smallest in-sample size of the scan"},
        "workers": {"type": "integer", "default": detection['workers'],
                    "description": "Threads used for the in-sample fits"},
        "restarts": {"type": "integer", "default": config['fitting']['restarts'],
                     "description": "Multistart fits per in-sample size"},
        "any_plateau": {"type": "boolean",
                        "description": "Count every plateau as a shock, also those the horizon does not collapse after"},
    }


def confirm_plateaus(config: Dict, args) -> bool:
    return config['detection']['confirm'] and not args.any_plateau


def scan_options(config: Dict, args, seed: int) -> ScanOptions:
    return ScanOptions(restarts=args.restarts, retries=config['detection']['fit_retries'],
                       workers=args.workers, t0_start=args.t0_start,
                       fit=fit_options(config, args, seed))


class DetectCommand(Command):
    """
    A command to compute prediction horizons and the shocks they reveal
    """
    def get_name(self) -> str:
        return 'detect'

    def get_spec(self) -> Dict:
        return {
            "name": "detect",
            "description": "Prediction horizon t_pred for every in-sample size and the shocks at its plateaus",
            "parameters": {
                "type": "object",
                "positional": ["file"],
                "properties": {
                    **series_properties(self.config),
                    **detection_properties(self.config),
                    "p_sweep": {"type": "string", "description": "Tolerance sweep lo:hi:step, e.g. 0.01:0.05:0.01"},
                },
            },
        }

    def execute(self, args, seed: int):
        ps = parse_range(args.p_sweep) if args.p_sweep else [args.p]
        for p in ps:
            if not 0.0 < p < 1.0:
                raise UsageError(f'Tolerance p must lie in (0, 1), got {p}')
        if args.min_support < 2:
            raise UsageError(f'--min-support must be at least 2, got {args.min_support}')

        series = load_series(args)
        report = Report('detect', args.file, options_of(args), seed)
        report.add_metadata(scale=series.scale)
        for curve, shocks in p_sweep(series, ps, args.min_support, options=scan_options(self.config, args, seed),
                                      confirm=confirm_plateaus(self.config, args)):
            report.add_horizon(curve, with_p=args.p_sweep is not None)
            report.add_shocks(shocks)
            report.add_table('episodes', [{
                'p': shocks.tolerance_p, 'start': start, 'end': end,
                'first': series.periods[start], 'last': series.periods[end - 1],
            } for start, end in shocks.episodes])
            if curve.skipped:
                report.add_table('skipped', [{'p': curve.tolerance_p, 't0': t0, 'reason': reason}
                                             for t0, reason in curve.skipped])
        return report
