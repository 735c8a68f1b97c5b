from typing import Dict

from errors import UsageError
from report import Report
from response_model import ResponseParams
from series_io import write_series
from synthetic_series import NoiseSpec, generate, generate_piecewise

from .command import Command, options_of


class SynthCommand(Command):
    """
    A command to generate a synthetic GDP series, optionally with one injected shock
    """
    def get_name(self) -> str:
        return 'synth'

    def get_spec(self) -> Dict:
        return {
            "name": "synth",
            "description": "Generate a noisy series from the response function (CSV on output)",
            "parameters": {
                "type": "object",
                "properties": {
                    "f": {"type": "number", "description": "Fraction of the economy that grows"},
                    "lp": {"type": "number", "description": "Growth rate lambda+ per period"},
                    "lm": {"type": "number", "description": "Decay rate lambda- per period"},
                    "w0": {"type": "number", "default": 100.0, "description": "Initial level"},
                    "nu": {"type": "number", "default": 0.0, "description": "Multiplicative noise strength"},
                    "n": {"type": "integer", "description": "Number of periods"},
                    "shock_at": {"type": "integer", "description": "Index of the first period after a trend break"},
                    "f2": {"type": "number", "description": "f after the break (default: half of f)"},
                    "lp2": {"type": "number", "description": "lambda+ after the break (default: lp)"},
                    "lm2": {"type": "number", "description": "lambda- after the break (default: lm)"},
                    "label": {"type": "string", "default": "synthetic", "description": "Series label"},
                },
                "required": ["f", "lp", "lm", "n"],
            },
        }

    def execute(self, args, seed: int):
        params = ResponseParams(f=args.f, lambda_plus=args.lp, lambda_minus=args.lm, w0=args.w0)
        noise = NoiseSpec(nu=args.nu, seed=seed)
        if args.shock_at is None:
            series = generate(params, noise, args.n, label=args.label)
        else:
            if not 1 <= args.shock_at < args.n:
                raise UsageError(f'--shock-at must lie in [1, {args.n - 1}], got {args.shock_at}')
            after = ResponseParams(
                f=args.f2 if args.f2 is not None else args.f / 2.0,
                lambda_plus=args.lp2 if args.lp2 is not None else args.lp,
                lambda_minus=args.lm2 if args.lm2 is not None else args.lm,
            )
            series = generate_piecewise([(params, args.shock_at), (after, args.n - args.shock_at)], noise,
                                        label=args.label)

        if not args.json:
            return write_series(series)
        report = Report('synth', None, options_of(args), seed)
        report.add_table('series', [{'period': period, 'value': float(value)}
                                    for period, value in zip(series.periods, series.values)])
        return report
