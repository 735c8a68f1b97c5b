import logging
from typing import Dict

from episode_fitter import fit_with_restarts
from report import Report
from response_model import recession_profile
from series_io import locate

from .command import Command, fit_options, load_series, options_of, series_properties


class FitCommand(Command):
    """
    A command to fit the response function to one episode of a series
    """
    def get_name(self) -> str:
        return 'fit'

    def get_spec(self) -> Dict:
        return {
            "name": "fit",
            "description": "Fit the two-exponential response function to a series (or a period range of it)",
            "parameters": {
                "type": "object",
                "positional": ["file"],
                "properties": {
                    **series_properties(self.config),
                    "first": {"type": "string", "flag": "--from",
                              "description": "First period of the episode, e.g. 1990 or 1990Q1"},
                    "last": {"type": "string", "flag": "--to", "description": "Last period of the episode"},
                    "free_w0": {"type": "boolean", "description": "Fit the initial level instead of pinning it "
                                                                  "to the first observation"},
                    "restarts": {"type": "integer", "default": self.config['fitting']['restarts'],
                                 "description": "Number of fits from perturbed starting points; "
                                                "the best one is reported"},
                },
            },
        }

    def execute(self, args, seed: int):
        series = load_series(args)
        start = locate(series, args.first) if args.first else 0
        stop = locate(series, args.last) + 1 if args.last else len(series)
        episode = series.slice(start, stop).normalized()

        fit = fit_with_restarts(episode, args.restarts, fit_options(self.config, args, seed))
        if fit.boundary_hit:
            logging.warning(f'Parameters at their bounds: {", ".join(sorted(fit.boundary_hit))}')
        if fit.degenerate:
            logging.warning('Degenerate fit: one component has zero weight, its rate is not identified')

        report = Report('fit', args.file, options_of(args), seed)
        report.add_metadata(scale=episode.scale)
        report.add_fit(fit)
        profile = recession_profile(fit.params)
        report.add_table('profile', [{
            'j_shaped': profile.j_shaped,
            'trough_time': profile.trough_time,
            'depth': profile.depth,
            'recovery_time': profile.recovery_time,
        }])
        return report
