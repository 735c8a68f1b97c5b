from typing import Dict

from errors import UsageError
from report import Report
from shock_detector import detect_shocks, fit_episodes

from .command import Command, load_series, options_of, series_properties
from .detect import confirm_plateaus, detection_properties, scan_options


class SegmentCommand(Command):
    """
    A command to split a series at its shocks and fit every episode
    """
    def get_name(self) -> str:
        return 'segment'

    def get_spec(self) -> Dict:
        return {
            "name": "segment",
            "description": "Detect shocks, then fit the response function to each episode between them",
            "parameters": {
                "type": "object",
                "positional": ["file"],
                "properties": {
                    **series_properties(self.config),
                    **detection_properties(self.config),
                },
            },
        }

    def execute(self, args, seed: int):
        if not 0.0 < args.p < 1.0:
            raise UsageError(f'Tolerance p must lie in (0, 1), got {args.p}')
        if args.min_support < 2:
            raise UsageError(f'--min-support must be at least 2, got {args.min_support}')

        series = load_series(args)
        options = scan_options(self.config, args, seed)
        shocks = detect_shocks(series, args.p, args.min_support, options=options,
                               confirm=confirm_plateaus(self.config, args))

        report = Report('segment', args.file, options_of(args), seed)
        report.add_metadata(scale=series.scale)
        report.add_shocks(shocks)
        episodes = []
        for episode in fit_episodes(series, shocks, options.fit):
            if episode.fit is not None:
                report.add_fit(episode.fit)
            episodes.append({
                'start': episode.start, 'end': episode.end,
                'first': series.periods[episode.start], 'last': series.periods[episode.end - 1],
                'status': 'fitted' if episode.fit is not None else f'unfitted: {episode.error}',
            })
        report.add_table('episodes', episodes)
        return report
