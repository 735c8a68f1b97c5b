import json
import math
import pathlib

from errors import NonFiniteState

REPORT_VERSION = '1.0'

FIT_COLUMNS = ['first', 'last', 'f', 'exp_lambda_plus', 'exp_lambda_minus', 'srs', 'srm', 'rsrs', 'rsrm', 'n',
               'lambda_plus', 'lambda_minus', 'f_err', 'lambda_plus_err', 'lambda_minus_err', 'w0',
               'converged', 'boundary']


def format_value(value) -> str:
    # repr keeps every digit, so text output is reproducible and lossless
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return '-'
    return str(value)


def _non_finite(value) -> bool:
    return isinstance(value, float) and not math.isfinite(value)


class Report:
    """
    Report class
    Collects the results of one command and renders them as tab-delimited tables
    or as a single JSON object.
    JSON example:
    {
        "metadata": {
            "command": "segment",
            "input": "finland.csv",
            "options": {"p": 0.02, "min_support": 3},
            "seed": 0,
            "version": "1.0"},
        "fits": [
            {"first": "1990Q1", "last": "2000Q3", "f": 0.768, "exp_lambda_plus": 1.0122, ...}
        ],
        "horizon": [{"p": 0.02, "t0": 6, "t_pred": 14}, ...],
        "shocks": [{"p": 0.02, "time": 42, "support": 19}],
        "policy": [{"policy": "optimal", "beta_start": 1.0, "W_final": 26.8, ...}],
        "tables": {
            "trajectory": [{"t": 0.0, "w1": 0.1, "w2": 0.9, "W": 1.0, "delta": 0.111}]
        }
    }
    Metadata carries no timestamps: identical invocations give identical reports.
    """

    def __init__(self, command, input_path=None, options=None, seed=None):
        """
        Initializes an empty report for a command.
        :param command: name of the command that produced the report
        :param input_path: path of the series file, if any
        :param options: effective options of the command
        :param seed: seed used for anything stochastic
        """
        self.report = {
            'metadata': {
                'command': command,
                'input': input_path,
                'options': dict(options or {}),
                'seed': seed,
                'version': REPORT_VERSION,
            },
            'fits': [],
            'horizon': [],
            'shocks': [],
            'policy': [],
            'tables': {},
        }

    def add_metadata(self, **fields):
        """Adds fields to the metadata, e.g. the scale of the input series
        :param fields: metadata names and values
        """
        self.report['metadata'].update(fields)

    def add_fit(self, fit, **extra):
        """Adds a fit row in the fixed column order
        :param fit: FitResult of an episode
        :param extra: additional columns appended after the standard ones (e.g. the episode bounds)
        """
        row = fit.row()
        self.report['fits'].append({**{column: row[column] for column in FIT_COLUMNS}, **extra})

    def add_horizon(self, curve, with_p=False):
        """Adds the (t0, t_pred) samples of a horizon curve
        :param curve: HorizonCurve
        :param with_p: prefix every row with the tolerance, for tolerance sweeps
        """
        for point in curve.points:
            row = {'p': curve.tolerance_p} if with_p else {}
            self.report['horizon'].append({**row, 't0': point.t0, 't_pred': point.t_pred})

    def add_shocks(self, shock_report):
        for time, support in shock_report.shocks:
            self.report['shocks'].append({'p': shock_report.tolerance_p, 'time': time, 'support': support})

    def add_policy(self, summary: dict):
        self.report['policy'].append(dict(summary))

    def add_table(self, name, rows):
        """Adds (or extends) a named table
        :param name: table name, printed as a '# name' header line
        :param rows: list of dicts sharing the same keys
        """
        self.report['tables'].setdefault(name, []).extend(dict(row) for row in rows)

    def check_finite(self):
        """
        Raises NonFiniteState when any numeric field is NaN or infinite
        """
        sections = [('fits', self.report['fits']), ('horizon', self.report['horizon']),
                    ('shocks', self.report['shocks']), ('policy', self.report['policy'])]
        sections += [(f'table {name}', rows) for name, rows in self.report['tables'].items()]
        for section, rows in sections:
            for row in rows:
                bad = [key for key, value in row.items() if _non_finite(value)]
                if bad:
                    raise NonFiniteState(f'Non-finite {", ".join(bad)} in {section}')

    def _tables(self):
        named = [('fits', self.report['fits']), ('horizon', self.report['horizon']),
                 ('shocks', self.report['shocks']), ('policy', self.report['policy'])]
        named += list(self.report['tables'].items())
        return [(name, rows) for name, rows in named if rows]

    def to_text(self) -> str:
        lines = []
        for key, value in self.report['metadata'].items():
            if key == 'options':
                value = ' '.join(f'{option}={format_value(v)}' for option, v in value.items())
            lines.append(f'# {key}: {format_value(value)}')
        for name, rows in self._tables():
            columns = list(rows[0].keys())
            for row in rows[1:]:
                columns += [key for key in row if key not in columns]
            lines.append('')
            lines.append(f'# {name}')
            lines.append('\t'.join(columns))
            for row in rows:
                lines.append('\t'.join(format_value(row.get(column)) for column in columns))
        return '\n'.join(lines) + '\n'

    def to_json(self) -> str:
        return json.dumps(self.report, indent=2) + '\n'

    def render(self, as_json=False) -> str:
        self.check_finite()
        return self.to_json() if as_json else self.to_text()


def write_output(text, out=None, stream=None):
    """
    Writes rendered output to a file, or to the given stream when no path is set
    """
    if out:
        pathlib.Path(out).write_text(text)
    else:
        stream.write(text)
