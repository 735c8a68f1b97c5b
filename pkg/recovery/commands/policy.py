import logging
from typing import Dict

from errors import FitFailed, UsageError
from report import Report
from transfer_policy import (asymptotic_rate, envelope_policy, log_beta_grid, optimal_policy,
                             static_sweep)
from two_sector import SectorState
from utils import parse_float_list, sample_stride, strided

from .command import Command, fit_options, options_of


class PolicyCommand(Command):
    """
    A command to run static, envelope or optimal transfer policies and re-fit their output
    """
    def get_name(self) -> str:
        return 'policy'

    def get_spec(self) -> Dict:
        policy = self.config['policy']
        return {
            "name": "policy",
            "description": "Simulate a transfer policy, report its trajectory and the effective response fit",
            "parameters": {
                "type": "object",
                "positional": ["mode"],
                "properties": {
                    "mode": {"type": "string", "enum": ["static", "envelope", "optimal"],
                             "description": "static: constant beta per value of --betas; envelope: follow the best "
                                            "constant-beta scenario; optimal: greedy lookahead maximization"},
                    "a1": {"type": "number", "default": 0.02, "description": "Intrinsic rate of the growing sector"},
                    "a2": {"type": "number", "default": -0.05, "description": "Intrinsic rate of the shrinking sector"},
                    "w1": {"type": "number", "default": 0.1, "description": "Initial activity of sector 1"},
                    "w2": {"type": "number", "default": 0.9, "description": "Initial activity of sector 2"},
                    "T": {"type": "number", "default": 200.0, "description": "Horizon in periods"},
                    "dt": {"type": "number", "default": self.config['simulation']['dt'],
                           "description": "Integration step"},
                    "beta_min": {"type": "number", "default": policy['beta_min'], "description": "Lowest beta"},
                    "beta_max": {"type": "number", "default": policy['beta_max'], "description": "Highest beta"},
                    "grid_size": {"type": "integer", "default": policy['grid_size'],
                                  "description": "Number of log-spaced scenarios of the envelope policy"},
                    "betas": {"type": "string", "description": "Comma separated betas of the static mode "
                                                               "(default: beta_min and beta_max)"},
                    "lookahead": {"type": "number", "default": policy['lookahead'],
                                  "description": "Lookahead of the optimal policy, in periods"},
                    "every": {"type": "number", "default": 1.0, "description": "Time between two printed rows"},
                },
            },
        }

    def execute(self, args, seed: int):
        if args.grid_size < 1:
            raise UsageError(f'--grid-size must be positive, got {args.grid_size}')
        state0 = SectorState(w1=args.w1, w2=args.w2)
        stride = sample_stride(args.dt, args.every)
        report = Report('policy', None, options_of(args), seed)

        envelope = None
        if args.mode == 'static':
            betas = parse_float_list(args.betas) if args.betas else [args.beta_min, args.beta_max]
            outcomes = static_sweep(args.a1, args.a2, betas, state0, args.T, args.dt,
                                    beta_min=args.beta_min, beta_max=max(betas + [args.beta_max]))
        elif args.mode == 'envelope':
            grid = log_beta_grid(args.beta_min, args.beta_max, args.grid_size)
            envelope, _, attained = envelope_policy(args.a1, args.a2, grid, state0, args.T, args.dt)
            outcomes = [attained]
        else:
            outcomes = [optimal_policy(args.a1, args.a2, (args.beta_min, args.beta_max), state0, args.T, args.dt,
                                       lookahead=args.lookahead)]

        options = fit_options(self.config, args, seed)
        for outcome in outcomes:
            final_rate = asymptotic_rate(args.a1, args.a2, float(outcome.schedule.betas[-1]))
            summary = {**outcome.summary(), 'final_rate': final_rate}
            try:
                outcome = outcome.with_effective_fit(options)
            except FitFailed as e:
                logging.warning(f'Effective fit of the {outcome.name} policy failed: {str(e)}')
                summary['effective_fit'] = 'failed'
            else:
                report.add_fit(outcome.effective_fit, policy=outcome.name, beta=summary['beta_start'])
                fitted_rate = outcome.effective_fit.params.lambda_plus
                if abs(fitted_rate - final_rate) > 0.1 * abs(final_rate):
                    logging.warning(f'Effective lambda+ {fitted_rate:.5f} of the {outcome.name} policy differs from '
                                    f'the asymptotic rate {final_rate:.5f} of its final beta')
            report.add_policy(summary)
            report.add_table('trajectory', strided(self.__trajectory_rows(outcome, envelope), stride))
        return report

    @staticmethod
    def __trajectory_rows(outcome, envelope):
        rows = outcome.trajectory.table()
        betas = outcome.schedule.betas
        for i, row in enumerate(rows):
            row['policy'] = outcome.name
            row['beta'] = float(betas[i])
            if envelope is not None:
                row['envelope'] = float(envelope[i])
        return rows
