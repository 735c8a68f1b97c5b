from typing import Dict

from report import Report
from two_sector import SectorParams, SectorState, asymptotic_inequality, decompose, integrate, relaxation_time
from utils import sample_stride, strided

from .command import Command, options_of


class SimulateCommand(Command):
    """
    A command to integrate the two-sector model at a constant transfer rate
    """
    def get_name(self) -> str:
        return 'simulate'

    def get_spec(self) -> Dict:
        return {
            "name": "simulate",
            "description": "Integrate the two-sector transfer model and print its trajectory",
            "parameters": {
                "type": "object",
                "properties": {
                    "a1": {"type": "number", "description": "Intrinsic rate of the growing sector"},
                    "a2": {"type": "number", "description": "Intrinsic rate of the shrinking sector"},
                    "beta": {"type": "number", "description": "Transfer rate"},
                    "w1": {"type": "number", "description": "Initial activity of sector 1"},
                    "w2": {"type": "number", "description": "Initial activity of sector 2"},
                    "T": {"type": "number", "description": "Horizon in periods"},
                    "dt": {"type": "number", "default": self.config['simulation']['dt'],
                           "description": "Integration step"},
                    "every": {"type": "number", "default": 1.0,
                              "description": "Time between two printed rows"},
                },
                "required": ["a1", "a2", "beta", "w1", "w2", "T"],
            },
        }

    def execute(self, args, seed: int):
        params = SectorParams(alpha1=args.a1, alpha2=args.a2, beta=args.beta)
        state0 = SectorState(w1=args.w1, w2=args.w2)
        trajectory = integrate(params, state0, args.T, args.dt)

        system = decompose(params, state0)
        modes = {
            'lambda_plus': system.lambda_plus,
            'lambda_minus': system.lambda_minus,
            'omega_plus': system.omega_plus,
            'omega_minus': system.omega_minus,
            'relaxation_time': relaxation_time(params),
        }
        if params.beta > 0.0:
            modes['asymptotic_inequality'] = asymptotic_inequality(params)

        report = Report('simulate', None, options_of(args), seed)
        report.add_table('modes', [modes])
        report.add_table('trajectory', strided(trajectory.table(), sample_stride(args.dt, args.every)))
        return report
