from abc import abstractmethod, ABC
from typing import Dict

from episode_fitter import FitOptions
from series_io import SeriesFile, ingest


class Command(ABC):
    """
    A command interface which can be used to add subcommands to the recovery command line.
    """

    def __init__(self, config: Dict):
        self.config = config

    @abstractmethod
    def get_name(self) -> str:
        """
        Return the subcommand name.
        """
        pass

    @abstractmethod
    def get_spec(self) -> Dict:
        """
        Command spec in the form of a JSON schema object. Every property becomes an option
        (or a positional argument when listed under "positional"); "flag" overrides the option name.
        """
        pass

    @abstractmethod
    def execute(self, args, seed: int):
        """
        Execute the command and return a Report, or plain text for commands that emit files
        """
        pass


def series_properties(config: Dict) -> Dict:
    """
    Options shared by every command that reads a series file
    """
    return {
        "file": {"type": "string", "description": "CSV file with a header row, one period and one value per row"},
        "period_column": {"type": "string", "default": config['io']['period_column'],
                          "description": "Name of the period column"},
        "value_column": {"type": "string", "default": config['io']['value_column'],
                         "description": "Name of the value column"},
        "unit": {"type": "string", "enum": ["year", "quarter"],
                 "description": "Period unit (default: quarter for 1990Q1-style labels, year otherwise)"},
    }


def load_series(args):
    return ingest(SeriesFile(path=args.file, period_column=args.period_column,
                             value_column=args.value_column, period_unit=args.unit))


def fit_options(config: Dict, args, seed: int):
    return FitOptions(free_w0=getattr(args, 'free_w0', False) or config['fitting']['free_w0'],
                      max_iterations=config['fitting']['max_iterations'],
                      gradient_tolerance=config['fitting']['gradient_tolerance'],
                      seed=seed)


def options_of(args) -> Dict:
    """
    Effective command options for the report metadata
    """
    hidden = ('command', 'out', 'json', 'seed', 'file')
    return {key: value for key, value in sorted(vars(args).items()) if key not in hidden}
