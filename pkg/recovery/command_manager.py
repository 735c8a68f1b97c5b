import argparse

from commands.detect import DetectCommand
from commands.fit import FitCommand
from commands.policy import PolicyCommand
from commands.segment import SegmentCommand
from commands.simulate import SimulateCommand
from commands.synth import SynthCommand
from errors import UsageError
from report import Report

ARGUMENT_TYPES = {'number': float, 'integer': int, 'string': str}


class CommandLineParser(argparse.ArgumentParser):
    """
    Argument parser that reports usage errors as UsageError instead of exiting
    """

    def error(self, message):
        raise UsageError(f'{self.prog}: {message}')


class CommandManager:
    """
    A class to manage the subcommands and dispatch the command line to them
    """

    def __init__(self, config):
        command_mapping = {
            'fit': FitCommand,
            'detect': DetectCommand,
            'segment': SegmentCommand,
            'synth': SynthCommand,
            'simulate': SimulateCommand,
            'policy': PolicyCommand,
        }
        enabled_commands = config.get('commands') or list(command_mapping)
        self.config = config
        self.commands = [command_mapping[command](config) for command in enabled_commands if command in command_mapping]

    def get_command_specs(self):
        """
        Return the specs of all enabled commands
        """
        return [command.get_spec() for command in self.commands]

    def build_parser(self) -> argparse.ArgumentParser:
        """
        Build the argument parser, one subparser per command spec
        """
        parser = CommandLineParser(prog='recovery', description='Recession/recovery response fitting, shock '
                                                                'detection and two-sector transfer policies')
        subparsers = parser.add_subparsers(dest='command', required=True)
        for spec in self.get_command_specs():
            subparser = subparsers.add_parser(spec['name'], help=spec['description'], description=spec['description'])
            self.__add_arguments(subparser, spec['parameters'])
            subparser.add_argument('--out', help='Output path (default: standard output)')
            subparser.add_argument('--json', action='store_true', help='Emit one JSON object instead of tables')
            subparser.add_argument('--seed', type=int, default=self.config['fitting']['seed'],
                                   help='Seed of every stochastic step')
        return parser

    def run(self, argv):
        """
        Parse the command line, execute the command and return (rendered output, output path)
        """
        args = self.build_parser().parse_args(argv)
        command = self.__get_command_by_name(args.command)
        try:
            result = command.execute(args, args.seed)
        except ValueError as e:
            raise UsageError(str(e)) from e
        text = result.render(as_json=args.json) if isinstance(result, Report) else result
        return text, args.out

    @staticmethod
    def __add_arguments(parser, parameters):
        positional = parameters.get('positional', [])
        required = parameters.get('required', [])
        for name, prop in parameters['properties'].items():
            kwargs = {'help': prop.get('description')}
            if prop['type'] == 'boolean':
                kwargs['action'] = 'store_true'
            else:
                kwargs['type'] = ARGUMENT_TYPES[prop['type']]
                if 'enum' in prop:
                    kwargs['choices'] = prop['enum']
                if 'default' in prop:
                    kwargs['default'] = prop['default']
            if name in positional:
                parser.add_argument(name, **kwargs)
            else:
                flag = prop.get('flag', '--' + name.replace('_', '-'))
                parser.add_argument(flag, dest=name, required=name in required, **kwargs)

    def __get_command_by_name(self, name):
        return next((command for command in self.commands if command.get_name() == name), None)
