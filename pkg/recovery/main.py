import logging
import os
import sys

from dotenv import load_dotenv

from command_manager import CommandManager
from errors import RecoveryError, UsageError
from report import write_output
from utils import env_bool


def main(argv=None) -> int:
    # Read .env file
    load_dotenv()

    # Setup logging
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=os.environ.get('LOG_LEVEL', 'INFO').upper()
    )

    # Setup configurations; command line options override every value
    fitting_config = {
        'max_iterations': int(os.environ.get('FIT_MAX_ITERATIONS', 500)),
        'gradient_tolerance': float(os.environ.get('FIT_GRADIENT_TOLERANCE', 1e-10)),
        'free_w0': env_bool('FIT_FREE_W0'),
        'restarts': int(os.environ.get('FIT_RESTARTS', 5)),
        'seed': int(os.environ.get('SEED', 0)),
    }

    detection_config = {
        'tolerance': float(os.environ.get('DETECT_TOLERANCE', 0.02)),
        'min_support': int(os.environ.get('DETECT_MIN_SUPPORT', 3)),
        't0_start': int(os.environ.get('DETECT_T0_START', 6)),
        'workers': int(os.environ.get('DETECT_WORKERS', 1)),
        'fit_retries': int(os.environ.get('DETECT_FIT_RETRIES', 3)),
        'confirm': env_bool('DETECT_CONFIRM', default=True),
    }

    simulation_config = {
        'dt': float(os.environ.get('SIMULATION_DT', 0.01)),
    }

    policy_config = {
        'beta_min': float(os.environ.get('POLICY_BETA_MIN', 1e-5)),
        'beta_max': float(os.environ.get('POLICY_BETA_MAX', 1.0)),
        'grid_size': int(os.environ.get('POLICY_GRID_SIZE', 1000)),
        'lookahead': float(os.environ.get('POLICY_LOOKAHEAD', 1.0)),
    }

    io_config = {
        'period_column': os.environ.get('PERIOD_COLUMN', 'period'),
        'value_column': os.environ.get('VALUE_COLUMN', 'value'),
    }

    command_config = {
        'commands': [command for command in os.environ.get('COMMANDS', '').split(',') if command],
        'fitting': fitting_config,
        'detection': detection_config,
        'simulation': simulation_config,
        'policy': policy_config,
        'io': io_config,
    }

    # Run the requested command
    command_manager = CommandManager(config=command_config)
    try:
        text, out = command_manager.run(argv)
        write_output(text, out, sys.stdout)
    except RecoveryError as e:
        logging.error(f'{type(e).__name__}: {str(e)}')
        return e.exit_code
    except OSError as e:
        logging.error(f'Cannot write output: {str(e)}')
        return UsageError.exit_code
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else 0
    return 0


if __name__ == '__main__':
    sys.exit(main())
