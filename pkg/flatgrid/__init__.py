"""FlatGrid command-line application factory."""
import argparse
import logging
import sys

from config import config
from flatgrid.commands import EXIT_FAILURE, EXIT_FAULT
from flatgrid.errors import ConfigurationError, SimulationFault

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)-7s %(name)s: %(message)s'


class FlatGridCli:
    """Argument parser plus registered subcommands and error handlers."""

    def __init__(self, config_name='default'):
        self.config_name = config_name
        self.parser = argparse.ArgumentParser(
            prog='flatgrid',
            description='Flatness-based control of a grid-tied inverter on a weak grid')
        self.parser.add_argument('--profile', choices=sorted(config), default=None,
                                 help=f"config.py profile (default: '{config_name}')")
        self.parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
        self.subparsers = self.parser.add_subparsers(dest='command_name', required=True)
        self.commands = {}
        self.error_handlers = {}

    def register_command(self, command):
        command.register(self.subparsers)
        self.commands[command.name] = command

    def errorhandler(self, exc_class):
        """Register func(exc) -> exit status for an exception class."""
        def decorator(func):
            self.error_handlers[exc_class] = func
            return func
        return decorator

    def run(self, argv=None):
        """Parse argv, dispatch to the subcommand and return its exit status."""
        args = self.parser.parse_args(argv)
        command = args.command
        profile = args.profile or command.profile or self.config_name
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        try:
            return command(args, profile)
        except tuple(self.error_handlers) as exc:
            for exc_class, handler in self.error_handlers.items():
                if isinstance(exc, exc_class):
                    return handler(exc)
            raise


def create_cli(config_name='default'):
    """Create and configure the command-line application."""
    cli = FlatGridCli(config_name)
    logging.basicConfig(level=config[config_name].LOG_LEVEL.upper(), format=LOG_FORMAT)

    # Register commands
    from flatgrid.commands.run import run_cmd
    from flatgrid.commands.tune import tune_cmd
    from flatgrid.commands.verify import verify_cmd
    from flatgrid.commands.sweep import sweep_cmd

    cli.register_command(run_cmd)
    cli.register_command(tune_cmd)
    cli.register_command(verify_cmd)
    cli.register_command(sweep_cmd)

    # Register error handlers
    @cli.errorhandler(ConfigurationError)
    def configuration_error(error):
        """Invalid run file, flags or pole specification."""
        print(f'configuration error: {error}', file=sys.stderr)
        return EXIT_FAILURE

    @cli.errorhandler(SimulationFault)
    def simulation_fault(error):
        """Fault raised outside a run's own fault handling."""
        print('\n'.join(error.report()), file=sys.stderr)
        return EXIT_FAULT

    return cli
