"""Subcommand registry for the FlatGrid command line."""

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_FAULT = 2


class Command:
    """A named subcommand: argument setup plus a handler.

    Modules create one Command each and decorate their functions with
    arguments() and handler(); the CLI factory registers them.
    """

    def __init__(self, name, help, profile=None):
        self.name = name
        self.help = help
        self.profile = profile    # preferred config profile when --profile is not given
        self._arguments = None
        self._handler = None

    def arguments(self, func):
        """Register func(parser) as the argument setup."""
        self._arguments = func
        return func

    def handler(self, func):
        """Register func(args, profile) -> exit status as the handler."""
        self._handler = func
        return func

    def register(self, subparsers):
        if self._handler is None:
            raise RuntimeError(f"Command '{self.name}' has no handler")
        parser = subparsers.add_parser(self.name, help=self.help, description=self.help)
        if self._arguments is not None:
            self._arguments(parser)
        parser.set_defaults(command=self)
        return parser

    def __call__(self, args, profile):
        return self._handler(args, profile)


def add_run_overrides(parser):
    """--dt, --t-end and --decimation, shared by every simulating command."""
    parser.add_argument('--dt', type=float, default=None, help='Integration step [s]')
    parser.add_argument('--t-end', dest='t_end', type=float, default=None, help='Simulated time [s]')
    parser.add_argument('--decimation', type=int, default=None, help='Log every Nth step')


def run_overrides(args):
    return {'dt': args.dt, 't_end': args.t_end, 'decimation': args.decimation}
