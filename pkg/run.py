"""Run the FlatGrid command line: python run.py {run,tune,verify,sweep} ..."""
import os
import sys

from flatgrid import create_cli

cli = create_cli(os.environ.get('FLATGRID_PROFILE', 'default'))

if __name__ == '__main__':
    sys.exit(cli.run())
