"""Scenario run: simulate, write the CSV record and print the summary."""
import logging
import sys

from flatgrid.commands import EXIT_FAULT, EXIT_OK, Command, add_run_overrides, run_overrides
from flatgrid.engine import run_scenario, summarize
from flatgrid.records import record_to_csv
from flatgrid.runfile import load_run_config

logger = logging.getLogger(__name__)

run_cmd = Command('run', 'Simulate a run file and write the time-series CSV')


@run_cmd.arguments
def run_arguments(parser):
    parser.add_argument('config', help='Run file (.cfg), e.g. weak_grid.cfg')
    parser.add_argument('-o', '--output', default='run.csv', help='CSV output path')
    add_run_overrides(parser)


@run_cmd.handler
def run_scenario_file(args, profile):
    """Run the closed loop; a fault still writes the partial record."""
    run = load_run_config(args.config, profile, **run_overrides(args))
    record = run_scenario(run.params, run.gains, run.scenario, run.sim)
    record_to_csv(record, args.output)
    logger.info('Wrote %d samples to %s', len(record), args.output)

    for warning in record.warnings:
        print(f'warning: {warning}', file=sys.stderr)
    if len(record):
        print('\n'.join(summarize(record, run.scenario, run.sim).lines()))
    if record.fault is not None:
        print('\n'.join(record.fault.report()), file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK
