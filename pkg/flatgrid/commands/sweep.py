"""Grid-strength sweep over (Rg, Lg)."""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np
import pandas as pd

from config import config as config_profiles
from flatgrid.commands import EXIT_OK, Command, add_run_overrides, run_overrides
from flatgrid.engine import run_scenario, summarize
from flatgrid.errors import ConfigurationError
from flatgrid.plant import short_circuit_ratio, xr_ratio
from flatgrid.records import write_frame
from flatgrid.runfile import default_run_config, load_run_config

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = (
    'Rg [ohm]', 'Lg [H]', 'SCR [1]', 'X/R [1]',
    'fault', 'guard_count', 'extinguished', 'stable',
    'max_phase_mu [1]', 'max_extinction [s]', 'max_dc_error [V]',
    'min_p [W]', 'max_p [W]', 'min_q [var]', 'max_q [var]',
)

sweep_cmd = Command('sweep', 'Run the scenario over a grid of grid resistances and inductances',
                    profile='quick')


@sweep_cmd.arguments
def sweep_arguments(parser):
    parser.add_argument('--config', default=None, help='Run file (default: built-in weak-grid test)')
    parser.add_argument('--rg', nargs=2, type=float, metavar=('MIN', 'MAX'), default=(28.28, 28.28),
                        help='Grid resistance range [ohm]')
    parser.add_argument('--lg', nargs=2, type=float, metavar=('MIN', 'MAX'), default=(90e-3, 90e-3),
                        help='Grid inductance range [H]')
    parser.add_argument('--steps', type=int, default=1, help='Points per axis (0 writes the header only)')
    parser.add_argument('--workers', type=int, default=None, help='Worker processes')
    parser.add_argument('-o', '--output', default='sweep.csv', help='Aggregate CSV path')
    add_run_overrides(parser)


def validate_ranges(rg, lg, steps):
    """Returns:
        tuple: (is_valid, error_message)
    """
    if steps < 0:
        return False, f'--steps must be non-negative, got {steps}'
    if rg[0] < 0 or rg[1] < rg[0]:
        return False, f'--rg needs 0 <= MIN <= MAX, got {rg[0]} {rg[1]}'
    if lg[0] <= 0 or lg[1] < lg[0]:
        return False, f'--lg needs 0 < MIN <= MAX, got {lg[0]} {lg[1]}'
    return True, None


def grid_points(rg, lg, steps):
    """(Rg, Lg) pairs in row-major order; steps points per axis."""
    if steps == 0:
        return []
    return [(float(r), float(l)) for r in np.linspace(rg[0], rg[1], steps)
            for l in np.linspace(lg[0], lg[1], steps)]


def evaluate_point(task):
    """Simulate one grid point and reduce it to an aggregate row."""
    params, gains, scenario, sim = task
    record = run_scenario(params, gains, scenario, sim)
    summary = summarize(record, scenario, sim)

    extinction = list(summary.extinction_times.values())
    extinguished = all(t is not None for t in extinction)
    finite = [t for t in extinction if t is not None]
    dc_errors = [seg['dc_error'] for seg in summary.segments if seg['available'] and seg['steady']]
    fault = summary.fault or ''
    stable = not fault and summary.guard_count <= sim.guard_storm_limit and extinguished
    return {
        'Rg [ohm]': params.Rg,
        'Lg [H]': params.Lg,
        'SCR [1]': short_circuit_ratio(params),
        'X/R [1]': xr_ratio(params),
        'fault': fault,
        'guard_count': summary.guard_count,
        'extinguished': extinguished,
        'stable': stable,
        'max_phase_mu [1]': summary.max_phase_mu,
        'max_extinction [s]': max(finite) if finite else np.nan,
        'max_dc_error [V]': max(dc_errors) if dc_errors else np.nan,
        'min_p [W]': summary.min_p, 'max_p [W]': summary.max_p,
        'min_q [var]': summary.min_q, 'max_q [var]': summary.max_q,
    }


def run_sweep(run, points, workers=None):
    """Evaluate every point; rows come back in the order of points."""
    tasks = [(replace(run.params, Rg=rg, Lg=lg), run.gains, run.scenario, run.sim) for rg, lg in points]
    if not tasks:
        return pd.DataFrame(columns=list(SWEEP_COLUMNS))
    if workers == 1 or len(tasks) == 1:
        rows = [evaluate_point(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate_point, tasks))
    return pd.DataFrame(rows, columns=list(SWEEP_COLUMNS))


@sweep_cmd.handler
def sweep(args, profile):
    """Individual faults become unstable verdicts, never a failing exit status."""
    is_valid, message = validate_ranges(args.rg, args.lg, args.steps)
    if not is_valid:
        raise ConfigurationError(message, field='sweep')

    overrides = run_overrides(args)
    if args.config:
        run = load_run_config(args.config, profile, **overrides)
    else:
        run = default_run_config(profile, **overrides)
    workers = args.workers if args.workers is not None else config_profiles[profile].SWEEP_WORKERS

    points = grid_points(args.rg, args.lg, args.steps)
    logger.info('Sweeping %d grid points with %s workers', len(points), workers or 'default')
    frame = run_sweep(run, points, workers)
    write_frame(frame, args.output)

    print(f"{'Rg':>8} | {'Lg':>8} | {'SCR':>6} | {'X/R':>6} | verdict")
    for row in frame.itertuples(index=False):
        verdict = 'stable' if row[7] else ('fault' if row[4] else 'unstable')
        print(f'{row[0]:8.3f} | {row[1]:8.4f} | {row[2]:6.3f} | {row[3]:6.3f} | {verdict}')
    return EXIT_OK
