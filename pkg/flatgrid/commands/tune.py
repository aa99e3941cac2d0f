"""Gain tuning from two settling-time/damping specifications."""
from flatgrid.commands import EXIT_FAILURE, EXIT_OK, Command
from flatgrid.models import PoleSpec
from flatgrid.tuning import DEFAULT_SETTLE_FACTOR, tune

tune_cmd = Command('tune', 'Compute controller gains for two pole pairs')


@tune_cmd.arguments
def tune_arguments(parser):
    parser.add_argument('ts1', type=float, nargs='?', default=1e-3, help='Settling time of pair 1 [s]')
    parser.add_argument('zeta1', type=float, nargs='?', default=0.707, help='Damping of pair 1')
    parser.add_argument('ts2', type=float, nargs='?', default=10e-3, help='Settling time of pair 2 [s]')
    parser.add_argument('zeta2', type=float, nargs='?', default=0.707, help='Damping of pair 2')
    parser.add_argument('--settle-factor', type=float, default=DEFAULT_SETTLE_FACTOR,
                        help='sigma * ts (4.6: 1%% band, 4.0: 2%% band)')


def format_tuning(gains, pole_set, report):
    lines = ['Gains']
    for name in ('k1', 'k2', 'k3', 'k0'):
        lines.append(f'  {name} = {getattr(gains, name):.6e}')
    lines.append('Poles and scaled residuals |det(sI - A)| / max(1, |s|^4)')
    for pole, residual in zip(pole_set.poles, report.residuals):
        lines.append(f'  {pole.real:+.6e} {pole.imag:+.6e}j   {residual:.3e}')
    lines.append(f"Assignment {'verified' if report.passed else 'FAILED'} (tolerance {report.tolerance:.0e})")
    return lines


@tune_cmd.handler
def tune_gains(args, profile):
    """Print gains, poles and residuals."""
    gains, pole_set, report = tune(PoleSpec(args.ts1, args.zeta1), PoleSpec(args.ts2, args.zeta2),
                                   args.settle_factor)
    print('\n'.join(format_tuning(gains, pole_set, report)))
    return EXIT_OK if report.passed else EXIT_FAILURE
