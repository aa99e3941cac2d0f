"""Acceptance verification."""
from flatgrid.acceptance import run_acceptance
from flatgrid.commands import EXIT_FAILURE, EXIT_OK, Command, add_run_overrides, run_overrides
from flatgrid.runfile import default_run_config, load_run_config

verify_cmd = Command('verify', 'Run the acceptance checks and report pass/fail per criterion')


@verify_cmd.arguments
def verify_arguments(parser):
    parser.add_argument('--config', default=None,
                        help='Run file to verify instead of the built-in weak-grid test')
    parser.add_argument('--skip-convergence', action='store_true',
                        help='Skip the half-step rerun')
    add_run_overrides(parser)


@verify_cmd.handler
def verify(args, profile):
    overrides = run_overrides(args)
    if args.config:
        run = load_run_config(args.config, profile, **overrides)
    else:
        run = default_run_config(profile, **overrides)

    results = run_acceptance(run, include_convergence=not args.skip_convergence)
    width = max(len(r.name) for r in results)
    for result in results:
        verdict = 'PASS' if result.passed else 'FAIL'
        print(f'{verdict}  {result.name:<{width}}  {result.message}')
    failed = sum(not r.passed for r in results)
    print(f'{len(results) - failed}/{len(results)} criteria passed')
    return EXIT_OK if failed == 0 else EXIT_FAILURE
