#!/usr/bin/env python3
"""
Lagrangian vacuum-flow simulator and diagnostics.
Main entry point for the application.

Usage:
    python main.py simulate --config run.json
    python main.py verify
    python main.py energy --checkpoint output/final.json --order 4
    python main.py mms --config mms.json
    python main.py limit --config limit.json --workers 4
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from cli_io import (
    RunConfig,
    load_config,
    output_directory,
    read_checkpoint,
    to_solver_config,
    write_checkpoint,
    write_energy_csv,
    write_run_header,
)
from config import SHOW_PROGRESS, VERBOSE
from console import Console
from dynamics import assemble_coefficients
from energy_diag import energy_functionals
from errors import ConfigError, SimulationAbortedError, VacuumFlowError
from kinematics import compute_deformation
from manufactured import mms_study
from profiles import list_profiles
from solver import limit_sweep, run
from verification import CHECKS, list_checks, run_checks
from vorticity import assemble_curl_structure
from weight import CUSTOM_PROFILE, make_weight

logger = logging.getLogger(__name__)

MMS_ORDER_RANGE = (1.7, 2.3)


class CommandFailed(Exception):
    """A command ran but its acceptance test failed (exit code 1)."""


def configure_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1 or VERBOSE:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load(path: Optional[str], **defaults) -> RunConfig:
    if path is None:
        return load_config(dict(defaults))
    return load_config(Path(path))


def cmd_simulate(args, console: Console) -> None:
    run_config = _load(args.config)
    solver_config = to_solver_config(run_config, show_progress=args.progress)
    out = output_directory(run_config)

    print(f"\n=== Simulation ===")
    print(f"Grid: {solver_config.grid.shape}")
    print(f"gamma = {solver_config.params.gamma}, eps = {solver_config.params.eps}")
    print(f"Weight profile: {solver_config.profile}")
    print(f"t_end: {solver_config.t_end}")
    print(f"Output: {out}")

    try:
        traj = run(solver_config)
    except SimulationAbortedError as e:
        path = write_checkpoint(out / "aborted", e.state, solver_config.grid, solver_config.params,
                                extra={"reason": e.reason, "seed": args.seed,
                                       "weight": {"profile": solver_config.profile,
                                                  "expression": solver_config.weight_expression}})
        print(f"Last valid state written to {path}", file=sys.stderr)
        raise

    csv_path = write_energy_csv(out / "energy.csv", traj.rows())
    write_run_header(out / "run.json", run_config,
                     extra={"seed": args.seed, "derived": traj.header, "steps": traj.steps,
                            "events": [vars(e) for e in traj.events]})
    checkpoint = write_checkpoint(out / "final", traj.final_state, traj.grid, traj.params,
                                  extra={"weight": traj.weight.header(), "seed": args.seed})

    last = traj.monitor[-1]
    print(f"\n=== Simulation Complete ===")
    print(f"Steps: {traj.steps}, stored states: {len(traj)}")
    print(f"Energy drift: {last.energy_drift:.3e}")
    print(f"g0 defect: {last.g0_defect:.3e}")
    print(f"min J: {last.min_J:.6f}")
    print(console.events(traj.events))
    print(f"Energy log: {csv_path}")
    print(f"Checkpoint: {checkpoint}")


def cmd_verify(args, console: Console) -> None:
    if args.list:
        for name in list_checks():
            print(f"{name:26s} {CHECKS[name][0]}")
        return
    names = args.only
    if names is None and args.config is not None:
        names = _load(args.config).checks
    try:
        results = run_checks(names)
    except ValueError as e:
        raise ConfigError(str(e), [("--only", str(e))]) from e
    print(console.check_table(results))
    if not all(r.passed for r in results):
        raise CommandFailed(f"{sum(not r.passed for r in results)} check(s) failed")


def _checkpoint_weight(checkpoint):
    description = checkpoint.header.get("extra", {}).get("weight", {})
    profile = description.get("profile")
    if profile in list_profiles():
        return make_weight(profile, checkpoint.grid)
    if description.get("expression"):
        return make_weight(CUSTOM_PROFILE, checkpoint.grid, description["expression"])
    logger.warning("checkpoint carries no weight; using the default profile")
    return make_weight(grid=checkpoint.grid)


def cmd_energy(args, console: Console) -> None:
    checkpoint = read_checkpoint(args.checkpoint)
    state, grid, params = checkpoint.state, checkpoint.grid, checkpoint.params
    weight = _checkpoint_weight(checkpoint)
    defo = compute_deformation(state, grid)
    coeffs = assemble_coefficients(state, defo, weight, params)
    cs = assemble_curl_structure(state, defo, coeffs, params, with_X=False)
    report = energy_functionals(state, defo, coeffs, cs, weight, grid, params, order=args.order)

    print(f"\n=== Energy Report ===")
    print(f"Checkpoint: {args.checkpoint}")
    print(f"t = {report.time:.6g}, order N = {report.order} (estimate order {report.estimate_order})")
    print(console.energy_table(report))


def cmd_mms(args, console: Console) -> None:
    run_config = _load(args.config, preset="mms-sine", t_end=1.0)
    if args.grids:
        run_config = run_config.model_copy(update={"mms_grids": args.grids})
    solver_config = to_solver_config(run_config, show_progress=False)
    if solver_config.exact is None:
        raise ConfigError("mms needs an exact solution", [("exact", "missing (or set a mms preset)")])

    print(f"\n=== Manufactured Solution Study ===")
    print(f"eps = {solver_config.params.eps}, grids {run_config.mms_grids}, t_end = {solver_config.t_end}")
    result = mms_study(solver_config, run_config.mms_grids)
    print(console.mms_table(result, *MMS_ORDER_RANGE))
    low, high = MMS_ORDER_RANGE
    if not low <= result.order <= high:
        raise CommandFailed(f"Observed order {result.order:.3f} outside [{low}, {high}]")


def cmd_limit(args, console: Console) -> None:
    run_config = _load(args.config, preset="outflow")
    eps_list = args.eps or run_config.eps_list
    workers = args.workers or run_config.workers
    solver_config = to_solver_config(run_config, show_progress=args.progress)

    print(f"\n=== Non-relativistic Limit Sweep ===")
    print(f"eps: {eps_list}, workers: {workers}")
    result = limit_sweep(solver_config, eps_list, workers=workers)
    print(console.limit_table(result))
    if result.reference_aborted:
        raise CommandFailed(f"Reference run at eps = 0 aborted: {result.reference_reason}")
    if not result.monotone:
        raise CommandFailed("Differences to eps = 0 do not decrease monotonically")


COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "energy": cmd_energy,
    "mms": cmd_mms,
    "limit": cmd_limit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Simulate and diagnose relativistic gas flows with a physical vacuum boundary",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s simulate --config run.json
  %(prog)s verify --only piola-order hardy-family
  %(prog)s energy --checkpoint output/final.json --order 4
  %(prog)s mms --config mms.json --grids 64 128 256
  %(prog)s limit --eps 0.4 0.2 0.1 0.05 --workers 4
        """
    )
    parser.add_argument('-v', '--verbose', dest='verbose', action='count', default=0,
                        help='Log INFO (-v) or DEBUG (-vv) messages')
    parser.add_argument('--seed', dest='seed', type=int, default=None,
                        help='Recorded in output headers (no stochastic components)')
    parser.add_argument('--no-progress', dest='progress', action='store_false', default=SHOW_PROGRESS,
                        help='Disable progress bars')
    parser.add_argument('--no-color', dest='color', action='store_false',
                        help='Disable colored tables')

    sub = parser.add_subparsers(dest='command', required=True)

    simulate = sub.add_parser('simulate', help='Run the planar solver and write logs')
    simulate.add_argument('--config', dest='config', default=None, help='JSON run configuration')

    verify = sub.add_parser('verify', help='Run the invariant and property suite')
    verify.add_argument('--only', dest='only', nargs='+', default=None, metavar='NAME',
                        help='Run only these checks')
    verify.add_argument('--list', dest='list', action='store_true', help='List the checks')
    verify.add_argument('--config', dest='config', default=None,
                        help='JSON run configuration (its "checks" list selects checks)')

    energy = sub.add_parser('energy', help='Energy report of a checkpoint')
    energy.add_argument('--checkpoint', dest='checkpoint', required=True, help='Checkpoint header')
    energy.add_argument('--order', dest='order', type=int, default=None,
                        help='Diagnostic order N (default: depends on alpha)')

    mms = sub.add_parser('mms', help='Manufactured-solution convergence study')
    mms.add_argument('--config', dest='config', default=None, help='JSON run configuration')
    mms.add_argument('--grids', dest='grids', type=int, nargs='+', default=None,
                     help='Normal node counts n3')

    limit = sub.add_parser('limit', help='Sweep eps towards the non-relativistic limit')
    limit.add_argument('--config', dest='config', default=None, help='JSON run configuration')
    limit.add_argument('--eps', dest='eps', type=float, nargs='+', default=None,
                       help='Inverse light speeds to sweep')
    limit.add_argument('--workers', dest='workers', type=int, default=None,
                       help='Concurrent sweep members')
    return parser


def cli(argv: Optional[List[str]] = None) -> int:
    """
    Run one command.

    Returns:
        0 on success, 1 on a failed check or a simulation error,
        2 on usage or configuration errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.verbose)
    console = Console(use_color=args.color)
    try:
        COMMANDS[args.command](args, console)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except CommandFailed as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except (VacuumFlowError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    return 0


def main():
    """
    Main entry point.
    """
    sys.exit(cli(sys.argv[1:]))


if __name__ == '__main__':
    main()
