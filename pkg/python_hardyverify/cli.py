"""
Command-Line Interface for python_hardyverify.

Subcommands:
    verify      evaluate one identity or inequality on a seeded random test function
    sharpness   estimate a best constant on a refinement ladder
    sweep       run `verify` over the Cartesian product of parameter grids
    bessel      `bessel validate`: ODE residual and positivity of a catalog pair

Typical Usage:
    # improved Poincare-Hardy subspace inequality on H^3
    python_hardyverify verify --target thm21 --N 3 --j 0 --modes 1 --lambda 0 --seed 1

    # CKN identity on R^3
    python_hardyverify verify --target ckn26 --manifold euclidean --N 3 --alpha 0 --beta 2

    # Hardy constant ladder
    python_hardyverify sharpness --target hardy --N 3 --levels 4

    # file-driven sweep
    python_hardyverify sweep --config sweep.yaml --output sweep.csv

Exit Codes:
    0: every verdict is pass or measured
    1: at least one fail verdict (bessel validate: residual or positivity check failed)
    2: invalid configuration; the diagnostic names the offending field
    3: quadrature or inverse iteration did not converge (with --strict no
       report is written)
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .argparse_utils import (
    add_common_args,
    add_config_arg,
    add_ladder_args,
    add_model_args,
    add_output_args,
    add_parameter_args,
    add_quadrature_args,
    add_strict_arg,
    add_testfunction_args,
    add_threads_arg,
    config_overrides,
)
from .besselpairs import get_allowed_pairs, make_pair, validate_pair
from .config import RunConfig, get_allowed_formats
from .errors import ConvergenceError, HardyVerifyError, IntegrandError, ValidationError
from .functionals import power_weight
from .geometry import get_allowed_manifolds, make_manifold, scaled_hyperbolic
from .logging_config import get_logger, setup_logging
from .profiles import random_testfunction
from .sharpness import estimate_constant, make_target
from .sharpness import get_allowed_targets as get_allowed_sharpness_targets
from .utils.files import check_output, to_csv, to_json, write_output
from .utils.lists import grid_product
from .verifier import (
    VerificationReport,
    get_allowed_targets,
    verify_cor23,
    verify_cor24,
    verify_ckn,
    verify_ckn_remainder,
    verify_eq12,
    verify_model,
    verify_model_identity,
    verify_thm21,
    verify_thm22,
)

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

PAIR_TOL = 1.0e-8

REPORT_COLUMNS = ["target", "kind", "verdict", "lhs", "rhs", "gap_or_residual", "scale", "quadrature_converged"]
LADDER_COLUMNS = ["level", "nodes", "value"]

VERIFY_EPILOG = f"CSV columns: {','.join(REPORT_COLUMNS)}"
SWEEP_EPILOG = f"CSV columns: <grid keys in declared order>,{','.join(REPORT_COLUMNS)}"
SHARPNESS_EPILOG = f"CSV columns: {','.join(LADDER_COLUMNS)}"


def build_manifold(config: RunConfig):
    """manifold of the config; hyperbolic with kappa != 1 is the scaled model"""
    if config.manifold == "hyperbolic" and config.kappa != 1.0:
        return scaled_hyperbolic(config.N, config.kappa)
    return make_manifold(config.manifold, config.N)


def _pair(config: RunConfig):
    c = config.constant if config.constant is not None else (config.N - 2) ** 2 / 4.0
    return make_pair(config.pair, config.N, lam=config.lam, alpha=config.alpha, c=c)


def run_verify(config: RunConfig) -> VerificationReport:
    """one verification on random_testfunction(config)"""
    M = build_manifold(config)
    u = random_testfunction(M, config.mode_list, config.support, config.seed, config.j, config.n_knots)
    spec = config.quadrature_spec()
    V = power_weight(-config.alpha)
    target = config.target
    logger.info(f"verify {target}: {M!r} modes={u.modes} j={config.j} seed={config.seed}")
    if target == "eq12":
        return verify_eq12(u, config.lam, spec)
    if target == "thm21":
        return verify_thm21(u, _pair(config), config.j, spec)
    if target == "thm22":
        return verify_thm22(u, V, config.j, spec)
    if target == "cor23":
        return verify_cor23(u, config.lam, config.j, spec)
    if target == "cor24":
        return verify_cor24(u, config.alpha, config.j, spec)
    if target == "ckn25":
        return verify_ckn(u, config.alpha, config.beta, spec)
    if target == "ckn26":
        return verify_ckn_remainder(u, config.alpha, config.beta, spec)
    if target == "model27":
        return verify_model(u, _pair(config), config.j, spec)
    if target == "model28":
        return verify_model_identity(u, V, config.j, spec)
    raise ValidationError(f"unknown target {target!r}, expect one of {get_allowed_targets()}", field="target")


def _exit_code(reports: Sequence[VerificationReport]) -> int:
    if any(not r.quadrature_converged for r in reports):
        return EXIT_NOT_CONVERGED
    if any(r.verdict == "fail" for r in reports):
        return EXIT_FAIL
    return EXIT_OK


def _report_row(report: VerificationReport) -> list:
    return [getattr(report, column) for column in REPORT_COLUMNS]


def worker_count(config: RunConfig) -> int:
    """
    config.threads (default: cpu count), capped by HYP_THREADS.

    Raises:
        ValidationError: HYP_THREADS is not a positive integer
    """
    count = config.threads or os.cpu_count() or 1
    cap = os.environ.get("HYP_THREADS")
    if cap is not None:
        try:
            cap_value = int(cap)
        except ValueError:
            raise ValidationError(f"must be a positive integer, got {cap!r}", field="HYP_THREADS")
        if cap_value < 1:
            raise ValidationError(f"must be a positive integer, got {cap!r}", field="HYP_THREADS")
        count = min(count, cap_value)
    return count


def run_sweep(config: RunConfig) -> Tuple[List[Tuple[Tuple[str, object], ...]], List[VerificationReport]]:
    """
    verify at every grid tuple; results are kept in grid order whatever the
    completion order of the workers
    """
    points = grid_product(config.grids)
    configs = [config.with_grid_values(dict(point)) for point in points]
    workers = worker_count(config)
    logger.info(f"sweep {config.target}: {len(points)} points on {workers} workers")
    if workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_verify, configs))
    else:
        reports = [run_verify(c) for c in configs]
    return points, reports


def run(config: RunConfig) -> Tuple[int, str]:
    """
    Validate and execute a RunConfig.

    Returns:
        (exit code, serialized output)

    Raises:
        ConvergenceError: config.strict and a computation did not converge
    """
    code, text = _dispatch(config)
    if config.strict and code == EXIT_NOT_CONVERGED:
        raise ConvergenceError(f"{config.command}: quadrature or inverse iteration did not converge")
    return code, text


def _dispatch(config: RunConfig) -> Tuple[int, str]:
    config.validate()
    check_output(config.output)
    fmt = config.output_format
    if config.command == "verify":
        report = run_verify(config)
        if fmt == "csv":
            text = to_csv(REPORT_COLUMNS, [_report_row(report)])
        else:
            text = to_json(report.to_dict())
        return _exit_code([report]), text

    if config.command == "sweep":
        points, reports = run_sweep(config)
        keys = list(config.grids.keys())
        if fmt == "csv":
            rows = [[v for _, v in point] + _report_row(r) for point, r in zip(points, reports)]
            text = to_csv(keys + REPORT_COLUMNS, rows)
        else:
            text = to_json([{"point": dict(point), "report": r.to_dict()} for point, r in zip(points, reports)])
        return _exit_code(reports), text

    if config.command == "sharpness":
        target = make_target(
            config.sharpness_target,
            config.N,
            mode=config.mode,
            alpha=config.alpha,
            rmin=config.rmin,
            rmax=config.rmax,
            nodes=config.nodes,
        )
        estimate = estimate_constant(target, config.levels, threads=min(worker_count(config), config.levels))
        if fmt == "csv":
            text = to_csv(LADDER_COLUMNS, estimate.rows())
        else:
            text = to_json(estimate.to_dict())
        return (EXIT_OK if estimate.converged else EXIT_NOT_CONVERGED), text

    # bessel validate
    pair = _pair(config)
    lo = 1.0e-2 if config.rmin is None else config.rmin
    hi = 20.0 if config.rmax is None else config.rmax
    if not (0.0 < lo < hi):
        raise ValidationError(f"need 0 < rmin < rmax, got ({lo}, {hi})", field="rmin")
    if pair.has_solution():
        result = validate_pair(pair, np.geomspace(lo, hi, config.nodes))
        ok = result.positive and result.residual <= PAIR_TOL
        checks = result.to_dict()
    else:
        logger.warning(f"pair {pair.name} {pair.parameters} has no positive solution")
        ok = False
        checks = {"residual": None, "positive": False, "nonpositive_at": None, "worst_at": None}
    document = {**pair.to_dict(), **checks, "tolerance": PAIR_TOL, "verdict": "pass" if ok else "fail"}
    if fmt == "csv":
        columns = list(document.keys())
        text = to_csv(columns, [[document[c] for c in columns]])
    else:
        text = to_json(document)
    return (EXIT_OK if ok else EXIT_FAIL), text


def build_parser() -> argparse.ArgumentParser:
    """argument parser with the verify/sharpness/sweep/bessel subcommands"""
    parser = argparse.ArgumentParser(
        prog="python_hardyverify",
        description="numerical verification of Hardy, Poincare-Hardy and CKN inequalities on model manifolds",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub):
        add_config_arg(sub)
        add_model_args(sub, get_allowed_manifolds())
        add_output_args(sub, get_allowed_formats())
        add_strict_arg(sub)
        add_common_args(sub)

    verify = commands.add_parser("verify", help="verify one statement", epilog=VERIFY_EPILOG)
    verify.add_argument("--target", help="statement to verify", type=str, choices=get_allowed_targets(), default=None)
    add_parameter_args(verify)
    add_testfunction_args(verify)
    add_quadrature_args(verify)
    common(verify)

    sweep = commands.add_parser("sweep", help="verify over parameter grids (grids come from --config)", epilog=SWEEP_EPILOG)
    sweep.add_argument("--target", help="statement to verify", type=str, choices=get_allowed_targets(), default=None)
    add_parameter_args(sweep)
    add_testfunction_args(sweep)
    add_quadrature_args(sweep)
    add_threads_arg(sweep)
    common(sweep)

    sharpness = commands.add_parser("sharpness", help="estimate a best constant", epilog=SHARPNESS_EPILOG)
    add_ladder_args(sharpness, get_allowed_sharpness_targets())
    sharpness.add_argument("--alpha", help="weight exponent alpha (ckn)", type=float, default=None)
    add_threads_arg(sharpness)
    common(sharpness)

    bessel = commands.add_parser("bessel", help="Bessel pair utilities")
    bessel.add_argument("action", choices=["validate"], help="validate: ODE residual and positivity on a geometric grid")
    bessel.add_argument("--pair", help="catalog pair", type=str, choices=get_allowed_pairs(), default=None)
    bessel.add_argument("--lambda", help="spectral parameter (poincare pair)", type=float, dest="lam", default=None)
    bessel.add_argument("--alpha", help="exponent (power pair)", type=float, default=None)
    bessel.add_argument("--constant", help="c of the hardy pair (default (N-2)^2/4)", type=float, default=None)
    bessel.add_argument("--rmin", help="first grid radius (default 1e-2)", type=float, default=None)
    bessel.add_argument("--rmax", help="last grid radius (default 20)", type=float, default=None)
    bessel.add_argument("--nodes", help="grid points (default 200)", type=int, default=None)
    common(bessel)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for the python_hardyverify command-line interface.

    Builds the RunConfig (YAML file first, then command-line flags),
    validates it, runs the command and writes the output to --output or
    stdout. Output files are never overwritten.

    Returns:
        int: exit code (see module docstring)
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logging(verbose=args.verbose, debug=args.debug, log_file=args.log)
    logger.debug(f"Command-line arguments: {args}")

    try:
        config = RunConfig.from_yaml(args.config) if args.config else RunConfig()
        config = config.merged({"command": args.command, **config_overrides(args)})
        code, text = run(config)
        write_output(text, config.output)
    except ValidationError as e:
        logger.error(f"invalid configuration: {e}")
        return EXIT_INVALID
    except FileExistsError as e:
        logger.error(f"output: {e}")
        return EXIT_INVALID
    except IntegrandError as e:
        logger.error(f"integration failed: {e}")
        return EXIT_NOT_CONVERGED
    except ConvergenceError as e:
        logger.error(f"strict: {e}")
        return EXIT_NOT_CONVERGED
    except HardyVerifyError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAIL

    logger.info(f"{config.command} complete (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
