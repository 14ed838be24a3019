"""
Shared argparse utilities for the python_hardyverify subcommands.

The module defines argument groups that can be added to any ArgumentParser:
    - Common arguments: debug, verbose, logging
    - Configuration file argument
    - Model and statement parameters (manifold, N, lambda, alpha, beta, j, modes)
    - Test-function arguments (support, seed, n-knots)
    - Quadrature tolerances
    - Output arguments
    - Refinement-ladder arguments of the sharpness command

Every parameter defaults to None: an option left out on the command line
does not override the value read from --config. The `dest` of each option
is the RunConfig attribute it sets.

Typical Usage:
    from .argparse_utils import add_common_args, add_model_args

    parser = argparse.ArgumentParser()
    add_model_args(parser)
    add_common_args(parser)
    args = parser.parse_args()
"""

import argparse
from typing import Optional

#: option dests that are RunConfig attributes
CONFIG_DESTS = (
    "target",
    "manifold",
    "N",
    "lam",
    "alpha",
    "beta",
    "j",
    "modes",
    "support",
    "seed",
    "n_knots",
    "pair",
    "kappa",
    "constant",
    "rel_tol",
    "abs_tol",
    "max_subdivisions",
    "quad_nodes",
    "grading_exponent",
    "output",
    "format",
    "sharpness_target",
    "mode",
    "levels",
    "rmin",
    "rmax",
    "nodes",
    "threads",
    "strict",
)


def degree_list(text: str) -> list:
    """
    argparse type for comma-separated harmonic degrees.

    Example:
        >>> degree_list("1,2,3")
        [1, 2, 3]
    """
    try:
        degrees = [int(item) for item in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expect comma-separated integers like 1,2,3, got {text!r}") from None
    return degrees


def radial_interval(text: str) -> list:
    """
    argparse type for a radial interval S0:S1.

    Example:
        >>> radial_interval("0.5:4")
        [0.5, 4.0]
    """
    parts = text.split(":")
    try:
        if len(parts) != 2:
            raise ValueError(text)
        interval = [float(part) for part in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expect S0:S1 like 1:3, got {text!r}") from None
    return interval


def add_common_args(parser: argparse.ArgumentParser) -> None:
    """
    Add common debugging and logging arguments to an ArgumentParser.

    Adds:
        --debug: Activate debug mode (maximum verbosity)
        --verbose: Activate verbose mode (detailed output)
        --log: Save log output to specified file

    Args:
        parser: ArgumentParser instance to add arguments to

    Example:
        >>> parser = argparse.ArgumentParser()
        >>> add_common_args(parser)
        >>> args = parser.parse_args(['--debug', '--log', 'output.log'])
        >>> args.debug
        True
    """
    parser.add_argument("--debug", help="activate debug mode (maximum verbosity)", action="store_true")
    parser.add_argument("--verbose", help="activate verbose mode (detailed output)", action="store_true")
    parser.add_argument("--log", help="save log output to specified file", type=str, metavar="LOGFILE")


def add_config_arg(parser: argparse.ArgumentParser) -> None:
    """
    Add the YAML configuration file argument.

    Adds:
        --config: YAML file with parameters/quadrature/output/grids sections

    Example:
        >>> parser = argparse.ArgumentParser()
        >>> add_config_arg(parser)
        >>> parser.parse_args(['--config', 'sweep.yaml']).config
        'sweep.yaml'
    """
    parser.add_argument("--config", help="load parameters from a YAML file (flags override it)", type=str, metavar="YAML")


def add_model_args(parser: argparse.ArgumentParser, manifolds: Optional[list] = None) -> None:
    """
    Add model-manifold arguments.

    Adds:
        --manifold: euclidean or hyperbolic
        --N: dimension (>= 2)
        --kappa: curvature scale of the hyperbolic model, psi = sinh(kappa r)/kappa

    Args:
        parser: ArgumentParser instance to add arguments to
        manifolds: allowed manifold names (see geometry.get_allowed_manifolds)

    Example:
        >>> parser = argparse.ArgumentParser()
        >>> add_model_args(parser, ['euclidean', 'hyperbolic'])
        >>> args = parser.parse_args(['--manifold', 'euclidean', '--N', '3'])
        >>> (args.manifold, args.N)
        ('euclidean', 3)
    """
    parser.add_argument("--manifold", help="model manifold", type=str, choices=manifolds, default=None)
    parser.add_argument("--N", help="dimension (>= 2)", type=int, dest="N", default=None)
    parser.add_argument("--kappa", help="hyperbolic curvature scale (psi = sinh(kappa r)/kappa)", type=float, default=None)


def add_parameter_args(parser: argparse.ArgumentParser) -> None:
    """
    Add the parameters of the statements.

    Adds:
        --lambda: spectral parameter in [0, ((N-1)/2)^2] (dest lam)
        --alpha, --beta: weight exponents
        --j: subspace index (H_j holds the degrees n >= j+1)
        --modes: comma-separated harmonic degrees of the test function (default j+1)

    Example:
        >>> parser = argparse.ArgumentParser()
        >>> add_parameter_args(parser)
        >>> args = parser.parse_args(['--lambda', '0.5', '--modes', '1,2'])
        >>> (args.lam, args.modes)
        (0.5, [1, 2])
    """
    parser.add_argument("--lambda", help="spectral parameter lambda", type=float, dest="lam", default=None)
    parser.add_argument("--alpha", help="weight exponent alpha", type=float, default=None)
    parser.add_argument("--beta", help="weight exponent beta", type=float, default=None)
    parser.add_argument("--j", help="subspace index j >= -1", type=int, dest="j", default=None)
    parser.add_argument("--modes", help="harmonic degrees of the test function, e.g. 1,2,3", type=degree_list, default=None)
    parser.add_argument("--pair", help="catalog Bessel pair (thm21/model27)", type=str, default=None)
    parser.add_argument("--constant", help="constant c of the hardy pair W = c/r^2 (default (N-2)^2/4)", type=float, default=None)


def add_testfunction_args(parser: argparse.ArgumentParser) -> None:
    """
    Add the random test-function arguments.

    Adds:
        --support S0:S1: radial support of every profile
        --seed: seed of the first profile (mode i uses seed + i)
        --n-knots: Chebyshev coefficients per profile

    Example:
        >>> parser = argparse.ArgumentParser()
        >>> add_testfunction_args(parser)
        >>> parser.parse_args(['--support', '0.5:4', '--seed', '7']).support
        [0.5, 4.0]
    """
    parser.add_argument("--support", help="radial support of the profiles, e.g. 1:3", type=radial_interval, metavar="S0:S1", default=None)
    parser.add_argument("--seed", help="random seed", type=int, default=None)
    parser.add_argument("--n-knots", help="Chebyshev coefficients per profile", type=int, dest="n_knots", default=None)


def add_quadrature_args(parser: argparse.ArgumentParser) -> None:
    """
    Add quadrature tolerances.

    Adds:
        --rel-tol, --abs-tol: tolerances of the adaptive rule
        --max-subdivisions: panel budget
        --quad-nodes: Gauss-Legendre nodes per panel
        --grading-exponent: grading of the initial panels toward the left end

    Example:
        >>> parser = argparse.ArgumentParser()
        >>> add_quadrature_args(parser)
        >>> parser.parse_args(['--rel-tol', '1e-8']).rel_tol
        1e-08
    """
    parser.add_argument("--rel-tol", help="relative quadrature tolerance", type=float, dest="rel_tol", default=None)
    parser.add_argument("--abs-tol", help="absolute quadrature tolerance", type=float, dest="abs_tol", default=None)
    parser.add_argument("--max-subdivisions", help="maximal number of panels", type=int, dest="max_subdivisions", default=None)
    parser.add_argument("--quad-nodes", help="Gauss-Legendre nodes per panel", type=int, dest="quad_nodes", default=None)
    parser.add_argument("--grading-exponent", help="grading of the initial panels", type=float, dest="grading_exponent", default=None)


def add_output_args(parser: argparse.ArgumentParser, formats: Optional[list] = None) -> None:
    """
    Add output arguments.

    Adds:
        --output: output file (stdout if omitted); never overwritten
        --format: json or csv

    Example:
        >>> parser = argparse.ArgumentParser()
        >>> add_output_args(parser, ['json', 'csv'])
        >>> parser.parse_args(['--format', 'csv']).format
        'csv'
    """
    parser.add_argument("--output", help="output file (default: stdout)", type=str, default=None)
    parser.add_argument("--format", help="output format", type=str, choices=formats, default=None)


def add_ladder_args(parser: argparse.ArgumentParser, targets: Optional[list] = None) -> None:
    """
    Add the refinement-ladder arguments of the sharpness command.

    Adds:
        --target: sharpness target (dest sharpness_target)
        --mode: harmonic degree (h0-hardy: all of 1, 2, 3 if omitted)
        --rmin, --rmax: truncation radii (per-target defaults)
        --levels: number of ladder levels
        --nodes: elements of level 0 (doubled per level)

    Example:
        >>> parser = argparse.ArgumentParser()
        >>> add_ladder_args(parser, ['hardy', 'poincare'])
        >>> args = parser.parse_args(['--target', 'hardy', '--levels', '3'])
        >>> (args.sharpness_target, args.levels)
        ('hardy', 3)
    """
    parser.add_argument("--target", help="sharpness target", type=str, choices=targets, dest="sharpness_target", default=None)
    parser.add_argument("--mode", help="harmonic degree n", type=int, default=None)
    parser.add_argument("--rmin", help="inner truncation radius", type=float, default=None)
    parser.add_argument("--rmax", help="outer truncation radius", type=float, default=None)
    parser.add_argument("--levels", help="number of refinement levels", type=int, default=None)
    parser.add_argument("--nodes", help="elements of the coarsest level", type=int, default=None)


def add_threads_arg(parser: argparse.ArgumentParser) -> None:
    """
    Add the worker-pool size (capped by the HYP_THREADS environment variable).

    Example:
        >>> parser = argparse.ArgumentParser()
        >>> add_threads_arg(parser)
        >>> parser.parse_args(['--threads', '4']).threads
        4
    """
    parser.add_argument("--threads", help="worker threads (capped by HYP_THREADS)", type=int, default=None)


def add_strict_arg(parser: argparse.ArgumentParser) -> None:
    """
    Add --strict: refuse to write a report when quadrature or inverse
    iteration did not converge (exit 3, nothing on stdout).
    """
    parser.add_argument("--strict", help="no report when a computation did not converge", action="store_true", default=None)


def config_overrides(args: argparse.Namespace) -> dict:
    """RunConfig attributes given on the command line"""
    values = vars(args)
    return {dest: values[dest] for dest in CONFIG_DESTS if values.get(dest) is not None}
