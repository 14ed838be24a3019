"""
Best-constant estimation by generalized eigenproblems.

A RayleighProblem is the single-mode quotient

    int V (a'^2 + lambda_n a^2 / psi^2) psi^(N-1) dr + int P a^2 psi^(N-1) dr
    -------------------------------------------------------------------------
                      int W_den a^2 psi^(N-1) dr

on a truncated interval (r_min, R) with Dirichlet conditions at both ends.
assemble_forms() discretizes numerator and denominator with piecewise-linear
elements into a symmetric tridiagonal pencil (A, B); smallest_eigenvalue()
returns its smallest eigenvalue by inverse iteration. estimate_constant()
runs a refinement ladder of a SharpnessTarget and extrapolates.

Targets:
    hardy       R^N, V = 1, W_den = r^-2              -> (N-2)^2/4 + lambda_n
    ckn         R^N, V = r^-alpha, W_den = r^-alpha-2 -> ((N-alpha-2)/2)^2 + lambda_n
    poincare    H^N, V = 1, W_den = 1                 -> ((N-1)/2)^2
    h0-hardy    H^N, V = 1, W_den = r^-2, n >= 1      -> >= N^2/4
    string      R^N on (0, 1), V = 1, W_den = 1       -> pi^2 (N = 3, n = 0)
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded, solve_banded

from . import functionals as fn
from .errors import ValidationError
from .geometry import ModelManifold, euclidean, hyperbolic, mode_eigenvalue, validate_degree
from .logging_config import get_logger
from .mesh.radial import check_mesh, graded_mesh
from .profiles import RadialProfile, make_power_trial, make_testfunction
from .quadrature import QuadratureSpec, gauss_legendre

logger = get_logger(__name__)

EIGEN_TOL = 1.0e-10
MAX_ITERATIONS = 500
#: relative distance of a re-shift below the current Rayleigh quotient
RESHIFT = 1.0e-2
#: consecutive-change ratio above which the iteration counts as stagnating
STAGNATION = 0.1
LADDER_NOISE = 1.0e-9

TRIAL_EPS = (0.1, 0.05, 0.02, 0.01)

TargetNames = {
    "hardy": "Euclidean Hardy constant (N-2)^2/4",
    "ckn": "weighted Hardy constant ((N-alpha-2)/2)^2 on beta = alpha + 2",
    "poincare": "bottom of the spectrum of H^N, ((N-1)/2)^2",
    "h0-hardy": "Hardy constant on H_0 of H^N, N^2/4 from below",
    "string": "fixed-fixed string, pi^2",
}


def get_allowed_targets() -> list:
    """
    return sharpness targets accepted by the CLI
    """
    return list(TargetNames.keys())


@dataclass(eq=False)
class RayleighProblem:
    """
    Single-mode Rayleigh quotient on a radial mesh.

    Attributes:
        manifold: model manifold
        mode: spherical-harmonic degree n
        V: numerator weight
        denominator: W_den
        mesh: strictly increasing nodes; Dirichlet at mesh[0] and mesh[-1]
        potential: optional zeroth-order numerator weight P
        element_rule: Gauss-Legendre points per element
    """

    manifold: ModelManifold
    mode: int
    V: fn.Weight
    denominator: fn.Weight
    mesh: np.ndarray
    potential: Optional[fn.Weight] = None
    element_rule: int = 4

    def __post_init__(self):
        self.mode = validate_degree(self.mode)
        self.mesh = check_mesh(self.mesh)
        if self.element_rule < 1:
            raise ValidationError(f"element_rule must be >= 1, got {self.element_rule}", field="element_rule")

    @property
    def domain(self) -> Tuple[float, float]:
        return float(self.mesh[0]), float(self.mesh[-1])

    @property
    def size(self) -> int:
        """number of unknowns (interior nodes)"""
        return self.mesh.size - 2


@dataclass(frozen=True)
class BandedForm:
    """Symmetric tridiagonal matrix by its diagonal and first off-diagonal."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray

    @property
    def size(self) -> int:
        return self.diagonal.size

    def toarray(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)

    def upper_banded(self) -> np.ndarray:
        """(2, m) upper form for scipy.linalg.cholesky_banded"""
        ab = np.zeros((2, self.size))
        ab[0, 1:] = self.offdiagonal
        ab[1, :] = self.diagonal
        return ab

    def general_banded(self) -> np.ndarray:
        """(3, m) form for scipy.linalg.solve_banded((1, 1), ...)"""
        ab = np.zeros((3, self.size))
        ab[0, 1:] = self.offdiagonal
        ab[1, :] = self.diagonal
        ab[2, :-1] = self.offdiagonal
        return ab

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diagonal * x
        y[:-1] += self.offdiagonal * x[1:]
        y[1:] += self.offdiagonal * x[:-1]
        return y

    def scaled(self, d: np.ndarray) -> "BandedForm":
        """D M D for D = diag(d)"""
        return BandedForm(self.diagonal * d * d, self.offdiagonal * d[:-1] * d[1:])

    def minus(self, sigma: float, other: "BandedForm") -> "BandedForm":
        """self - sigma * other"""
        return BandedForm(self.diagonal - sigma * other.diagonal, self.offdiagonal - sigma * other.offdiagonal)


def assemble_forms(p: RayleighProblem) -> Tuple[BandedForm, BandedForm]:
    """
    Piecewise-linear Galerkin matrices of numerator (A) and denominator (B).

    Element integrals use p.element_rule Gauss points; rows and columns of
    the two boundary nodes are dropped (Dirichlet). Both matrices are stored
    by their upper band, so they are symmetric by construction.

    Raises:
        ValidationError: non-finite entries, a non-positive B diagonal, or
            B not positive definite (field "denominator")
    """
    M = p.manifold
    N = M.dimension
    r = p.mesh
    lo, hi = r[:-1], r[1:]
    h = hi - lo
    x, w = gauss_legendre(p.element_rule)
    pts = 0.5 * (lo + hi)[:, None] + 0.5 * h[:, None] * x[None, :]
    jac = 0.5 * h[:, None] * w[None, :]
    phi_l = (hi[:, None] - pts) / h[:, None]
    phi_r = (pts - lo[:, None]) / h[:, None]

    flat = pts.ravel()
    psi = np.asarray(M.psi(flat), dtype=float).reshape(pts.shape)
    density = psi ** (N - 1)
    V = np.broadcast_to(fn.as_weight(p.V)(flat), flat.shape).reshape(pts.shape)

    stiffness = (jac * V * density).sum(axis=1) / (h * h)
    zeroth = np.zeros_like(pts)
    lam = mode_eigenvalue(N, p.mode)
    if lam:
        zeroth = zeroth + V * lam / (psi * psi)
    if p.potential is not None:
        zeroth = zeroth + np.broadcast_to(fn.as_weight(p.potential)(flat), flat.shape).reshape(pts.shape)
    c = jac * zeroth * density
    A = _tridiagonal(
        stiffness + (c * phi_l * phi_l).sum(axis=1),
        stiffness + (c * phi_r * phi_r).sum(axis=1),
        -stiffness + (c * phi_l * phi_r).sum(axis=1),
    )

    W = np.broadcast_to(fn.as_weight(p.denominator)(flat), flat.shape).reshape(pts.shape)
    b = jac * W * density
    B = _tridiagonal(
        (b * phi_l * phi_l).sum(axis=1),
        (b * phi_r * phi_r).sum(axis=1),
        (b * phi_l * phi_r).sum(axis=1),
    )

    for name, form in (("numerator", A), ("denominator", B)):
        if not (np.all(np.isfinite(form.diagonal)) and np.all(np.isfinite(form.offdiagonal))):
            raise ValidationError(f"{name} form has non-finite entries on {p.domain}", field=name)
    if not np.all(B.diagonal > 0):
        bad = r[1:-1][~(B.diagonal > 0)][0]
        raise ValidationError(f"denominator weight is not positive near r={bad}", field="denominator")
    try:
        cholesky_banded(B.upper_banded())
    except LinAlgError as e:
        raise ValidationError(f"denominator form is not positive definite: {e}", field="denominator") from e
    logger.debug(f"assemble_forms: mode={p.mode} size={B.size} domain={p.domain}")
    return A, B


def _tridiagonal(left: np.ndarray, right: np.ndarray, coupling: np.ndarray) -> BandedForm:
    """global interior matrix from per-element (LL, RR, LR) entries"""
    diag = np.zeros(left.size + 1)
    diag[:-1] += left
    diag[1:] += right
    return BandedForm(diag[1:-1].copy(), coupling[1:-1].copy())


def count_below(A: BandedForm, B: BandedForm, sigma: float) -> int:
    """
    Number of eigenvalues of A x = mu B x below sigma.

    Sylvester inertia of the LDL^T factorization of A - sigma B (B positive
    definite); the pivots follow d_i = t_ii - t_(i,i-1)^2 / d_(i-1).
    """
    T = A.minus(sigma, B)
    tiny = np.finfo(float).tiny
    count = 0
    d = 1.0
    for i in range(T.size):
        d = T.diagonal[i] - (T.offdiagonal[i - 1] ** 2 / d if i > 0 else 0.0)
        if d == 0.0:
            d = -tiny
        if d < 0:
            count += 1
    return count


@dataclass
class EigenResult:
    """
    Smallest eigenvalue with its eigenvector on the interior nodes.

    converged is False when MAX_ITERATIONS was reached.
    """

    value: float
    vector: np.ndarray
    iterations: int
    converged: bool
    shift: float


def _solver(T: BandedForm) -> Callable[[np.ndarray], np.ndarray]:
    try:
        c = cholesky_banded(T.upper_banded())
        return lambda rhs: cho_solve_banded((c, False), rhs)
    except LinAlgError:
        ab = T.general_banded()
        return lambda rhs: solve_banded((1, 1), ab, rhs)


def smallest_eigenvalue(
    A: BandedForm,
    B: BandedForm,
    tol: float = EIGEN_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> EigenResult:
    """
    Smallest mu of A x = mu B x by shifted inverse iteration.

    The pencil is first scaled by D = diag(B)^(-1/2). The iteration starts
    with shift 0; when successive Rayleigh quotients stagnate it re-shifts to
    sigma = mu - RESHIFT |mu|, accepted only if count_below() certifies that
    no eigenvalue lies below sigma. Converged when successive quotients
    differ by less than tol relative.

    Raises:
        ValidationError: size mismatch or empty pencil
    """
    if A.size != B.size or A.size == 0:
        raise ValidationError(f"pencil sizes ({A.size}, {B.size}) are not usable", field="mesh")
    d = 1.0 / np.sqrt(B.diagonal)
    As, Bs = A.scaled(d), B.scaled(d)

    def rayleigh(y):
        return float(np.dot(y, As.matvec(y)) / np.dot(y, Bs.matvec(y)))

    y = np.ones(As.size)
    y /= math.sqrt(float(np.dot(y, Bs.matvec(y))))
    mu = rayleigh(y)
    sigma = 0.0
    solve = _solver(As)
    change = math.inf
    converged = False
    it = 0
    for it in range(1, max_iterations + 1):
        y = solve(Bs.matvec(y))
        y /= math.sqrt(float(np.dot(y, Bs.matvec(y))))
        mu_new = rayleigh(y)
        new_change = abs(mu_new - mu)
        mu = mu_new
        if new_change <= tol * abs(mu):
            converged = True
            break
        if it >= 2 and new_change > STAGNATION * change and mu != 0:
            candidate = mu - RESHIFT * abs(mu)
            if candidate > sigma and count_below(As, Bs, candidate) == 0:
                logger.debug(f"smallest_eigenvalue: re-shift {sigma:.6e} -> {candidate:.6e} at iteration {it}")
                sigma = candidate
                solve = _solver(As.minus(sigma, Bs))
        change = new_change

    if not converged:
        logger.warning(f"smallest_eigenvalue: no convergence after {max_iterations} iterations (mu={mu:.10e})")
    x = d * y
    if x.sum() < 0:
        x = -x
    logger.debug(f"smallest_eigenvalue: mu={mu:.12e} iterations={it} shift={sigma:.6e}")
    return EigenResult(value=mu, vector=x, iterations=it, converged=converged, shift=sigma)


def trial_quotient(problem: RayleighProblem, profile: RadialProfile, spec: Optional[QuadratureSpec] = None) -> float:
    """
    Rayleigh quotient of the single-mode function profile(r) P_n by quadrature,
    with the weights of problem (the mesh is not used).
    """
    u = make_testfunction(problem.manifold, [(problem.mode, profile)], punctured=False)
    numerator = fn.dirichlet(u, problem.V, spec).value
    if problem.potential is not None:
        numerator += fn.weighted_mass(u, problem.potential, spec).value
    denominator = fn.weighted_mass(u, problem.denominator, spec).value
    if not denominator > 0:
        raise ValidationError(f"denominator of {profile.label} is {denominator}", field="denominator")
    return numerator / denominator


def hardy_trial_family(N: int, eps: float, alpha: float = 0.0) -> RadialProfile:
    """u_eps = r^(-(N-alpha-2)/2 + eps) cut off to (eps, 1/eps)"""
    return make_power_trial(N, eps, shift=alpha / 2.0)


@dataclass
class SharpnessTarget:
    """
    Refinement ladder of Rayleigh problems.

    build(level) returns the problems of a level (their minimum is the level
    value); level_scale(level) is the quantity in which the error is
    asymptotically linear, used by the Richardson step.
    """

    name: str
    build: Callable[[int], List[RayleighProblem]]
    level_scale: Callable[[int], float]
    nodes: Callable[[int], int]
    expected: Optional[float] = None
    trial: Optional[Callable[[float], RadialProfile]] = None


def make_target(
    name: str,
    N: int,
    mode: Optional[int] = None,
    alpha: float = 0.0,
    rmin: Optional[float] = None,
    rmax: Optional[float] = None,
    nodes: int = 200,
) -> SharpnessTarget:
    """
    Build a named SharpnessTarget.

    Ladder level k uses nodes * 2^k elements. Geometric ladders (hardy, ckn)
    widen both ends, (rmin^(k+1), rmax^(k+1)); h0-hardy lowers rmin^(k+1)
    with R = rmax fixed; poincare and string refine a uniform mesh on
    (rmin, rmax).

    Defaults: rmin = 1e-3 (geometric) or 0 (uniform); rmax = 1e3 (hardy,
    ckn), 40 (poincare, h0-hardy), 1 (string).

    Raises:
        ValidationError: unknown target, or h0-hardy with mode 0
    """
    if name not in TargetNames:
        raise ValidationError(f"unknown target {name!r}, expect one of {get_allowed_targets()}", field="sharpness_target")
    if nodes < 2:
        raise ValidationError(f"nodes must be >= 2, got {nodes}", field="nodes")
    alpha = float(alpha)

    def count(level: int) -> int:
        return nodes * 2**level

    one = fn.as_weight(1.0)
    if name in ("hardy", "ckn"):
        M = euclidean(N)
        n = 0 if mode is None else mode
        a = alpha if name == "ckn" else 0.0
        lo = 1.0e-3 if rmin is None else rmin
        hi = 1.0e3 if rmax is None else rmax
        if not (0.0 < lo < 1.0 < hi):
            raise ValidationError(f"geometric ladder needs 0 < rmin < 1 < rmax, got ({lo}, {hi})", field="rmin")
        V = fn.power_weight(-a)
        den = fn.power_weight(-a - 2.0)

        def build(level):
            mesh = graded_mesh(lo ** (level + 1), hi ** (level + 1), count(level), "geometric")
            return [RayleighProblem(M, n, V, den, mesh)]

        return SharpnessTarget(
            name=name,
            build=build,
            level_scale=lambda level: 1.0 / ((level + 1) * math.log(hi / lo)) ** 2,
            nodes=count,
            expected=((N - a - 2.0) / 2.0) ** 2 + mode_eigenvalue(N, n),
            trial=lambda eps: hardy_trial_family(N, eps, a),
        )

    if name == "h0-hardy":
        M = hyperbolic(N)
        if mode is not None and mode < 1:
            raise ValidationError(f"h0-hardy needs modes n >= 1, got {mode}", field="mode")
        modes = (1, 2, 3) if mode is None else (mode,)
        lo = 1.0e-3 if rmin is None else rmin
        hi = 40.0 if rmax is None else rmax
        if not (0.0 < lo < 1.0 and lo < hi):
            raise ValidationError(f"h0-hardy ladder needs 0 < rmin < 1 and rmin < rmax, got ({lo}, {hi})", field="rmin")
        den = fn.power_weight(-2.0)

        def build(level):
            mesh = graded_mesh(lo ** (level + 1), hi, count(level), "geometric")
            return [RayleighProblem(M, n, one, den, mesh) for n in modes]

        return SharpnessTarget(
            name=name,
            build=build,
            level_scale=lambda level: 1.0 / math.log(hi / lo ** (level + 1)) ** 2,
            nodes=count,
            expected=N * N / 4.0,
        )

    n = 0 if mode is None else mode
    lo = 0.0 if rmin is None else rmin
    if name == "poincare":
        M = hyperbolic(N)
        hi = 40.0 if rmax is None else rmax
        expected: Optional[float] = ((N - 1) / 2.0) ** 2
    else:
        M = euclidean(N)
        hi = 1.0 if rmax is None else rmax
        expected = (math.pi / (hi - lo)) ** 2 if (N == 3 and n == 0) else None

    def build_uniform(level):
        mesh = graded_mesh(lo, hi, count(level), "uniform")
        return [RayleighProblem(M, n, one, one, mesh)]

    return SharpnessTarget(
        name=name,
        build=build_uniform,
        level_scale=lambda level: 1.0 / count(level) ** 2,
        nodes=count,
        expected=expected,
    )


@dataclass
class ConstantEstimate:
    """
    Ladder of eigenvalue estimates.

    value is the finest-level eigenvalue; extrapolated is the Richardson
    value of the last two levels.
    """

    target: str
    value: float
    mesh_sizes: List[int]
    values_per_level: List[float]
    extrapolated: float
    trial_family_upper_bound: Optional[float] = None
    expected: Optional[float] = None
    flags: List[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return not any(f.startswith("level") and "converge" in f for f in self.flags)

    def rows(self) -> List[Tuple[int, int, float]]:
        """(level, nodes, value) per ladder level"""
        return [(k, n, v) for k, (n, v) in enumerate(zip(self.mesh_sizes, self.values_per_level))]

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "value": self.value,
            "mesh_sizes": list(self.mesh_sizes),
            "values_per_level": list(self.values_per_level),
            "extrapolated": self.extrapolated,
            "trial_family_upper_bound": self.trial_family_upper_bound,
            "expected": self.expected,
            "flags": list(self.flags),
        }


def richardson(x0: float, v0: float, x1: float, v1: float) -> float:
    """value at x = 0 of the line through (x0, v0), (x1, v1)"""
    if x0 == x1:
        return v1
    return (x0 * v1 - x1 * v0) / (x0 - x1)


def _level(target: SharpnessTarget, level: int) -> Tuple[float, bool]:
    results = [smallest_eigenvalue(*assemble_forms(p)) for p in target.build(level)]
    best = min(results, key=lambda res: res.value)
    logger.info(f"{target.name} level {level}: {target.nodes(level)} elements, mu={best.value:.10f}")
    return best.value, all(res.converged for res in results)


def estimate_constant(
    target: SharpnessTarget,
    levels: int = 4,
    trial_eps: Sequence[float] = TRIAL_EPS,
    threads: int = 1,
) -> ConstantEstimate:
    """
    Run the ladder of target for levels 0..levels-1.

    Levels are independent and may run on `threads` workers; results are
    kept in level order. A ladder whose changes stop shrinking (beyond
    LADDER_NOISE) is flagged, as is any level whose inverse iteration did
    not converge. Targets with a trial family also report the smallest
    trial quotient over trial_eps.
    """
    if levels < 1:
        raise ValidationError(f"levels must be >= 1, got {levels}", field="levels")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcome = list(pool.map(lambda k: _level(target, k), range(levels)))
    else:
        outcome = [_level(target, k) for k in range(levels)]
    values = [v for v, _ in outcome]
    flags = [f"level {k}: inverse iteration did not converge" for k, (_, ok) in enumerate(outcome) if not ok]

    for k in range(2, levels):
        prev, last = abs(values[k - 1] - values[k - 2]), abs(values[k] - values[k - 1])
        if last > prev + LADDER_NOISE * abs(values[k]):
            flags.append(f"non-monotone ladder at level {k}")
    for flag in flags:
        logger.warning(f"{target.name}: {flag}")

    if levels >= 2:
        k = levels - 1
        extrapolated = richardson(target.level_scale(k - 1), values[k - 1], target.level_scale(k), values[k])
    else:
        extrapolated = values[-1]

    bound = None
    if target.trial is not None and trial_eps:
        problem = target.build(0)[0]
        bound = min(trial_quotient(problem, target.trial(eps)) for eps in trial_eps)

    estimate = ConstantEstimate(
        target=target.name,
        value=values[-1],
        mesh_sizes=[target.nodes(k) for k in range(levels)],
        values_per_level=values,
        extrapolated=extrapolated,
        trial_family_upper_bound=bound,
        expected=target.expected,
        flags=flags,
    )
    logger.info(f"{target.name}: value={estimate.value:.8f} extrapolated={extrapolated:.8f} expected={target.expected}")
    return estimate
