"""
Riemannian model manifolds and spherical-harmonic mode bookkeeping.

A model manifold (M, g, psi) is described in geodesic polar coordinates
around its pole by the metric dr^2 + psi(r)^2 dw^2, so every radial
integral carries the volume density psi(r)^(N-1). Euclidean space is
psi(r) = r and the hyperbolic space H^N is psi(r) = sinh(r).

Spherical harmonics P_n are never evaluated pointwise: only the
Laplace-Beltrami eigenvalue lambda_n = n(n + N - 2) and the eigenspace
dimension d_n enter the radial reductions.

Typical Usage:
    from python_hardyverify.geometry import hyperbolic, mode_eigenvalue

    M = hyperbolic(3)
    M.volume_density(1.0)        # sinh(1)^2
    mode_eigenvalue(3, 2)        # 6
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ValidationError
from .logging_config import get_logger

logger = get_logger(__name__)

RadialFunction = Callable[[np.ndarray], np.ndarray]

#: below this argument coth(x) - 1/x is evaluated from its Taylor series
SERIES_SWITCH = 1.0e-2

#: radii at which a custom warping function is compared with its Taylor expansion
TAYLOR_PROBES = (1.0e-6, 1.0e-4)
TAYLOR_TOL = 1.0e-8

MANIFOLD_NAMES = ("euclidean", "hyperbolic", "custom")


def get_allowed_manifolds() -> list:
    """
    return manifold names accepted by the CLI
    """
    return ["euclidean", "hyperbolic"]


def coth_minus_inv(x):
    """
    coth(x) - 1/x without cancellation near 0

    series x/3 - x^3/45 + 2x^5/945 - x^7/4725 below SERIES_SWITCH,
    direct formula otherwise. Odd in x, 0 at x = 0.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = np.abs(x) < SERIES_SWITCH
    xs = x[small]
    x2 = xs * xs
    out[small] = xs * (1.0 / 3.0 - x2 * (1.0 / 45.0 - x2 * (2.0 / 945.0 - x2 / 4725.0)))
    xl = x[~small]
    out[~small] = 1.0 / np.tanh(xl) - 1.0 / xl
    if scalar:
        return float(out[0])
    return out


def validate_dimension(N) -> int:
    try:
        N = operator.index(N)
    except TypeError:
        raise ValidationError(f"dimension must be an integer, got {N!r}", field="N")
    if N < 2:
        raise ValidationError(f"dimension must be >= 2, got {N}", field="N")
    return N


def validate_degree(n) -> int:
    try:
        n = operator.index(n)
    except TypeError:
        raise ValidationError(f"harmonic degree must be an integer, got {n!r}", field="n")
    if n < 0:
        raise ValidationError(f"harmonic degree must be >= 0, got {n}", field="n")
    return n


def mode_eigenvalue(N: int, n: int) -> int:
    """
    Eigenvalue lambda_n = n^2 + (N-2)n of -Laplace-Beltrami on S^(N-1).

    Integer arithmetic, exact.

    Raises:
        ValidationError: N < 2 or n < 0
    """
    N = validate_dimension(N)
    n = validate_degree(n)
    return n * n + (N - 2) * n


def mode_multiplicity(N: int, n: int) -> int:
    """
    Dimension d_n of the degree-n spherical harmonics on S^(N-1).

    d_0 = 1, d_1 = N and binom(N+n-1, n) - binom(N+n-3, n-2) for n >= 2.
    Computed with python integers, so large (N, n) return the exact value
    instead of wrapping; a non-positive result is reported as an error.
    """
    N = validate_dimension(N)
    n = validate_degree(n)
    if n == 0:
        return 1
    if n == 1:
        return N
    d = math.comb(N + n - 1, n) - math.comb(N + n - 3, n - 2)
    if d <= 0:
        raise ArithmeticError(f"non-positive multiplicity d_{n}={d} for N={N}")
    return d


@dataclass(frozen=True)
class Mode:
    """Spherical-harmonic degree n with its eigenvalue and multiplicity."""

    n: int
    eigenvalue: int
    multiplicity: int

    @classmethod
    def of(cls, N: int, n: int) -> "Mode":
        return cls(n=n, eigenvalue=mode_eigenvalue(N, n), multiplicity=mode_multiplicity(N, n))


@dataclass(frozen=True)
class ModelManifold:
    """
    N-dimensional Riemannian model with warping function psi.

    Attributes:
        dimension: N >= 2
        psi, psi_prime, psi_second: closed-form callables, vectorized over numpy arrays
        name: euclidean | hyperbolic | custom
        log_excess: optional stable evaluation of psi'/psi - 1/r
    """

    dimension: int
    psi: RadialFunction
    psi_prime: RadialFunction
    psi_second: RadialFunction
    name: str = "custom"
    log_excess: Optional[RadialFunction] = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        validate_dimension(self.dimension)
        if self.name not in MANIFOLD_NAMES:
            raise ValidationError(
                f"unknown manifold {self.name!r}, expect one of {MANIFOLD_NAMES}",
                field="manifold",
            )

    @property
    def N(self) -> int:
        return self.dimension

    def __repr__(self):
        return f"{self.__class__.__name__}(name={self.name!r}, N={self.dimension}, label={self.label!r})"

    def volume_density(self, r):
        """psi(r)^(N-1); see volume_density()"""
        return volume_density(self, r)

    def log_psi_excess(self, r):
        """
        psi'(r)/psi(r) - 1/r = d/dr log(psi(r)/r)

        coth(r) - 1/r on H^N, 0 on R^N.
        """
        if self.log_excess is not None:
            return self.log_excess(r)
        r = np.asarray(r, dtype=float)
        return self.psi_prime(r) / self.psi(r) - 1.0 / r

    def check_pole(self, grid: Optional[np.ndarray] = None) -> None:
        """
        Check psi(0) = 0, psi'(0) = 1 and psi > 0 on a sample grid.

        psi is odd at the pole, so psi(r)/r and psi'(r) are even: both are
        extrapolated to r = 0 from TAYLOR_PROBES (error O(r^4)) and
        compared with 1 to TAYLOR_TOL.

        Raises:
            ValidationError: on the first violated condition
        """
        psi0 = float(self.psi(np.asarray(0.0)))
        if abs(psi0) > TAYLOR_TOL:
            raise ValidationError(f"psi(0) = {psi0} is not 0", field="psi")

        r1, r2 = TAYLOR_PROBES
        w = r2 * r2 - r1 * r1
        slope = [float(self.psi(np.asarray(r))) / r for r in (r1, r2)]
        dpsi = [float(self.psi_prime(np.asarray(r))) for r in (r1, r2)]
        slope0 = (r2 * r2 * slope[0] - r1 * r1 * slope[1]) / w
        dpsi0 = (r2 * r2 * dpsi[0] - r1 * r1 * dpsi[1]) / w
        logger.debug(f"check_pole({self.label or self.name}): psi/r -> {slope0}, psi' -> {dpsi0}")
        if abs(slope0 - 1.0) > TAYLOR_TOL:
            raise ValidationError(f"psi(r)/r -> {slope0} at the pole, expect 1", field="psi")
        if abs(dpsi0 - 1.0) > TAYLOR_TOL:
            raise ValidationError(f"psi'(0) = {dpsi0}, expect 1", field="psi_prime")

        if grid is None:
            grid = np.geomspace(1.0e-6, 20.0, 200)
        values = self.psi(np.asarray(grid, dtype=float))
        if not np.all(values > 0):
            bad = np.asarray(grid)[~(values > 0)][0]
            raise ValidationError(f"psi({bad}) <= 0", field="psi")


def volume_density(M: ModelManifold, r):
    """
    Radial volume density psi(r)^(N-1) of the model manifold M.

    Raises:
        ValidationError: r < 0
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValidationError(f"radius must be >= 0, got {r.min()}", field="r")
    value = M.psi(r) ** (M.dimension - 1)
    if np.ndim(value) == 0:
        return float(value)
    return value


def euclidean(N: int) -> ModelManifold:
    """R^N: psi(r) = r"""
    return ModelManifold(
        dimension=N,
        psi=lambda r: np.asarray(r, dtype=float) * 1.0,
        psi_prime=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        psi_second=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        name="euclidean",
        log_excess=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        label="euclidean",
    )


def hyperbolic(N: int) -> ModelManifold:
    """H^N: psi(r) = sinh(r)"""
    return ModelManifold(
        dimension=N,
        psi=np.sinh,
        psi_prime=np.cosh,
        psi_second=np.sinh,
        name="hyperbolic",
        log_excess=coth_minus_inv,
        label="hyperbolic",
    )


def scaled_hyperbolic(N: int, kappa: float) -> ModelManifold:
    """
    Hyperbolic model of curvature -kappa^2: psi(r) = sinh(kappa r)/kappa.

    Returned as a custom model; psi'/psi - 1/r = kappa (coth(kappa r) - 1/(kappa r)).
    """
    if kappa <= 0:
        raise ValidationError(f"kappa must be > 0, got {kappa}", field="kappa")
    return custom(
        N,
        psi=lambda r: np.sinh(kappa * np.asarray(r, dtype=float)) / kappa,
        psi_prime=lambda r: np.cosh(kappa * np.asarray(r, dtype=float)),
        psi_second=lambda r: kappa * np.sinh(kappa * np.asarray(r, dtype=float)),
        log_excess=lambda r: kappa * coth_minus_inv(kappa * np.asarray(r, dtype=float)),
        label=f"sinh({kappa:g}r)/{kappa:g}",
    )


def custom(
    N: int,
    psi: RadialFunction,
    psi_prime: RadialFunction,
    psi_second: RadialFunction,
    log_excess: Optional[RadialFunction] = None,
    label: str = "custom",
) -> ModelManifold:
    """
    Model manifold from user callables psi, psi', psi''.

    The pole conditions are validated (see ModelManifold.check_pole).
    """
    M = ModelManifold(
        dimension=N,
        psi=psi,
        psi_prime=psi_prime,
        psi_second=psi_second,
        name="custom",
        log_excess=log_excess,
        label=label,
    )
    M.check_pole()
    return M


def make_manifold(name: str, N: int) -> ModelManifold:
    """
    return the manifold selected by the config key `manifold`
    """
    if name == "hyperbolic":
        return hyperbolic(N)
    if name == "euclidean":
        return euclidean(N)
    raise ValidationError(
        f"unknown manifold {name!r}, expect one of {get_allowed_manifolds()}", field="manifold"
    )


@dataclass(frozen=True)
class IntegrationDomain:
    """
    Radial integration range (inner, truncation) inside the ball B_outer.

    outer may be math.inf; truncation is the finite radius actually used.
    """

    inner: float
    outer: float
    truncation: float

    def __post_init__(self):
        if self.inner < 0:
            raise ValidationError(f"inner radius must be >= 0, got {self.inner}", field="domain")
        if not (self.inner < self.truncation <= self.outer):
            raise ValidationError(
                f"need inner < truncation <= outer, got ({self.inner}, {self.truncation}, {self.outer})",
                field="domain",
            )
        if not math.isfinite(self.truncation):
            raise ValidationError("truncation radius must be finite", field="domain")

    @classmethod
    def ball(cls, R: float, r_min: float = 0.0, R_trunc: Optional[float] = None) -> "IntegrationDomain":
        if R_trunc is None:
            R_trunc = R
        return cls(inner=r_min, outer=R, truncation=R_trunc)

    def contains(self, support: Tuple[float, float]) -> bool:
        """True if the open interval support lies inside (inner, truncation)"""
        s0, s1 = support
        return self.inner <= s0 and s1 <= self.truncation
