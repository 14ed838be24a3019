"""
Singularity-aware adaptive quadrature on radial intervals.

Every radial integral of the package goes through integrate_radial():
a composite Gauss-Legendre rule on panels graded toward the left endpoint,
refined adaptively by splitting the panel with the largest error estimate.
The error estimate of a panel is the difference between its k-node and
2k-node results; the 2k-node values are summed for the returned integral.

Integrands are vectorized callables: they receive a 1-D numpy array of
radii and return an array of the same shape.

Typical Usage:
    from python_hardyverify.quadrature import QuadratureSpec, integrate_radial

    res = integrate_radial(lambda r: r**-0.5, (0.0, 1.0))
    res.value, res.converged     # 2.0, True
"""

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import IntegrandError, ValidationError
from .logging_config import get_logger

logger = get_logger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Tolerances and rule parameters of integrate_radial.

    Attributes:
        rel_tol: relative tolerance on the total error estimate
        abs_tol: absolute floor of the tolerance
        max_subdivisions: maximal number of panels
        base_rule: Gauss-Legendre nodes per panel (k); the estimate uses 2k
        grading_exponent: initial breakpoints a + (b-a)(i/m)^grading_exponent
        initial_panels: m
    """

    rel_tol: float = 1.0e-10
    abs_tol: float = 1.0e-14
    max_subdivisions: int = 2**16
    base_rule: int = 16
    grading_exponent: float = 3.0
    initial_panels: int = 8

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValidationError(f"rel_tol must be > 0, got {self.rel_tol}", field="rel_tol")
        if not self.abs_tol > 0:
            raise ValidationError(f"abs_tol must be > 0, got {self.abs_tol}", field="abs_tol")
        if self.base_rule < 2:
            raise ValidationError(f"base_rule must be >= 2, got {self.base_rule}", field="quad_nodes")
        if self.grading_exponent < 1:
            raise ValidationError(
                f"grading_exponent must be >= 1, got {self.grading_exponent}",
                field="grading_exponent",
            )
        if self.initial_panels < 1 or self.max_subdivisions < self.initial_panels:
            raise ValidationError(
                f"need 1 <= initial_panels <= max_subdivisions, got "
                f"({self.initial_panels}, {self.max_subdivisions})",
                field="max_subdivisions",
            )

    def tolerance(self, value: float) -> float:
        return max(self.rel_tol * abs(value), self.abs_tol)

    def to_dict(self) -> dict:
        return {
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_subdivisions": self.max_subdivisions,
            "base_rule": self.base_rule,
            "grading_exponent": self.grading_exponent,
            "initial_panels": self.initial_panels,
        }


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class IntegralResult:
    """value, summed error estimate, number of panels, convergence flag"""

    value: float
    error_estimate: float
    panels_used: int
    converged: bool

    @classmethod
    def zero(cls) -> "IntegralResult":
        return cls(value=0.0, error_estimate=0.0, panels_used=0, converged=True)


@lru_cache(maxsize=None)
def gauss_legendre(k: int) -> Tuple[np.ndarray, np.ndarray]:
    """k-node Gauss-Legendre nodes and weights on [-1, 1]"""
    x, w = np.polynomial.legendre.leggauss(k)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _evaluate(f: Integrand, points: np.ndarray) -> np.ndarray:
    values = np.asarray(f(points), dtype=float)
    if values.shape != points.shape:
        values = np.broadcast_to(values, points.shape)
    finite = np.isfinite(values)
    if not finite.all():
        bad = float(points[~finite][0])
        raise IntegrandError(f"integrand is not finite at r={bad!r}", point=bad)
    return values


def gauss_legendre_panel(f: Integrand, a: float, b: float, k: int) -> float:
    """Single k-node Gauss-Legendre panel on [a, b]; exact for degree 2k-1"""
    x, w = gauss_legendre(k)
    half = 0.5 * (b - a)
    points = 0.5 * (a + b) + half * x
    return float(half * np.dot(w, _evaluate(f, points)))


def _panels(f: Integrand, los: np.ndarray, his: np.ndarray, k: int):
    """k- and 2k-node values of a batch of panels, one integrand call"""
    xk, wk = gauss_legendre(k)
    x2k, w2k = gauss_legendre(2 * k)
    mid = 0.5 * (los + his)
    half = 0.5 * (his - los)
    nodes = np.concatenate([xk, x2k])
    points = mid[:, None] + half[:, None] * nodes[None, :]
    values = _evaluate(f, points.ravel()).reshape(points.shape)
    coarse = half * (values[:, :k] @ wk)
    fine = half * (values[:, k:] @ w2k)
    return fine, np.abs(fine - coarse)


def _live_totals(panels: list, alive: list) -> Tuple[float, float]:
    """(value, error) summed over the panels not yet split"""
    live = [p for p, ok in zip(panels, alive) if ok]
    return math.fsum(p[2] for p in live), math.fsum(p[3] for p in live)


def integrate_radial(
    f: Integrand,
    domain: Tuple[float, float],
    spec: Optional[QuadratureSpec] = None,
) -> IntegralResult:
    """
    Adaptive composite Gauss-Legendre integral of f over (a, b).

    Initial panels are graded toward a (integrable power singularities
    r^-beta, beta < 1, are allowed there); the panel with the largest
    error estimate is split until the summed estimate is below
    max(rel_tol |value|, abs_tol). Panels touching a are split at a quarter
    of their length, the others at their midpoint. Deterministic: the same
    inputs give bit-identical outputs.

    Args:
        f: vectorized integrand
        domain: (a, b) with 0 <= a < b < inf
        spec: QuadratureSpec (default tolerances when None)

    Returns:
        IntegralResult; converged is False when max_subdivisions was reached

    Raises:
        ValidationError: invalid domain
        IntegrandError: f returned NaN or Inf (message names the point)
    """
    if spec is None:
        spec = DEFAULT_SPEC
    a, b = float(domain[0]), float(domain[1])
    if not (0.0 <= a < b < math.inf):
        raise ValidationError(f"need 0 <= a < b < inf, got ({a}, {b})", field="domain")

    k = spec.base_rule
    m = spec.initial_panels
    t = np.linspace(0.0, 1.0, m + 1) ** spec.grading_exponent
    breaks = a + (b - a) * t
    breaks[-1] = b
    fine, err = _panels(f, breaks[:-1], breaks[1:], k)

    # panel records: [lo, hi, value, error]; heap holds (-error, insertion index)
    panels = [[breaks[i], breaks[i + 1], fine[i], err[i]] for i in range(m)]
    heap = [(-panels[i][3], i) for i in range(m)]
    heapq.heapify(heap)
    alive = [True] * m

    # running totals; confirmed by a full sum over the live panels before stopping
    value = math.fsum(fine)
    total_err = math.fsum(err)
    while True:
        if total_err <= spec.tolerance(value):
            value, total_err = _live_totals(panels, alive)
            if total_err <= spec.tolerance(value):
                break
        if len(heap) >= spec.max_subdivisions:
            value, total_err = _live_totals(panels, alive)
            logger.warning(
                f"integrate_radial: no convergence on ({a}, {b}) after {len(heap)} panels "
                f"(error {total_err:.3e}, value {value:.6e})"
            )
            return IntegralResult(value, total_err, len(heap), False)
        _, idx = heapq.heappop(heap)
        lo, hi, pval, perr = panels[idx]
        split = lo + (hi - lo) * (0.25 if lo == a else 0.5)
        if not (lo < split < hi):
            # panel no longer divisible in floating point
            logger.warning(f"integrate_radial: panel ({lo}, {hi}) cannot be split further")
            value, total_err = _live_totals(panels, alive)
            return IntegralResult(value, total_err, len(heap) + 1, False)
        alive[idx] = False
        cfine, cerr = _panels(f, np.array([lo, split]), np.array([split, hi]), k)
        for clo, chi, cv, ce in ((lo, split, cfine[0], cerr[0]), (split, hi, cfine[1], cerr[1])):
            panels.append([clo, chi, cv, ce])
            alive.append(True)
            heapq.heappush(heap, (-ce, len(panels) - 1))
        value = math.fsum((value, cfine[0], cfine[1], -pval))
        total_err = math.fsum((total_err, cerr[0], cerr[1], -perr))

    logger.debug(f"integrate_radial: ({a:g}, {b:g}) value={value:.12e} panels={len(heap)}")
    return IntegralResult(value, total_err, len(heap), True)


def integrate_2d_polar(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    r_domain: Tuple[float, float],
    spec: Optional[QuadratureSpec] = None,
    psi: Optional[Callable] = None,
    n_theta: int = 64,
) -> IntegralResult:
    """
    Integral of f(r, theta) psi(r) dr dtheta over (a, b) x [0, 2 pi).

    Trapezoid rule with n_theta points in theta (spectrally accurate for
    smooth periodic integrands), integrate_radial in r. Used as the N = 2
    oracle with explicit circle harmonics.

    Args:
        f: vectorized f(r, theta), broadcasting r[:, None] against theta[None, :]
        r_domain: (a, b)
        spec: QuadratureSpec
        psi: warping function (default psi(r) = r)
        n_theta: number of angular points
    """
    if psi is None:
        psi = lambda r: r  # noqa: E731
    if n_theta < 3:
        raise ValidationError(f"n_theta must be >= 3, got {n_theta}", field="n_theta")
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    dtheta = 2.0 * np.pi / n_theta

    def radial(r: np.ndarray) -> np.ndarray:
        values = np.asarray(f(r[:, None], theta[None, :]), dtype=float)
        values = np.broadcast_to(values, (r.size, n_theta))
        return dtheta * values.sum(axis=1) * psi(r)

    return integrate_radial(radial, r_domain, spec)
