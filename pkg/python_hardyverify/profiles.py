"""
Smooth compactly supported radial profiles and mode-decomposed test functions.

A test function is a finite sum u(r, sigma) = sum_n a_n(r) P_n(sigma) over
distinct spherical-harmonic degrees n. Every radial profile a_n carries its
analytic derivative; nothing in the package differentiates numerically.

Membership in the subspace H_j (all degrees n >= j+1) is structural and
checked by make_testfunction().

Typical Usage:
    from python_hardyverify.geometry import hyperbolic
    from python_hardyverify.profiles import make_bump, make_testfunction

    u = make_testfunction(hyperbolic(3), [(1, make_bump(1.0, 3.0))], j=0)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np
from numpy.polynomial import Chebyshev

from .errors import ValidationError
from .geometry import Mode, ModelManifold
from .logging_config import get_logger

logger = get_logger(__name__)

#: exp(-1/q) underflows to 0 below this q
_UNDERFLOW_Q = 1.0 / 700.0


def _check_support(s0: float, s1: float) -> Tuple[float, float]:
    s0, s1 = float(s0), float(s1)
    if not (0.0 <= s0 < s1 < np.inf):
        raise ValidationError(f"support must satisfy 0 <= s0 < s1 < inf, got ({s0}, {s1})", field="support")
    return s0, s1


@dataclass(frozen=True)
class RadialProfile:
    """
    Radial profile a(r) with analytic derivative a'(r), zero outside support.

    eval and deriv are vectorized over numpy arrays.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    support: Tuple[float, float]
    label: str = field(default="", compare=False)

    def __call__(self, r):
        return self.eval(r)

    def scaled(self, c: float) -> "RadialProfile":
        """c * a"""
        ev, dv = self.eval, self.deriv
        return RadialProfile(
            eval=lambda r: c * ev(r),
            deriv=lambda r: c * dv(r),
            support=self.support,
            label=f"{c:g}*{self.label}",
        )

    def times(self, weight: Callable, weight_prime: Callable, label: str = "") -> "RadialProfile":
        """product with a smooth weight w: (w a)' = w' a + w a'"""
        ev, dv = self.eval, self.deriv
        return RadialProfile(
            eval=lambda r: weight(r) * ev(r),
            deriv=lambda r: weight_prime(r) * ev(r) + weight(r) * dv(r),
            support=self.support,
            label=label or f"w*{self.label}",
        )


def _bump_values(r: np.ndarray, s0: float, s1: float):
    """(a, a') of exp(-1/((r-s0)(s1-r))) on numpy arrays"""
    r = np.asarray(r, dtype=float)
    a = np.zeros_like(r)
    da = np.zeros_like(r)
    q = (r - s0) * (s1 - r)
    live = q > _UNDERFLOW_Q
    ql = q[live]
    a[live] = np.exp(-1.0 / ql)
    da[live] = a[live] * (s0 + s1 - 2.0 * r[live]) / (ql * ql)
    return a, da


def make_bump(s0: float, s1: float) -> RadialProfile:
    """
    Bump exp(-1/((r-s0)(s1-r))) on (s0, s1), zero elsewhere.

    Raises:
        ValidationError: s0 >= s1 or s0 < 0
    """
    s0, s1 = _check_support(s0, s1)
    return RadialProfile(
        eval=lambda r: _bump_values(r, s0, s1)[0],
        deriv=lambda r: _bump_values(r, s0, s1)[1],
        support=(s0, s1),
        label=f"bump({s0:g},{s1:g})",
    )


def make_random_profile(seed: int, support: Tuple[float, float], n_knots: int = 5) -> RadialProfile:
    """
    Bump-windowed random Chebyshev series.

    a(r) = (sum_k c_k T_k(xi(r))) * bump(s0, s1), xi affine from (s0, s1) onto
    [-1, 1], c_k ~ uniform[-1, 1] from numpy.random.default_rng(seed).
    """
    if n_knots < 3:
        raise ValidationError(f"n_knots must be >= 3, got {n_knots}", field="n_knots")
    s0, s1 = _check_support(*support)
    rng = np.random.default_rng(seed)
    coefs = rng.uniform(-1.0, 1.0, n_knots)
    series = Chebyshev(coefs, domain=[s0, s1])
    dseries = series.deriv()
    logger.debug(f"make_random_profile(seed={seed}): coefficients {coefs}")

    def _eval(r):
        r = np.asarray(r, dtype=float)
        a, _ = _bump_values(r, s0, s1)
        return series(r) * a

    def _deriv(r):
        r = np.asarray(r, dtype=float)
        a, da = _bump_values(r, s0, s1)
        return dseries(r) * a + series(r) * da

    return RadialProfile(eval=_eval, deriv=_deriv, support=(s0, s1), label=f"random(seed={seed})")


def _smooth_step(x: np.ndarray):
    """
    (s, s') of the C-infinity step g(x)/(g(x)+g(1-x)), g(x) = exp(-1/x):
    0 for x <= 0, 1 for x >= 1.
    """
    x = np.asarray(x, dtype=float)
    s = np.where(x >= 1.0, 1.0, 0.0)
    ds = np.zeros_like(x)
    mid = (x > 0.0) & (x < 1.0)
    xm = x[mid]
    # ratio g(1-x)/g(x) = exp(1/x - 1/(1-x)), clipped to stay finite
    e = np.clip(1.0 / xm - 1.0 / (1.0 - xm), -700.0, 700.0)
    ratio = np.exp(e)
    s[mid] = 1.0 / (1.0 + ratio)
    # s' = s (1 - s) (1/x^2 + 1/(1-x)^2)
    ds[mid] = s[mid] * (ratio / (1.0 + ratio)) * (1.0 / xm**2 + 1.0 / (1.0 - xm) ** 2)
    return s, ds


def make_plateau(s0: float, p0: float, p1: float, s1: float) -> RadialProfile:
    """
    Smooth cutoff: 0 outside (s0, s1), 1 on [p0, p1], smooth steps between.

    Raises:
        ValidationError: unless 0 <= s0 < p0 <= p1 < s1
    """
    s0, s1 = _check_support(s0, s1)
    if not (s0 < p0 <= p1 < s1):
        raise ValidationError(
            f"plateau needs s0 < p0 <= p1 < s1, got ({s0}, {p0}, {p1}, {s1})", field="support"
        )

    def _values(r):
        r = np.asarray(r, dtype=float)
        up, dup = _smooth_step((r - s0) / (p0 - s0))
        down, ddown = _smooth_step((s1 - r) / (s1 - p1))
        return up * down, dup * down / (p0 - s0) - up * ddown / (s1 - p1)

    return RadialProfile(
        eval=lambda r: _values(r)[0],
        deriv=lambda r: _values(r)[1],
        support=(s0, s1),
        label=f"plateau({s0:g},{p0:g},{p1:g},{s1:g})",
    )


def make_power_trial(N: int, eps: float, shift: float = 0.0) -> RadialProfile:
    """
    Hardy trial profile u_eps(r) = r^(-(N-2)/2 + eps) * cutoff.

    cutoff is the plateau equal to 1 on [2 eps, 1/(2 eps)] and supported in
    (eps, 1/eps). shift adds to the exponent (the weighted family uses
    shift = alpha/2).
    """
    if not (0.0 < eps < 0.5):
        raise ValidationError(f"eps must lie in (0, 1/2), got {eps}", field="eps")
    p = -(N - 2) / 2.0 + eps + shift
    cutoff = make_plateau(eps, 2.0 * eps, 1.0 / (2.0 * eps), 1.0 / eps)
    return cutoff.times(
        lambda r: np.asarray(r, dtype=float) ** p,
        lambda r: p * np.asarray(r, dtype=float) ** (p - 1.0),
        label=f"power_trial(N={N},eps={eps:g})",
    )


@dataclass(frozen=True)
class TestFunction:
    """
    u = sum over terms of a_n(r) P_n(sigma) on a model manifold.

    subspace_index j: every degree n satisfies n >= j+1 (j = -1: unconstrained).
    """

    __test__ = False  # not a pytest class

    manifold: ModelManifold
    terms: Tuple[Tuple[Mode, RadialProfile], ...]
    subspace_index: int = -1

    @property
    def N(self) -> int:
        return self.manifold.dimension

    @property
    def modes(self) -> List[int]:
        return [mode.n for mode, _ in self.terms]

    @property
    def is_zero(self) -> bool:
        return len(self.terms) == 0

    def support(self) -> Tuple[float, float]:
        """hull of the profile supports; (0, 0) for u = 0"""
        if self.is_zero:
            return (0.0, 0.0)
        return (min(p.support[0] for _, p in self.terms), max(p.support[1] for _, p in self.terms))

    def is_punctured(self) -> bool:
        """True if every profile support avoids r = 0"""
        return all(p.support[0] > 0.0 for _, p in self.terms)

    def scaled(self, c: float) -> "TestFunction":
        return TestFunction(
            manifold=self.manifold,
            terms=tuple((mode, p.scaled(c)) for mode, p in self.terms),
            subspace_index=self.subspace_index,
        )

    def restrict(self, n: int) -> "TestFunction":
        """single-mode part a_n P_n"""
        return TestFunction(
            manifold=self.manifold,
            terms=tuple((mode, p) for mode, p in self.terms if mode.n == n),
            subspace_index=self.subspace_index,
        )

    def __add__(self, other: "TestFunction") -> "TestFunction":
        if other.manifold != self.manifold:
            raise ValidationError("cannot add test functions on different manifolds", field="manifold")
        return make_testfunction(
            self.manifold,
            [(mode.n, p) for mode, p in self.terms + other.terms],
            min(self.subspace_index, other.subspace_index),
            punctured=False,
        )


def make_testfunction(
    M: ModelManifold,
    terms: Sequence[Tuple[int, RadialProfile]],
    j: int = -1,
    punctured: bool = True,
) -> TestFunction:
    """
    Assemble a TestFunction in H_j from (degree, profile) pairs.

    Args:
        M: model manifold
        terms: list of (n, profile); an empty list is u = 0
        j: subspace index, j >= -1
        punctured: require every support to avoid r = 0 (s0 > 0)

    Raises:
        ValidationError: n < j+1, repeated n, j < -1, or a support touching
            the pole when punctured is set
    """
    if j < -1:
        raise ValidationError(f"subspace index must be >= -1, got {j}", field="j")
    seen = set()
    built = []
    for n, profile in terms:
        if n < j + 1:
            raise ValidationError(f"mode {n} is not allowed in H_{j} (need n >= {j + 1})", field="modes")
        if n in seen:
            raise ValidationError(f"mode {n} appears twice", field="modes")
        if punctured and profile.support[0] <= 0.0:
            raise ValidationError(
                f"support {profile.support} of mode {n} touches the pole", field="support"
            )
        seen.add(n)
        built.append((Mode.of(M.dimension, n), profile))
    logger.debug(f"make_testfunction: {M!r} modes={sorted(seen)} j={j}")
    return TestFunction(manifold=M, terms=tuple(built), subspace_index=j)


def random_testfunction(
    M: ModelManifold,
    modes: Sequence[int],
    support: Tuple[float, float],
    seed: int,
    j: int = -1,
    n_knots: int = 5,
) -> TestFunction:
    """one make_random_profile per mode, seeded seed, seed+1, ... in mode order"""
    terms = [(n, make_random_profile(seed + i, support, n_knots)) for i, n in enumerate(modes)]
    return make_testfunction(M, terms, j)
