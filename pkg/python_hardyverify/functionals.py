"""
Integral functionals of mode-decomposed test functions.

Every functional reduces, by orthonormality of the spherical harmonics, to a
sum over the terms of u of one radial integral

    sum_n int_{s0}^{s1} g_n(r) psi(r)^(N-1) dr

computed with quadrature.integrate_radial over the support of a_n. Per-mode
contributions are summed in term order. Constants of the inequalities, such as
(N-1) or (j+1)(N+j-1), are applied by the verifier, never here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, List, Optional, Tuple, Union

import numpy as np

from .errors import ValidationError
from .geometry import Mode
from .logging_config import get_logger
from .profiles import RadialProfile, TestFunction
from .quadrature import QuadratureSpec, integrate_radial

if TYPE_CHECKING:
    from .besselpairs import BesselPair

logger = get_logger(__name__)

Weight = Union[float, Callable[[np.ndarray], np.ndarray]]

GRADIENTS = ("radial", "full")


@dataclass(frozen=True)
class FunctionalValue:
    """
    value = sum of per_mode contributions (fixed term order).

    magnitude is the sum of absolute values of the integrals that were
    combined into value; it is the scale against which value is judged.
    """

    value: float
    per_mode: Tuple[Tuple[int, float], ...] = ()
    quadrature_converged: bool = True
    panels: int = 0
    magnitude: float = 0.0

    @property
    def scale(self) -> float:
        return self.magnitude

    def contribution(self, n: int) -> float:
        for m, c in self.per_mode:
            if m == n:
                return c
        return 0.0

    def __float__(self) -> float:
        return self.value


def as_weight(w: Weight) -> Callable[[np.ndarray], np.ndarray]:
    """constants become constant radial functions"""
    if callable(w):
        return w
    c = float(w)
    return lambda r: np.full_like(np.asarray(r, dtype=float), c)


def power_weight(p: float) -> Callable[[np.ndarray], np.ndarray]:
    """r^p"""
    if p == 0:
        return as_weight(1.0)
    return lambda r: np.asarray(r, dtype=float) ** p


def _require_punctured(u: TestFunction, what: str) -> None:
    if not u.is_punctured():
        raise ValidationError(f"{what} needs every support to avoid r = 0", field="support")


def _accumulate(
    u: TestFunction,
    integrands: Callable[[Mode, RadialProfile], List[Callable[[np.ndarray], np.ndarray]]],
    spec: Optional[QuadratureSpec],
) -> FunctionalValue:
    """
    Sum over terms of one or more radial integrals per term.

    integrands(mode, profile) returns callables g(r) (already multiplied by
    psi^(N-1)); their integrals are added.
    """
    per_mode = []
    converged = True
    panels = 0
    magnitude = 0.0
    for mode, profile in u.terms:
        parts = []
        for g in integrands(mode, profile):
            res = integrate_radial(g, profile.support, spec)
            converged = converged and res.converged
            panels += res.panels_used
            parts.append(res.value)
            magnitude += abs(res.value)
        per_mode.append((mode.n, math.fsum(parts)))
    value = math.fsum(c for _, c in per_mode)
    if not converged:
        logger.warning(f"quadrature did not converge for some mode of {u.modes}")
    return FunctionalValue(
        value=value,
        per_mode=tuple(per_mode),
        quadrature_converged=converged,
        panels=panels,
        magnitude=magnitude,
    )


def dirichlet(u: TestFunction, V: Weight = 1.0, spec: Optional[QuadratureSpec] = None) -> FunctionalValue:
    """
    int V |grad u|^2 dv = sum_n int V (a_n'^2 + lambda_n a_n^2 / psi^2) psi^(N-1) dr
    """
    M, V = u.manifold, as_weight(V)
    if any(mode.eigenvalue > 0 for mode, _ in u.terms):
        _require_punctured(u, "dirichlet")
    N = M.dimension

    def build(mode, p):
        lam = mode.eigenvalue

        def g(r):
            psi = M.psi(r)
            a, da = p.eval(r), p.deriv(r)
            return V(r) * (da * da + lam * a * a / (psi * psi)) * psi ** (N - 1)

        return [g]

    return _accumulate(u, build, spec)


def radial_dirichlet(u: TestFunction, V: Weight = 1.0, spec: Optional[QuadratureSpec] = None) -> FunctionalValue:
    """int V (du/dr)^2 dv = sum_n int V a_n'^2 psi^(N-1) dr"""
    M, V = u.manifold, as_weight(V)
    N = M.dimension

    def build(mode, p):
        return [lambda r: V(r) * p.deriv(r) ** 2 * M.psi(r) ** (N - 1)]

    return _accumulate(u, build, spec)


def weighted_mass(u: TestFunction, weight: Weight, spec: Optional[QuadratureSpec] = None) -> FunctionalValue:
    """int weight u^2 dv = sum_n int weight a_n^2 psi^(N-1) dr"""
    M, w = u.manifold, as_weight(weight)
    N = M.dimension

    def build(mode, p):
        return [lambda r: w(r) * p.eval(r) ** 2 * M.psi(r) ** (N - 1)]

    return _accumulate(u, build, spec)


def mass(u: TestFunction, W: Weight = 1.0, spec: Optional[QuadratureSpec] = None) -> FunctionalValue:
    """int W u^2 dv"""
    return weighted_mass(u, W, spec)


def mass_over_psi2(u: TestFunction, V: Weight = 1.0, spec: Optional[QuadratureSpec] = None) -> FunctionalValue:
    """
    int V u^2 / psi^2 dv = sum_n int V a_n^2 psi^(N-3) dr

    For N = 2 the integrand behaves like 1/r at the pole, so u must avoid r = 0.
    """
    _require_punctured(u, "mass_over_psi2")
    M, V = u.manifold, as_weight(V)
    N = M.dimension

    def build(mode, p):
        def g(r):
            psi = M.psi(r)
            return V(r) * p.eval(r) ** 2 * psi ** (N - 1) / (psi * psi)

        return [g]

    return _accumulate(u, build, spec)


def remainder(
    u: TestFunction,
    V: Weight,
    pair: "BesselPair",
    gradient: str = "radial",
    spec: Optional[QuadratureSpec] = None,
) -> FunctionalValue:
    """
    Ground-state remainder int V f^2 |grad(u/f)|^2 dv.

    gradient="radial": sum_n int V f^2 (d/dr(a_n/f))^2 psi^(N-1) dr, written as
    V (a_n' - a_n f'/f)^2 so f^2 is never formed.
    gradient="full": adds sum_n lambda_n int V a_n^2 / psi^2 psi^(N-1) dr.

    Raises:
        ValidationError: unknown gradient or pair without a solution
    """
    if gradient not in GRADIENTS:
        raise ValidationError(f"gradient must be one of {GRADIENTS}, got {gradient!r}", field="gradient")
    if pair.log_derivative is None:
        raise ValidationError(f"pair {pair.name!r} has no positive solution", field="pair")
    _require_punctured(u, "remainder")
    M, V = u.manifold, as_weight(V)
    N = M.dimension
    logf = pair.log_derivative
    full = gradient == "full"

    def build(mode, p):
        lam = mode.eigenvalue if full else 0

        def g(r):
            psi = M.psi(r)
            a = p.eval(r)
            d = p.deriv(r) - a * logf(r)
            return V(r) * (d * d + lam * a * a / (psi * psi)) * psi ** (N - 1)

        return [g]

    return _accumulate(u, build, spec)


def coth_term(u: TestFunction, V: Weight, pair: "BesselPair", spec: Optional[QuadratureSpec] = None) -> FunctionalValue:
    """
    int V (f'/f)(psi'/psi - 1/r) u^2 dv

    On H^N the bracket is coth r - 1/r; it vanishes identically for psi = r.
    """
    if pair.log_derivative is None:
        raise ValidationError(f"pair {pair.name!r} has no positive solution", field="pair")
    _require_punctured(u, "coth_term")
    M, V = u.manifold, as_weight(V)
    N = M.dimension
    logf = pair.log_derivative

    def build(mode, p):
        return [lambda r: V(r) * logf(r) * M.log_psi_excess(r) * p.eval(r) ** 2 * M.psi(r) ** (N - 1)]

    return _accumulate(u, build, spec)


def first_order_square(
    u: TestFunction,
    p_weight: Weight,
    q_weight: Weight,
    spec: Optional[QuadratureSpec] = None,
) -> FunctionalValue:
    """int (p(r) du/dr + q(r) u)^2 dv = sum_n int (p a_n' + q a_n)^2 psi^(N-1) dr"""
    M = u.manifold
    P, Q = as_weight(p_weight), as_weight(q_weight)
    N = M.dimension

    def build(mode, prof):
        def g(r):
            s = P(r) * prof.deriv(r) + Q(r) * prof.eval(r)
            return s * s * M.psi(r) ** (N - 1)

        return [g]

    return _accumulate(u, build, spec)


@dataclass(frozen=True)
class CKNTerms:
    """
    dirichlet = int r^-alpha |d_r u|^2 dv
    outer = int r^(alpha - 2 beta + 2) u^2 dv
    inner = int r^-beta u^2 dv
    """

    dirichlet: FunctionalValue
    outer: FunctionalValue
    inner: FunctionalValue

    def values(self) -> Tuple[float, float, float]:
        return (self.dirichlet.value, self.outer.value, self.inner.value)

    @property
    def quadrature_converged(self) -> bool:
        return self.dirichlet.quadrature_converged and self.outer.quadrature_converged and self.inner.quadrature_converged


def ckn_terms(u: TestFunction, alpha: float, beta: float, spec: Optional[QuadratureSpec] = None) -> CKNTerms:
    """the three integrals of the Caffarelli-Kohn-Nirenberg product inequality"""
    if alpha != 0 or beta != 0:
        _require_punctured(u, "ckn_terms")
    return CKNTerms(
        dirichlet=radial_dirichlet(u, power_weight(-alpha), spec),
        outer=weighted_mass(u, power_weight(alpha - 2.0 * beta + 2.0), spec),
        inner=weighted_mass(u, power_weight(-beta), spec),
    )


def divergence_residual(u: TestFunction, m: float, spec: Optional[QuadratureSpec] = None) -> FunctionalValue:
    """
    D_m(u) = int u (du/dr) r^(1-m) dv + ((N-m)/2) int u^2 r^-m dv

    Both integrals by quadrature, combined per mode. Zero for psi = r
    (integration by parts against r^(N-1)); see divergence_defect for the
    closed form on other models.
    """
    _require_punctured(u, "divergence_residual")
    M = u.manifold
    N = M.dimension
    c = (N - m) / 2.0

    def build(mode, p):
        return [
            lambda r: p.eval(r) * p.deriv(r) * np.asarray(r, dtype=float) ** (1.0 - m) * M.psi(r) ** (N - 1),
            lambda r: c * p.eval(r) ** 2 * np.asarray(r, dtype=float) ** (-m) * M.psi(r) ** (N - 1),
        ]

    return _accumulate(u, build, spec)


def divergence_defect(u: TestFunction, m: float, spec: Optional[QuadratureSpec] = None) -> FunctionalValue:
    """
    Closed form of divergence_residual after integrating by parts:

        D_m(u) = -((N-1)/2) int u^2 r^-m (r psi'/psi - 1) dv
    """
    _require_punctured(u, "divergence_defect")
    M = u.manifold
    N = M.dimension

    def build(mode, p):
        def g(r):
            r = np.asarray(r, dtype=float)
            return -(N - 1) / 2.0 * p.eval(r) ** 2 * r ** (1.0 - m) * M.log_psi_excess(r) * M.psi(r) ** (N - 1)

        return [g]

    return _accumulate(u, build, spec)
