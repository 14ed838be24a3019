"""
Assembly of the Hardy, Poincare-Hardy and CKN identities and inequalities.

Each verify_* function evaluates the functionals of a test function, combines
them with the constants of the statement and returns a VerificationReport:

    identity:   pass iff |lhs - rhs| <= IDENTITY_TOL * scale
    inequality: pass iff lhs - rhs >= -INEQUALITY_TOL * scale
    measured:   reported value only, never fails

scale is the sum of the absolute values of the terms. Mode-wise bookkeeping
(surplus sums, displayed variants, divergence residuals) goes into the
report's auxiliary map.

Targets:
    eq12    Poincare-Hardy identity with Psi_lambda (H^N)
    thm21   subspace inequality for a Bessel pair
    thm22   angular part of the weighted Dirichlet energy
    cor23   improved Poincare-Hardy inequality on H_j (H^N)
    cor24   weighted Hardy inequality on H_j
    ckn25   CKN product inequality
    ckn26   CKN identity with explicit remainder
    model27 thm21 on a Riemannian model
    model28 thm22 on a Riemannian model
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import functionals as fn
from .besselpairs import BesselPair, PoincareWeight, poincare_pair, power_pair
from .errors import ValidationError
from .geometry import mode_eigenvalue
from .logging_config import get_logger
from .profiles import TestFunction
from .quadrature import DEFAULT_SPEC, QuadratureSpec

logger = get_logger(__name__)

IDENTITY_TOL = 1.0e-6
INEQUALITY_TOL = 1.0e-9
SURPLUS_TOL = 1.0e-8

TARGETS = ("eq12", "thm21", "thm22", "cor23", "cor24", "ckn25", "ckn26", "model27", "model28")
KINDS = ("inequality", "identity", "measured")


def get_allowed_targets() -> list:
    """
    return verification targets accepted by the CLI
    """
    return list(TARGETS)


@dataclass
class VerificationReport:
    """
    Outcome of one verification.

    terms maps a name to the signed contribution that enters lhs or rhs;
    functionals keeps the raw FunctionalValue objects (not serialized).
    """

    target: str
    parameters: Dict[str, object]
    terms: Dict[str, float]
    lhs: float
    rhs: float
    gap_or_residual: float
    kind: str
    verdict: str
    scale: float
    auxiliary: Dict[str, float] = field(default_factory=dict)
    quadrature_converged: bool = True
    quadrature: Dict[str, object] = field(default_factory=dict)
    functionals: Dict[str, fn.FunctionalValue] = field(default_factory=dict, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "parameters": dict(self.parameters),
            "terms": dict(self.terms),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap_or_residual": self.gap_or_residual,
            "kind": self.kind,
            "verdict": self.verdict,
            "scale": self.scale,
            "auxiliary": dict(self.auxiliary),
            "quadrature_converged": self.quadrature_converged,
            "quadrature": dict(self.quadrature),
        }

    def to_json(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _judge(kind: str, value: float, scale: float) -> str:
    if kind == "measured":
        return "measured"
    if kind == "identity":
        return "pass" if abs(value) <= IDENTITY_TOL * scale else "fail"
    return "pass" if value >= -INEQUALITY_TOL * scale else "fail"


def _report(
    target: str,
    u: TestFunction,
    parameters: dict,
    lhs_terms: Dict[str, float],
    rhs_terms: Dict[str, float],
    kind: str,
    values: Dict[str, fn.FunctionalValue],
    spec: Optional[QuadratureSpec],
    auxiliary: Optional[dict] = None,
    extra_checks: bool = True,
) -> VerificationReport:
    """build the report from signed lhs/rhs contributions"""
    lhs = math.fsum(lhs_terms.values())
    rhs = math.fsum(rhs_terms.values())
    gap = lhs - rhs
    terms = {**lhs_terms, **rhs_terms}
    scale = math.fsum(abs(v) for v in terms.values())
    verdict = _judge(kind, gap, scale)
    if not extra_checks and verdict == "pass":
        verdict = "fail"
    converged = all(v.quadrature_converged for v in values.values())
    spec = spec or DEFAULT_SPEC
    params = {
        "N": u.N,
        "manifold": u.manifold.name,
        "label": u.manifold.label,
        "j": u.subspace_index,
        "modes": u.modes,
        **parameters,
    }
    report = VerificationReport(
        target=target,
        parameters=params,
        terms=terms,
        lhs=lhs,
        rhs=rhs,
        gap_or_residual=gap,
        kind=kind,
        verdict=verdict,
        scale=scale,
        auxiliary=dict(auxiliary or {}),
        quadrature_converged=converged,
        quadrature={
            "rel_tol": spec.rel_tol,
            "abs_tol": spec.abs_tol,
            "base_rule": spec.base_rule,
            "panels": sum(v.panels for v in values.values()),
        },
        functionals=dict(values),
    )
    logger.info(f"{target}: {kind} gap={gap:.6e} scale={scale:.6e} -> {verdict}")
    if not converged:
        logger.warning(f"{target}: quadrature did not converge")
    return report


def _require_hyperbolic(u: TestFunction, target: str) -> None:
    if u.manifold.name != "hyperbolic":
        raise ValidationError(f"{target} is stated on the hyperbolic space, got {u.manifold.name}", field="manifold")


def _subspace_constant(u: TestFunction, j: Optional[int]) -> int:
    """(j+1)(N+j-1) = lambda_(j+1), after checking u in H_j"""
    if j is None:
        j = u.subspace_index
    if j < -1:
        raise ValidationError(f"subspace index must be >= -1, got {j}", field="j")
    low = [n for n in u.modes if n < j + 1]
    if low:
        raise ValidationError(f"modes {low} are not in H_{j}", field="modes")
    return mode_eigenvalue(u.N, j + 1)


def _surplus(u: TestFunction, mop: fn.FunctionalValue, c_j: float) -> float:
    """sum_n (lambda_n - c_j) int V a_n^2 / psi^2 dv"""
    return math.fsum((mode.eigenvalue - c_j) * mop.contribution(mode.n) for mode, _ in u.terms)


def _check_interval(u: TestFunction, pair: BesselPair) -> None:
    if u.is_zero:
        return
    s0, s1 = u.support()
    lo, hi = pair.interval
    if not (lo <= s0 and s1 <= hi):
        raise ValidationError(f"support ({s0}, {s1}) leaves the pair interval {pair.interval}", field="support")


def _radial_excess_weight(u: TestFunction, p: float):
    """(psi'/psi - 1/r) r^p; on H^N equals (r coth r - 1)/r^(1-p)"""
    M = u.manifold
    return lambda r: M.log_psi_excess(r) * np.asarray(r, dtype=float) ** p


def verify_eq12(u: TestFunction, lam: float, spec: Optional[QuadratureSpec] = None) -> VerificationReport:
    """
    Poincare-Hardy identity on H^N with the full-gradient remainder:

        int |grad u|^2 = lam int u^2 + h^2 int u^2/r^2 + ((N-2)^2/4 - h^2) int u^2/sinh^2
                         + gamma h int (r coth r - 1)/r^2 u^2 + int Psi^2 |grad(u/Psi)|^2
    """
    _require_hyperbolic(u, "eq12")
    pw = PoincareWeight.of(u.N, lam)
    pair = poincare_pair(u.N, lam)
    N, g, h = u.N, pw.gamma, pw.h
    values = {
        "dirichlet": fn.dirichlet(u, 1.0, spec),
        "mass": fn.mass(u, 1.0, spec),
        "hardy": fn.weighted_mass(u, fn.power_weight(-2.0), spec),
        "sinh": fn.mass_over_psi2(u, 1.0, spec),
        "coth": fn.weighted_mass(u, _radial_excess_weight(u, -1.0), spec),
        "remainder": fn.remainder(u, 1.0, pair, "full", spec),
    }
    rhs = {
        "lambda_mass": lam * values["mass"].value,
        "hardy_term": h * h * values["hardy"].value,
        "sinh_term": ((N - 2) ** 2 / 4.0 - h * h) * values["sinh"].value,
        "coth_term": g * h * values["coth"].value,
        "remainder": values["remainder"].value,
    }
    return _report(
        "eq12",
        u,
        {"lambda": pw.lam, "gamma": g, "h": h},
        {"dirichlet": values["dirichlet"].value},
        rhs,
        "identity",
        values,
        spec,
    )


def _subspace_inequality(
    target: str, u: TestFunction, pair: BesselPair, j: Optional[int], spec: Optional[QuadratureSpec]
) -> VerificationReport:
    c_j = _subspace_constant(u, j)
    _check_interval(u, pair)
    N = u.N
    V = pair.V
    values = {
        "dirichlet": fn.dirichlet(u, V, spec),
        "mass_W": fn.mass(u, pair.W, spec),
        "mass_over_psi2": fn.mass_over_psi2(u, V, spec),
        "remainder": fn.remainder(u, V, pair, "radial", spec),
        "coth": fn.coth_term(u, V, pair, spec),
    }
    rhs = {
        "mass_W": values["mass_W"].value,
        "subspace_term": c_j * values["mass_over_psi2"].value,
        "remainder": values["remainder"].value,
        "coth_term": -(N - 1) * values["coth"].value,
    }
    lhs = {"dirichlet": values["dirichlet"].value}
    gap = math.fsum(lhs.values()) - math.fsum(rhs.values())
    surplus = _surplus(u, values["mass_over_psi2"], c_j)
    scale = math.fsum(abs(v) for v in list(lhs.values()) + list(rhs.values()))
    consistent = abs(gap - surplus) <= SURPLUS_TOL * scale
    if not consistent:
        logger.warning(f"{target}: gap {gap:.6e} differs from the mode-wise surplus {surplus:.6e}")
    return _report(
        target,
        u,
        {"pair": pair.name, **pair.parameters, "subspace_constant": c_j},
        lhs,
        rhs,
        "inequality",
        values,
        spec,
        auxiliary={"surplus": surplus, "surplus_residual": gap - surplus},
        extra_checks=consistent,
    )


def verify_thm21(
    u: TestFunction, pair: BesselPair, j: Optional[int] = None, spec: Optional[QuadratureSpec] = None
) -> VerificationReport:
    """
    int V |grad u|^2 >= int W u^2 + (j+1)(N+j-1) int V u^2/psi^2
                        + int V f^2 |grad_r(u/f)|^2 - (N-1) int V (f'/f)(psi'/psi - 1/r) u^2

    The gap must equal the mode-wise surplus
    sum_n (lambda_n - (j+1)(N+j-1)) int V a_n^2/psi^2 to SURPLUS_TOL * scale.
    """
    return _subspace_inequality("thm21", u, pair, j, spec)


def verify_model(
    u: TestFunction, pair: BesselPair, j: Optional[int] = None, spec: Optional[QuadratureSpec] = None
) -> VerificationReport:
    """verify_thm21 on any Riemannian model (coth r -> psi'/psi, sinh -> psi)"""
    return _subspace_inequality("model27", u, pair, j, spec)


def _angular_identity(
    target: str, u: TestFunction, V: fn.Weight, j: Optional[int], spec: Optional[QuadratureSpec]
) -> VerificationReport:
    c_j = _subspace_constant(u, j)
    values = {
        "dirichlet": fn.dirichlet(u, V, spec),
        "radial_dirichlet": fn.radial_dirichlet(u, V, spec),
        "mass_over_psi2": fn.mass_over_psi2(u, V, spec),
    }
    mop = values["mass_over_psi2"]
    lhs = {"dirichlet": values["dirichlet"].value, "radial_dirichlet": -values["radial_dirichlet"].value}
    rhs_exact = math.fsum(mode.eigenvalue * mop.contribution(mode.n) for mode, _ in u.terms)
    lhs_value = math.fsum(lhs.values())
    exact_residual = lhs_value - rhs_exact
    scale = math.fsum(abs(v) for v in lhs.values()) + abs(rhs_exact)
    exact_ok = abs(exact_residual) <= SURPLUS_TOL * scale
    if not exact_ok:
        logger.warning(f"{target}: mode-wise identity residual {exact_residual:.6e}")
    return _report(
        target,
        u,
        {"subspace_constant": c_j},
        lhs,
        {"subspace_term": c_j * mop.value},
        "inequality",
        values,
        spec,
        auxiliary={
            "rhs_exact": rhs_exact,
            "exact_residual": exact_residual,
            "surplus": _surplus(u, mop, c_j),
        },
        extra_checks=exact_ok,
    )


def verify_thm22(
    u: TestFunction, V: fn.Weight = 1.0, j: Optional[int] = None, spec: Optional[QuadratureSpec] = None
) -> VerificationReport:
    """
    int V |grad u|^2 - int V (du/dr)^2 against (j+1)(N+j-1) int V u^2/psi^2.

    The exact statement is the mode-wise identity with sum_n lambda_n; it is
    checked to SURPLUS_TOL * scale. The stated form with the subspace constant
    is reported as an inequality (equality when only n = j+1 is present).
    """
    return _angular_identity("thm22", u, V, j, spec)


def verify_model_identity(
    u: TestFunction, V: fn.Weight = 1.0, j: Optional[int] = None, spec: Optional[QuadratureSpec] = None
) -> VerificationReport:
    """verify_thm22 on any Riemannian model"""
    return _angular_identity("model28", u, V, j, spec)


def verify_cor23(
    u: TestFunction, lam: float, j: Optional[int] = None, spec: Optional[QuadratureSpec] = None
) -> VerificationReport:
    """
    int |grad u|^2 >= lam int u^2 + h^2 int u^2/r^2 + ((N/2)^2 - h^2 + j(N+j)) int u^2/sinh^2
                      + gamma h int (r coth r - 1)/r^2 u^2 + remainder

    The verdict uses the radial-gradient remainder. The same inequality with
    the full-gradient remainder is kept in
    auxiliary["displayed_full_gradient_gap"]; it is negative for every u != 0
    once j >= 0.
    """
    _require_hyperbolic(u, "cor23")
    c_j = _subspace_constant(u, j)
    if j is None:
        j = u.subspace_index
    pw = PoincareWeight.of(u.N, lam)
    pair = poincare_pair(u.N, lam)
    N, g, h = u.N, pw.gamma, pw.h
    values = {
        "dirichlet": fn.dirichlet(u, 1.0, spec),
        "mass": fn.mass(u, 1.0, spec),
        "hardy": fn.weighted_mass(u, fn.power_weight(-2.0), spec),
        "sinh": fn.mass_over_psi2(u, 1.0, spec),
        "coth": fn.weighted_mass(u, _radial_excess_weight(u, -1.0), spec),
        "remainder": fn.remainder(u, 1.0, pair, "radial", spec),
    }
    coefficient = (N / 2.0) ** 2 - h * h + j * (N + j)
    rhs = {
        "lambda_mass": lam * values["mass"].value,
        "hardy_term": h * h * values["hardy"].value,
        "sinh_term": coefficient * values["sinh"].value,
        "coth_term": g * h * values["coth"].value,
        "remainder": values["remainder"].value,
    }
    lhs = {"dirichlet": values["dirichlet"].value}
    angular = math.fsum(mode.eigenvalue * values["sinh"].contribution(mode.n) for mode, _ in u.terms)
    auxiliary = {
        "sinh_coefficient": coefficient,
        "surplus": _surplus(u, values["sinh"], c_j),
        "displayed_full_gradient_gap": lhs["dirichlet"] - math.fsum(rhs.values()) - angular,
    }
    if lam == 0 and j >= 0:
        auxiliary["hardy_h0_gap"] = values["dirichlet"].value - N * N / 4.0 * values["hardy"].value
    return _report(
        "cor23",
        u,
        {"lambda": pw.lam, "gamma": g, "h": h},
        lhs,
        rhs,
        "inequality",
        values,
        spec,
        auxiliary=auxiliary,
    )


def verify_cor24(
    u: TestFunction, alpha: float, j: Optional[int] = None, spec: Optional[QuadratureSpec] = None
) -> VerificationReport:
    """
    int |grad u|^2 / r^alpha >= ((N-alpha-2)/2)^2 int u^2 / r^(alpha+2)
                               + (j+1)(N+j-1) int u^2 / (r^alpha psi^2)
                               + int r^-(N-2) |grad_r(r^((N-alpha-2)/2) u)|^2
                               + ((N-1)(N-alpha-2)/2) int (r psi'/psi - 1)/r^(alpha+2) u^2

    Verified over the support of u (R treated as infinite). The verdict uses
    the radial-gradient middle term; the full-gradient form goes into
    auxiliary["displayed_full_gradient_gap"].
    """
    c_j = _subspace_constant(u, j)
    N = u.N
    alpha = float(alpha)
    pair = power_pair(N, alpha)
    s = (N - alpha - 2.0) / 2.0
    V = fn.power_weight(-alpha)
    values = {
        "dirichlet": fn.dirichlet(u, V, spec),
        "hardy": fn.weighted_mass(u, fn.power_weight(-alpha - 2.0), spec),
        "mass_over_psi2": fn.mass_over_psi2(u, V, spec),
        "remainder": fn.remainder(u, V, pair, "radial", spec),
        "coth": fn.weighted_mass(u, _radial_excess_weight(u, -alpha - 1.0), spec),
    }
    rhs = {
        "hardy_term": s * s * values["hardy"].value,
        "subspace_term": c_j * values["mass_over_psi2"].value,
        "remainder": values["remainder"].value,
        "coth_term": (N - 1) * s * values["coth"].value,
    }
    lhs = {"dirichlet": values["dirichlet"].value}
    mop = values["mass_over_psi2"]
    angular = math.fsum(mode.eigenvalue * mop.contribution(mode.n) for mode, _ in u.terms)
    auxiliary = {
        "hardy_constant": s * s,
        "coth_coefficient": (N - 1) * s,
        "surplus": _surplus(u, mop, c_j),
        "displayed_full_gradient_gap": lhs["dirichlet"] - math.fsum(rhs.values()) - angular,
    }
    return _report(
        "cor24",
        u,
        {"alpha": alpha, "subspace_constant": c_j},
        lhs,
        rhs,
        "inequality",
        values,
        spec,
        auxiliary=auxiliary,
    )


def ckn_constant(N: int, alpha: float, beta: float, displayed: bool = False) -> float:
    """
    max{(N-beta)^2/4, (N-2alpha+beta-4)^2/4}

    displayed=True returns max{(N-beta)^2/4, (N-2alpha-beta-4)^2/4}.
    """
    second = N - 2.0 * alpha - beta - 4.0 if displayed else N - 2.0 * alpha + beta - 4.0
    return max((N - beta) ** 2 / 4.0, second**2 / 4.0)


def _divergence_aux(u: TestFunction, alpha: float, beta: float, spec, values: dict) -> dict:
    values["divergence_beta"] = fn.divergence_residual(u, beta, spec)
    values["divergence_alpha2"] = fn.divergence_residual(u, alpha + 2.0, spec)
    return {
        "divergence_residual_beta": values["divergence_beta"].value,
        "divergence_residual_alpha2": values["divergence_alpha2"].value,
        "divergence_scale_beta": values["divergence_beta"].scale,
        "divergence_scale_alpha2": values["divergence_alpha2"].scale,
    }


def verify_ckn(u: TestFunction, alpha: float, beta: float, spec: Optional[QuadratureSpec] = None) -> VerificationReport:
    """
    (int |d_r u|^2 / r^alpha)(int r^(alpha-2beta+2) u^2) >= C (int u^2 / r^beta)^2

    with C = ckn_constant(N, alpha, beta). Pass/fail on psi = r; on any other
    model the step through the divergence theorem is not exact and the gap
    is reported as measured, together with D_beta(u) and D_(alpha+2)(u).
    """
    N = u.N
    alpha, beta = float(alpha), float(beta)
    terms = fn.ckn_terms(u, alpha, beta, spec)
    D, A, I = terms.values()
    C = ckn_constant(N, alpha, beta)
    C_displayed = ckn_constant(N, alpha, beta, displayed=True)
    values = {"dirichlet": terms.dirichlet, "outer": terms.outer, "inner": terms.inner}
    euclidean = u.manifold.name == "euclidean"
    auxiliary = {
        "constant": C,
        "displayed_constant": C_displayed,
        "displayed_gap": D * A - C_displayed * I * I,
    }
    if not euclidean:
        auxiliary.update(_divergence_aux(u, alpha, beta, spec, values))
    return _report(
        "ckn25",
        u,
        {"alpha": alpha, "beta": beta},
        {"product": D * A},
        {"constant_term": C * I * I},
        "inequality" if euclidean else "measured",
        values,
        spec,
        auxiliary=auxiliary,
    )


def verify_ckn_remainder(
    u: TestFunction, alpha: float, beta: float, spec: Optional[QuadratureSpec] = None
) -> VerificationReport:
    """
    A D - ((N-beta)^2/4) I^2 = A int (r^(-alpha/2) du/dr + t r^(alpha/2-beta+1) u)^2 dv

    with D = int |d_r u|^2 / r^alpha, A = int u^2 r^(alpha-2beta+2),
    I = int u^2 r^-beta and t = ((N-beta)/2) I / A. Identity on psi = r.
    On other models the residual is measured; it equals -(N-beta) I D_beta(u)
    (auxiliary["divergence_prediction"]). The same assembly with -t is kept
    in auxiliary["displayed_minus_residual"].
    """
    N = u.N
    alpha, beta = float(alpha), float(beta)
    terms = fn.ckn_terms(u, alpha, beta, spec)
    D, A, I = terms.values()
    t = (N - beta) / 2.0 * I / A if A != 0 else 0.0
    p_weight = fn.power_weight(-alpha / 2.0)
    q_exp = alpha / 2.0 - beta + 1.0
    plus = fn.first_order_square(u, p_weight, lambda r: t * np.asarray(r, dtype=float) ** q_exp, spec)
    minus = fn.first_order_square(u, p_weight, lambda r: -t * np.asarray(r, dtype=float) ** q_exp, spec)
    values = {
        "dirichlet": terms.dirichlet,
        "outer": terms.outer,
        "inner": terms.inner,
        "square": plus,
        "square_minus": minus,
    }
    lhs = {"product": D * A, "constant_term": -((N - beta) ** 2) / 4.0 * I * I}
    rhs = {"remainder": A * plus.value}
    euclidean = u.manifold.name == "euclidean"
    lhs_value = math.fsum(lhs.values())
    auxiliary = {"t": t, "displayed_minus_residual": lhs_value - A * minus.value}
    if not euclidean:
        auxiliary.update(_divergence_aux(u, alpha, beta, spec, values))
        auxiliary["divergence_prediction"] = -(N - beta) * I * values["divergence_beta"].value
    return _report(
        "ckn26",
        u,
        {"alpha": alpha, "beta": beta},
        lhs,
        rhs,
        "identity" if euclidean else "measured",
        values,
        spec,
        auxiliary=auxiliary,
    )
