"""
Bessel pairs: catalog, evaluation and validation.

A pair (V, W) with candidate solution f is a Bessel pair on (0, R) when

    (r^(N-1) V f')' + r^(N-1) W f = 0,   f > 0 on (0, R).

The catalog ships analytic f, f', f'':
    - power_pair(N, alpha): V = r^-alpha, W = ((N-alpha-2)/2)^2 r^(-alpha-2), f = r^-((N-alpha-2)/2)
    - poincare_pair(N, lam): V = 1, W = W_lambda, f = Psi_lambda
    - hardy_pair(N, c): V = 1, W = c / r^2

solve_pair() integrates user pairs numerically (scipy.integrate.solve_ivp)
and reports the first sign change of the solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ValidationError
from .geometry import coth_minus_inv, validate_dimension
from .logging_config import get_logger

logger = get_logger(__name__)

_LN2 = math.log(2.0)


def _positive_radius(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValidationError(f"radius must be > 0, got {np.min(r)}", field="r")
    return r


def log_sinh_over_r(r):
    """log(sinh(r)/r) for r > 0, without overflow for large r"""
    r = np.asarray(r, dtype=float)
    small = r < 1.0
    rs = np.where(small, r, 1.0)
    rl = np.where(small, 1.0, r)
    return np.where(
        small,
        np.log(np.sinh(rs) / rs),
        rl - _LN2 + np.log1p(-np.exp(-2.0 * rl)) - np.log(rl),
    )


def _inv_sinh2(r):
    """1/sinh(r)^2, 0 beyond overflow"""
    with np.errstate(over="ignore"):
        s = np.sinh(np.asarray(r, dtype=float))
        return 1.0 / (s * s)


@dataclass(frozen=True)
class PoincareWeight:
    """
    Spectral parameter lam in [0, ((N-1)/2)^2] of the Poincare family.

    gamma = sqrt((N-1)^2 - 4 lam), h = (gamma + 1)/2, k = (N - 1 + gamma)/2
    """

    N: int
    lam: float
    gamma: float
    h: float

    @classmethod
    def of(cls, N: int, lam: float) -> "PoincareWeight":
        N = validate_dimension(N)
        lam = float(lam)
        lam1 = ((N - 1) / 2.0) ** 2
        if not (0.0 <= lam <= lam1):
            raise ValidationError(f"lambda must lie in [0, {lam1:g}] for N={N}, got {lam}", field="lambda")
        gamma = math.sqrt(max((N - 1) ** 2 - 4.0 * lam, 0.0))
        return cls(N=N, lam=lam, gamma=gamma, h=(gamma + 1.0) / 2.0)

    @property
    def k(self) -> float:
        return (self.N - 1 + self.gamma) / 2.0

    @property
    def lambda1(self) -> float:
        return ((self.N - 1) / 2.0) ** 2


def psi_log_derivative(pw: PoincareWeight, r):
    """Psi'/Psi = -(N-2)/(2r) - k (coth r - 1/r)"""
    r = _positive_radius(r)
    return -(pw.N - 2) / (2.0 * r) - pw.k * coth_minus_inv(r)


def bracket_psi_second(pw: PoincareWeight, r, displayed: bool = False):
    """
    Psi''/Psi from the bracket

        k^2 + (gamma^2 - 1)/(4 r^2) + k (N + 1 + gamma)/(2 sinh^2 r) - 2 h k coth(r)/r

    displayed=True uses (gamma^2 - 1)/r^2 for the second coefficient, which
    only agrees for gamma = 1.
    """
    r = _positive_radius(r)
    N, g, h, k = pw.N, pw.gamma, pw.h, pw.k
    c2 = (g * g - 1.0) if displayed else (g * g - 1.0) / 4.0
    with np.errstate(over="ignore"):
        coth = 1.0 / np.tanh(r)
    return k * k + c2 / (r * r) + k * (N + 1.0 + g) / 2.0 * _inv_sinh2(r) - 2.0 * h * k * coth / r


def psi_lambda(pw: PoincareWeight, r):
    """
    (Psi, Psi', Psi'') at r > 0, Psi = r^(-(N-2)/2) (sinh r / r)^(-k).

    Raises:
        ValidationError: r <= 0
    """
    r = _positive_radius(r)
    psi = np.exp(-(pw.N - 2) / 2.0 * np.log(r) - pw.k * log_sinh_over_r(r))
    dpsi = psi * psi_log_derivative(pw, r)
    d2psi = psi * bracket_psi_second(pw, r)
    return psi, dpsi, d2psi


def w_lambda(pw: PoincareWeight, r):
    """
    W_lambda = lam + h^2/r^2 + ((N-2)^2/4 - h^2)/sinh^2 r
               + (gamma h / r + (N-1) Psi'/Psi) (coth r - 1/r)
    """
    r = _positive_radius(r)
    N, g, h = pw.N, pw.gamma, pw.h
    return (
        pw.lam
        + h * h / (r * r)
        + ((N - 2) ** 2 / 4.0 - h * h) * _inv_sinh2(r)
        + (g * h / r + (N - 1) * psi_log_derivative(pw, r)) * coth_minus_inv(r)
    )


@dataclass(frozen=True)
class BesselPair:
    """
    Radial weights (V, W) of the pair (r^(N-1) V, r^(N-1) W) with solution f.

    f, f_prime, f_second and log_derivative (f'/f) are None when no positive
    solution is known in closed form.
    """

    N: int
    V: Callable
    V_prime: Callable
    W: Callable
    f: Optional[Callable] = None
    f_prime: Optional[Callable] = None
    f_second: Optional[Callable] = None
    log_derivative: Optional[Callable] = None
    interval: Tuple[float, float] = (0.0, math.inf)
    name: str = "custom"
    parameters: dict = field(default_factory=dict, compare=False)

    def has_solution(self) -> bool:
        return self.f is not None

    def to_dict(self) -> dict:
        return {"pair": self.name, "N": self.N, "interval": list(self.interval), **self.parameters}


def power_pair(N: int, alpha: float) -> BesselPair:
    """(r^(N-1) r^-alpha, r^(N-1) ((N-alpha-2)/2)^2 r^(-alpha-2)), f = r^-s, s = (N-alpha-2)/2"""
    N = validate_dimension(N)
    alpha = float(alpha)
    s = (N - alpha - 2.0) / 2.0
    c = s * s

    def _r(r):
        return np.asarray(r, dtype=float)

    return BesselPair(
        N=N,
        V=lambda r: _r(r) ** -alpha,
        V_prime=lambda r: -alpha * _r(r) ** (-alpha - 1.0),
        W=lambda r: c * _r(r) ** (-alpha - 2.0),
        f=lambda r: _r(r) ** -s,
        f_prime=lambda r: -s * _r(r) ** (-s - 1.0),
        f_second=lambda r: s * (s + 1.0) * _r(r) ** (-s - 2.0),
        log_derivative=lambda r: -s / _r(r),
        name="power",
        parameters={"alpha": alpha, "constant": c},
    )


def poincare_pair(N: int, lam: float) -> BesselPair:
    """(r^(N-1), r^(N-1) W_lambda) with solution Psi_lambda"""
    pw = PoincareWeight.of(N, lam)
    return BesselPair(
        N=pw.N,
        V=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        V_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        W=lambda r: w_lambda(pw, r),
        f=lambda r: psi_lambda(pw, r)[0],
        f_prime=lambda r: psi_lambda(pw, r)[1],
        f_second=lambda r: psi_lambda(pw, r)[2],
        log_derivative=lambda r: psi_log_derivative(pw, r),
        name="poincare",
        parameters={"lambda": pw.lam, "gamma": pw.gamma, "h": pw.h},
    )


def hardy_pair(N: int, c: float) -> BesselPair:
    """
    V = 1, W = c / r^2.

    For c <= (N-2)^2/4 the solution f = r^-s with s the smaller root of
    s^2 - (N-2) s + c = 0 is attached; above the threshold no positive
    solution exists and f is None.
    """
    N = validate_dimension(N)
    c = float(c)
    disc = (N - 2) ** 2 - 4.0 * c
    kw = {}
    if disc >= 0:
        s = ((N - 2) - math.sqrt(disc)) / 2.0
        kw = dict(
            f=lambda r: np.asarray(r, dtype=float) ** -s,
            f_prime=lambda r: -s * np.asarray(r, dtype=float) ** (-s - 1.0),
            f_second=lambda r: s * (s + 1.0) * np.asarray(r, dtype=float) ** (-s - 2.0),
            log_derivative=lambda r: -s / np.asarray(r, dtype=float),
        )
    return BesselPair(
        N=N,
        V=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        V_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        W=lambda r: c / np.asarray(r, dtype=float) ** 2,
        name="hardy",
        parameters={"constant": c},
        **kw,
    )


def make_pair(name: str, N: int, lam: float = 0.0, alpha: float = 0.0, c: float = 0.0) -> BesselPair:
    """return the catalog pair selected by the config key `pair`"""
    if name == "poincare":
        return poincare_pair(N, lam)
    if name == "power":
        return power_pair(N, alpha)
    if name == "hardy":
        return hardy_pair(N, c)
    raise ValidationError(f"unknown pair {name!r}, expect one of {get_allowed_pairs()}", field="pair")


def get_allowed_pairs() -> list:
    """
    return catalog pair names
    """
    return ["poincare", "power", "hardy"]


@dataclass(frozen=True)
class PairValidation:
    """max relative ODE residual over the grid and positivity of f"""

    residual: float
    positive: bool
    nonpositive_at: Optional[float] = None
    worst_at: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "positive": self.positive,
            "nonpositive_at": self.nonpositive_at,
            "worst_at": self.worst_at,
        }


def validate_pair(bp: BesselPair, grid: Sequence[float]) -> PairValidation:
    """
    Relative residual of (r^(N-1) V f')' + r^(N-1) W f = 0 on grid.

    The outer derivative is expanded by the product rule and the whole
    equation divided by r^(N-1):

        res = (N-1)/r V f' + V' f' + V f'' + W f

    and each point is scaled by |V f''| + |W f| plus a floor of a few
    ulps of f. A non-positive f is reported in `positive`, separately
    from the residual.

    Raises:
        ValidationError: pair without solution, or grid outside (0, R)
    """
    if not bp.has_solution():
        raise ValidationError(f"pair {bp.name!r} has no closed-form solution", field="pair")
    r = _positive_radius(np.sort(np.asarray(grid, dtype=float)))
    lo, hi = bp.interval
    if r[0] <= lo or r[-1] >= hi:
        raise ValidationError(f"grid must lie inside {bp.interval}", field="grid")

    V, dV, W = bp.V(r), bp.V_prime(r), bp.W(r)
    f, df, d2f = bp.f(r), bp.f_prime(r), bp.f_second(r)
    terms = np.stack([(bp.N - 1) / r * V * df, dV * df, V * d2f, W * f])
    magnitude = np.abs(V * d2f) + np.abs(W * f)
    floor = 16.0 * np.finfo(float).eps * np.maximum(np.abs(f), np.finfo(float).tiny)
    rel = np.abs(terms.sum(axis=0)) / (magnitude + floor)

    nonpos = ~(f > 0)
    nonpositive_at = float(r[nonpos][0]) if nonpos.any() else None
    if nonpositive_at is not None:
        logger.warning(f"validate_pair({bp.name}): f <= 0 at r={nonpositive_at}")
    iworst = int(np.argmax(rel))
    result = PairValidation(
        residual=float(rel[iworst]),
        positive=nonpositive_at is None,
        nonpositive_at=nonpositive_at,
        worst_at=float(r[iworst]),
    )
    logger.debug(f"validate_pair({bp.name}, {bp.parameters}): {result}")
    return result


@dataclass
class PairSolution:
    """
    Numerical solution of (r^(N-1) V y')' + r^(N-1) W y = 0.

    flagged lists (a, b) ranges the integrator could not cover.
    """

    r: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    sign_change: Optional[float]
    flagged: List[Tuple[float, float]]

    @property
    def positive(self) -> bool:
        return self.sign_change is None and bool(np.all(self.y > 0))


def solve_pair(
    V: Callable,
    W: Callable,
    interval: Tuple[float, float],
    r0: float,
    y0: float,
    dy0: float,
    N: int,
    grid: Optional[Sequence[float]] = None,
    rtol: float = 1.0e-11,
    atol: float = 1.0e-14,
) -> PairSolution:
    """
    Integrate the first-order system for (y, p = r^(N-1) V y') from r0.

    The solution is carried forward to interval[1] and backward to
    interval[0] with DOP853. The first root of y (closest to r0 on either
    side) is returned as sign_change. A failed integration keeps the partial
    solution and flags the range it did not reach.

    Args:
        V, W: radial weights (reduced, without r^(N-1))
        interval: (a, b), both finite
        r0: interior start point
        y0, dy0: y(r0), y'(r0)
        N: dimension in the r^(N-1) factors
        grid: output radii (default 400 geometric points in the interval)
    """
    N = validate_dimension(N)
    a, b = float(interval[0]), float(interval[1])
    if not (0.0 < a <= r0 <= b < math.inf):
        raise ValidationError(f"need 0 < a <= r0 <= b < inf, got a={a}, r0={r0}, b={b}", field="interval")
    if grid is None:
        grid = np.geomspace(a, b, 400)
    grid = np.sort(np.asarray(grid, dtype=float))

    def rhs(r, z):
        w = r ** (N - 1)
        return [z[1] / (w * V(r)), -w * W(r) * z[0]]

    def crossing(r, z):
        return z[0]

    crossing.terminal = False

    p0 = r0 ** (N - 1) * float(V(r0)) * dy0
    rs, ys, ps, flagged = [], [], [], []
    roots = []
    for end, part in ((b, grid[grid >= r0]), (a, grid[grid < r0][::-1])):
        if end == r0:
            continue
        sol = solve_ivp(
            rhs,
            (r0, end),
            [y0, p0],
            method="DOP853",
            t_eval=part if part.size else np.array([end]),
            events=crossing,
            rtol=rtol,
            atol=atol,
        )
        if sol.status != 0:
            reached = float(sol.t[-1]) if sol.t.size else r0
            logger.warning(f"solve_pair: integration stopped at r={reached} ({sol.message})")
            flagged.append((min(reached, end), max(reached, end)))
        if sol.t_events[0].size:
            roots.append(float(sol.t_events[0][0]))
        rs.append(sol.t)
        ys.append(sol.y[0])
        ps.append(sol.y[1])

    r = np.concatenate(rs) if rs else np.empty(0)
    order = np.argsort(r, kind="stable")
    r = r[order]
    y = np.concatenate(ys)[order] if ys else np.empty(0)
    p = np.concatenate(ps)[order] if ps else np.empty(0)
    dy = p / (r ** (N - 1) * V(r)) if r.size else p

    sign_change = min(roots, key=lambda t: abs(t - r0)) if roots else None
    if sign_change is not None:
        logger.info(f"solve_pair: sign change at r={sign_change:.6g}")
    return PairSolution(r=r, y=y, dy=dy, sign_change=sign_change, flagged=flagged)
