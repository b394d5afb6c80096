"""Rotationally symmetric model geometries and radial potentials.

A model manifold here is ``[0, oo) x S^(d-1)`` carrying the metric
``dr^2 + w(r)^2 dTheta^2`` with a pole at ``r = 0`` (``w(0) = 0``,
``w'(0) = 1``).  Every geometric quantity the package needs -- the two
curvature eigenvalues, the radial Hessian of a potential, the drift of the
radial diffusion -- reduces to scalar functions of ``r`` built from ``w``
and ``V``.

Strongly flaring warps (``w ~ r e^(k r^2)``) overflow float64 well inside
the working radius, so manifolds expose logarithmic/ratio accessors
(``log_w``, ``dlog_w = w'/w``, ``d2w_over_w``, ``rt = r w'/w``,
``curv_tan = (1 - w'^2)/w^2``) and downstream code uses only those.  The
raw ``w``, ``dw``, ``d2w`` accessors exist for cross-checks at moderate
radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, ResolutionError

_SQRT2P1 = 1.0 + math.sqrt(2.0)

# relative slack for grid checks whose construction attains equality:
# roundoff must not turn an exact boundary case into a violation
_EQ_SLACK = 1.0e-12


def _as_f(r):
    return np.asarray(r, dtype=float)


def _require_positive(r, what="radius"):
    r = _as_f(r)
    if np.any(r <= 0.0):
        raise DomainError(f"{what} must be > 0 (pole values are limits, not evaluations)")
    return r


def default_grid(lo: float = 1e-3, hi: float = 50.0, n: int = 2000) -> np.ndarray:
    """Geometric radius grid resolving both the pole region and the tail."""
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True, eq=False)
class ModelManifold:
    """Warped-product geometry determined by the profile ``w``.

    All accessors are vectorized over radius arrays.  ``w/dw/d2w`` may
    overflow for flaring warps; the ratio accessors never do.
    """

    name: str
    dim: int
    w: Callable = field(repr=False)
    dw: Callable = field(repr=False)
    d2w: Callable = field(repr=False)
    log_w: Callable = field(repr=False)
    dlog_w: Callable = field(repr=False)          # w'/w
    d2w_over_w: Callable = field(repr=False)      # w''/w
    rt: Callable = field(repr=False)              # r*w'/w, smooth through the pole
    curv_tan: Callable = field(repr=False)        # (1 - w'^2)/w^2
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 2:
            raise DomainError("dimension must be >= 2")


@dataclass(frozen=True, eq=False)
class RadialPotential:
    """Radial potential V with derivative accessors.

    ``d1_over_r`` is V'(r)/r, finite through the pole because V'(0) = 0;
    the tangential Hessian eigenvalue is d1_over_r * rt, which keeps the
    quadratic-potential case exact in floating point.
    """

    name: str
    v: Callable = field(repr=False)
    d1: Callable = field(repr=False)
    d1_over_r: Callable = field(repr=False)
    d2: Callable = field(repr=False)
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioConditions:
    """Constants of the pointwise curvature/Hessian conditions.

    sigma, c: quadratic Ricci lower-bound parameters (Ric >= -(c + sigma^2 r^2));
    delta: Hessian gap (-Hess_V >= delta outside radius r0);
    theta: weight of the growth-domination condition, must lie in
    (0, 1/(1+sqrt(2))) when the growth pathway is used;
    phi/psi: optional growth functions for the Hessian/Ricci growth conditions.
    """

    sigma: float
    c: float
    delta: float
    r0: float = 0.0
    theta: float | None = None
    phi: Callable | None = field(default=None, repr=False, compare=False)
    psi: Callable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.sigma < 0.0:
            raise DomainError("sigma must be >= 0")
        if self.c < 0.0:
            raise DomainError("c must be >= 0")
        if self.delta <= 0.0:
            raise DomainError("delta must be > 0")
        if self.r0 < 0.0:
            raise DomainError("r0 must be >= 0")
        if self.theta is not None and not 0.0 < self.theta < 1.0 / _SQRT2P1:
            raise DomainError("theta must lie in (0, 1/(1+sqrt(2)))")


# ---------------------------------------------------------------------------
# built-in manifolds


def _zeros(r):
    return np.zeros_like(_as_f(r))


def _ones(r):
    return np.ones_like(_as_f(r))


def flat(dim: int = 2) -> ModelManifold:
    """Euclidean space in polar coordinates: w(r) = r."""
    return ModelManifold(
        name="flat", dim=dim,
        w=_as_f, dw=_ones, d2w=_zeros,
        log_w=lambda r: np.log(_as_f(r)),
        dlog_w=lambda r: 1.0 / _as_f(r),
        d2w_over_w=_zeros,
        rt=_ones,
        curv_tan=_zeros,
        params={"kind": "flat", "dim": dim},
    )


def _log_sinh(r):
    r = _as_f(r)
    big = r > 20.0
    rs = np.where(big, 1.0, r)
    # exact for moderate r; the shifted form avoids overflow in the tail
    return np.where(big, r - math.log(2.0) + np.log1p(-np.exp(-2.0 * r)),
                    np.log(np.sinh(rs)))


def hyperbolic(dim: int = 2) -> ModelManifold:
    """Constant curvature -1: w(r) = sinh r."""
    return ModelManifold(
        name="hyperbolic", dim=dim,
        w=lambda r: np.sinh(_as_f(r)),
        dw=lambda r: np.cosh(_as_f(r)),
        d2w=lambda r: np.sinh(_as_f(r)),
        log_w=_log_sinh,
        dlog_w=lambda r: 1.0 / np.tanh(_as_f(r)),
        d2w_over_w=_ones,
        rt=lambda r: _as_f(r) / np.tanh(_as_f(r)),
        curv_tan=lambda r: np.full_like(_as_f(r), -1.0),
        params={"kind": "hyperbolic", "dim": dim},
    )


def gauss_warp(k: float = 1.0, dim: int = 2) -> ModelManifold:
    """Flaring surface of revolution: w(r) = r*exp(k r^2), k > 0.

    Curvature grows like -4k^2 r^2, so the Ricci lower bound is quadratic
    with coefficient (2k)^2.  w itself overflows near r ~ 27/sqrt(k); use
    the ratio accessors beyond that.
    """
    if k <= 0.0:
        raise DomainError("k must be > 0")

    def curv_tan(r):
        r = _as_f(r)
        u = 2.0 * k * r * r
        # (1 - w'^2)/w^2 = (expm1(-u) - 2u - u^2)/r^2, stable at small r
        return (np.expm1(-u) - 2.0 * u - u * u) / (r * r)

    return ModelManifold(
        name="gauss_warp", dim=dim,
        w=lambda r: _as_f(r) * np.exp(k * _as_f(r) ** 2),
        dw=lambda r: np.exp(k * _as_f(r) ** 2) * (1.0 + 2.0 * k * _as_f(r) ** 2),
        d2w=lambda r: np.exp(k * _as_f(r) ** 2)
        * (6.0 * k * _as_f(r) + 4.0 * k * k * _as_f(r) ** 3),
        log_w=lambda r: np.log(_as_f(r)) + k * _as_f(r) ** 2,
        dlog_w=lambda r: 1.0 / _as_f(r) + 2.0 * k * _as_f(r),
        d2w_over_w=lambda r: 6.0 * k + 4.0 * k * k * _as_f(r) ** 2,
        rt=lambda r: 1.0 + 2.0 * k * _as_f(r) ** 2,
        curv_tan=curv_tan,
        params={"kind": "gauss_warp", "dim": dim, "k": k},
    )


def power_curv(alpha: float, eps: float, dim: int = 2,
               r_solve: float = 80.0) -> ModelManifold:
    """Warp with prescribed power curvature: w''/w = eps*r^(2*alpha)/(d-1).

    Solved as an ODE for t(r) = r*w'/w and q(r) = log(w/r), both of which
    stay O(1) near the pole where w vanishes.  Below the starting radius a
    series expansion is used; beyond ``r_solve`` the asymptotic growth
    t ~ sqrt(eps/(d-1)) r^(alpha+1) continues the solution (only the sign
    and growth matter out there -- all mass checks live far inside).
    """
    if alpha <= 1.0:
        raise DomainError("alpha must be > 1")
    if eps <= 0.0:
        raise DomainError("eps must be > 0")
    dm1 = dim - 1
    two_a = 2.0 * alpha
    m_exp = two_a + 2.0
    beta = eps / (dm1 * m_exp * (m_exp + 1.0))
    r_lo = 1e-4

    def rhs(r, y):
        t, _ = y
        return (t * (1.0 - t) / r + eps * r ** (two_a + 1.0) / dm1,
                (t - 1.0) / r)

    y0 = (1.0 + m_exp * beta * r_lo ** m_exp, beta * r_lo ** m_exp)
    sol = solve_ivp(rhs, (r_lo, r_solve), y0, method="LSODA",
                    rtol=1e-11, atol=1e-14, dense_output=True)
    if not sol.success:
        raise ResolutionError(f"warp ODE integration failed: {sol.message}")
    interp = sol.sol
    t_end, q_end = float(sol.y[0, -1]), float(sol.y[1, -1])
    a_inf = math.sqrt(eps / dm1)
    t_off = t_end - a_inf * r_solve ** (alpha + 1.0)

    def _tq(r):
        r = _as_f(r)
        scalar = r.ndim == 0
        r = np.atleast_1d(r).astype(float)
        t = np.empty_like(r)
        q = np.empty_like(r)
        lo = r < r_lo
        hi = r > r_solve
        mid = ~(lo | hi)
        if lo.any():
            rm = r[lo] ** m_exp
            t[lo] = 1.0 + m_exp * beta * rm
            q[lo] = beta * rm
        if mid.any():
            tm, qm = interp(r[mid])
            t[mid] = tm
            q[mid] = qm
        if hi.any():
            rp = r[hi] ** (alpha + 1.0)
            t[hi] = a_inf * rp + t_off
            q[hi] = (q_end + a_inf * (rp - r_solve ** (alpha + 1.0)) / (alpha + 1.0)
                     + t_off * np.log(r[hi] / r_solve))
        if scalar:
            return t[0], q[0]
        return t, q

    def rt(r):
        return _tq(r)[0]

    def log_w(r):
        t, q = _tq(r)
        return np.log(_as_f(r)) + q

    def dlog_w(r):
        return _tq(r)[0] / _as_f(r)

    def d2w_over_w(r):
        return eps * _as_f(r) ** two_a / dm1

    def curv_tan(r):
        r = _as_f(r)
        t, q = _tq(r)
        return (np.expm1(-2.0 * q) - (t - 1.0) * (t + 1.0)) / (r * r)

    def w(r):
        return _as_f(r) * np.exp(_tq(r)[1])

    def dw(r):
        t, q = _tq(r)
        return np.exp(q) * t

    def d2w(r):
        return w(r) * d2w_over_w(r)

    return ModelManifold(
        name="power_curv", dim=dim,
        w=w, dw=dw, d2w=d2w, log_w=log_w, dlog_w=dlog_w,
        d2w_over_w=d2w_over_w, rt=rt, curv_tan=curv_tan,
        params={"kind": "power_curv", "dim": dim, "alpha": alpha, "eps": eps},
    )


# ---------------------------------------------------------------------------
# built-in potentials


def zero_potential() -> RadialPotential:
    return RadialPotential("zero", v=_zeros, d1=_zeros, d1_over_r=_zeros,
                           d2=_zeros, params={"kind": "zero"})


def gaussian_well(delta: float) -> RadialPotential:
    """V = -delta r^2 / 2; e^V is a centered Gaussian weight."""
    if delta <= 0.0:
        raise DomainError("delta must be > 0")
    return RadialPotential(
        "gaussian_well",
        v=lambda r: -0.5 * delta * _as_f(r) ** 2,
        d1=lambda r: -delta * _as_f(r),
        d1_over_r=lambda r: np.full_like(_as_f(r), -delta),
        d2=lambda r: np.full_like(_as_f(r), -delta),
        params={"kind": "gaussian_well", "delta": delta},
    )


def quad_sqrt_well(k: float, lam: float) -> RadialPotential:
    """V = -k r^2 - lam*sqrt(1 + r^2), k, lam > 0."""
    if k <= 0.0 or lam <= 0.0:
        raise DomainError("k and lam must be > 0")
    return RadialPotential(
        "quad_sqrt_well",
        v=lambda r: -k * _as_f(r) ** 2 - lam * np.sqrt(1.0 + _as_f(r) ** 2),
        d1=lambda r: -2.0 * k * _as_f(r) - lam * _as_f(r) / np.sqrt(1.0 + _as_f(r) ** 2),
        d1_over_r=lambda r: -2.0 * k - lam / np.sqrt(1.0 + _as_f(r) ** 2),
        d2=lambda r: -2.0 * k - lam * (1.0 + _as_f(r) ** 2) ** -1.5,
        params={"kind": "quad_sqrt_well", "k": k, "lam": lam},
    )


def power_well(alpha: float) -> RadialPotential:
    """V' = -r^alpha/alpha, the potential whose Hessian grows like r^(alpha-1)."""
    if alpha <= 1.0:
        raise DomainError("alpha must be > 1")
    return RadialPotential(
        "power_well",
        v=lambda r: -_as_f(r) ** (alpha + 1.0) / (alpha * (alpha + 1.0)),
        d1=lambda r: -(_as_f(r) ** alpha) / alpha,
        d1_over_r=lambda r: -(_as_f(r) ** (alpha - 1.0)) / alpha,
        d2=lambda r: -(_as_f(r) ** (alpha - 1.0)),
        params={"kind": "power_well", "alpha": alpha},
    )


# ---------------------------------------------------------------------------
# pointwise geometric operations


def ricci_bounds(m: ModelManifold, r):
    """Radial and tangential Ricci eigenvalues at radius r > 0."""
    r = _require_positive(r)
    rad = -(m.dim - 1) * m.d2w_over_w(r)
    tan = -m.d2w_over_w(r) + (m.dim - 2) * m.curv_tan(r)
    return rad, tan


def hessian_eigenvalues(m: ModelManifold, v: RadialPotential, r):
    """Radial (V'') and tangential (V' w'/w) Hessian eigenvalues at r > 0."""
    r = _require_positive(r)
    return v.d2(r), v.d1_over_r(r) * m.rt(r)


def bakry_emery_k(m: ModelManifold, v: RadialPotential, grid) -> float:
    """Greatest lower bound of the (Ric - Hess_V) eigenvalues over the grid."""
    grid = _require_positive(grid, "grid")
    ric_rad, ric_tan = ricci_bounds(m, grid)
    h_rad, h_tan = hessian_eigenvalues(m, v, grid)
    return float(min(np.min(ric_rad - h_rad), np.min(ric_tan - h_tan)))


@dataclass(frozen=True, eq=False)
class GridCheck:
    """Margin trace of a pointwise inequality over a radius grid."""

    name: str
    holds: bool
    margin: float
    r_at_min: float
    r_values: np.ndarray = field(repr=False)
    margins: np.ndarray = field(repr=False)


def check_ricci_quadratic(m: ModelManifold, sc: ScenarioConditions,
                          grid) -> GridCheck:
    """Margin of Ric_min(r) + sigma^2 r^2 + c >= 0 over the grid."""
    grid = _require_positive(grid, "grid")
    rad, tan = ricci_bounds(m, grid)
    base = np.minimum(rad, tan)
    comp = sc.sigma * sc.sigma * grid * grid + sc.c
    margins = base + comp
    i = int(np.argmin(margins))
    tol = _EQ_SLACK * (abs(float(base[i])) + abs(float(comp[i])) + 1.0)
    return GridCheck("ricci_quadratic", bool(margins[i] >= -tol),
                     float(margins[i]), float(grid[i]), grid, margins)


@dataclass(frozen=True, eq=False)
class HessianGapReport:
    holds: bool
    r0_observed: float       # inf when the condition fails at the grid edge
    r_values: np.ndarray = field(repr=False)
    max_eigenvalues: np.ndarray = field(repr=False)


def _hessian_tail_report(grid, max_eig, bound) -> HessianGapReport:
    ok = max_eig <= bound + _EQ_SLACK * (np.abs(max_eig) + np.abs(bound)
                                         + 1.0)
    if ok.all():
        return HessianGapReport(True, 0.0, grid, max_eig)
    last_bad = int(np.nonzero(~ok)[0][-1])
    if last_bad == len(grid) - 1:
        return HessianGapReport(False, math.inf, grid, max_eig)
    return HessianGapReport(True, float(grid[last_bad]), grid, max_eig)


def check_hessian_gap(m: ModelManifold, v: RadialPotential,
                      sc: ScenarioConditions, grid) -> HessianGapReport:
    """Does -Hess_V >= delta hold outside some radius observed on the grid?"""
    grid = _require_positive(grid, "grid")
    if grid.max() <= sc.r0:
        raise DomainError("grid must extend beyond the claimed compact radius r0")
    rad, tan = hessian_eigenvalues(m, v, grid)
    return _hessian_tail_report(grid, np.maximum(rad, tan), -sc.delta)


def check_hessian_growth(m: ModelManifold, v: RadialPotential,
                         phi: Callable, grid) -> HessianGapReport:
    """Growth version: -Hess_V >= phi(r) outside an observed radius."""
    grid = _require_positive(grid, "grid")
    rad, tan = hessian_eigenvalues(m, v, grid)
    return _hessian_tail_report(grid, np.maximum(rad, tan), -_as_f(phi(grid)))


def check_ricci_growth(m: ModelManifold, psi: Callable, grid) -> GridCheck:
    """Margin of Ric_min(r) + psi(r) >= 0 over the grid."""
    grid = _require_positive(grid, "grid")
    rad, tan = ricci_bounds(m, grid)
    base = np.minimum(rad, tan)
    comp = _as_f(psi(grid))
    margins = base + comp
    i = int(np.argmin(margins))
    tol = _EQ_SLACK * (abs(float(base[i])) + abs(float(comp[i])) + 1.0)
    return GridCheck("ricci_growth", bool(margins[i] >= -tol),
                     float(margins[i]), float(grid[i]), grid, margins)


@dataclass(frozen=True)
class Applicability:
    """Threshold verdicts for the three delta-vs-sigma pathways."""

    lsi_pathway: bool          # delta > (1+sqrt(2)) sigma sqrt(d-1)
    coupling_pathway: bool     # delta >= 2 sigma sqrt(d-1)
    tail_pathway: bool         # delta > sigma sqrt(d-1)
    lsi_threshold: float
    coupling_threshold: float
    tail_threshold: float


def applicability(sc: ScenarioConditions, dim: int) -> Applicability:
    if dim < 2:
        raise DomainError("dimension must be >= 2")
    s = sc.sigma * math.sqrt(dim - 1.0)
    return Applicability(
        lsi_pathway=sc.delta > _SQRT2P1 * s,
        coupling_pathway=sc.delta >= 2.0 * s,
        tail_pathway=sc.delta > s,
        lsi_threshold=_SQRT2P1 * s,
        coupling_threshold=2.0 * s,
        tail_threshold=s,
    )


def radial_laplacian(m: ModelManifold, v: RadialPotential, r):
    """Generator drift L r = (d-1) w'/w + V' at r > 0."""
    r = _require_positive(r)
    return (m.dim - 1) * m.dlog_w(r) + v.d1(r)


def radial_laplacian_sq(m: ModelManifold, v: RadialPotential, r):
    """L applied to r^2: 2 + 2 r (L r), exact on the model manifold."""
    r = _require_positive(r)
    return 2.0 + 2.0 * r * radial_laplacian(m, v, r)


def radial_laplacian_sq_origin(m: ModelManifold, v: RadialPotential) -> float:
    """Pole limit of L(r^2): 2d (V'(0) = 0 kills the potential term)."""
    return 2.0 * m.dim


def meridian_distance(r1: float, r2: float) -> float:
    """Distance between two points on one meridian through the pole side."""
    if r1 < 0.0 or r2 < 0.0:
        raise DomainError("radii must be >= 0")
    return abs(r1 - r2)
