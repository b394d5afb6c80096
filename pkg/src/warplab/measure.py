"""The invariant measure of the radial diffusion and its functionals.

For a manifold with warp w and potential V the invariant measure has the
radial density m(r) = e^(V(r)) w(r)^(d-1) (times the area of the unit
(d-1)-sphere).  This module owns everything integrated against it:
normalization mass, exponential square moments with explicit divergence
verdicts, entropy/energy functionals of radial test functions, witnessed
entropy-cost lower bounds, a discretized-generator spectral-gap oracle and
a matching semigroup quadrature oracle, plus inverse-CDF start sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _quadrature as quad
from .errors import DegenerateInputError, DomainError, ResolutionError
from .geometry import ModelManifold, RadialPotential, _as_f

_R_MIN = 1e-6          # lower endpoint for radial quadrature (density ~ r^(d-1) at 0)
_LOG_FLOOR = -600.0    # grid nodes below this relative log-density carry no mass


def sphere_area(dim: int) -> float:
    """Surface area of the unit (dim-1)-sphere in R^dim."""
    if dim < 1:
        raise DomainError("dimension must be >= 1")
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


def log_density(m: ModelManifold, v: RadialPotential) -> Callable:
    """Unnormalized radial log-density: V(r) + (d-1) log w(r)."""
    dm1 = m.dim - 1

    def ld(r):
        r = _as_f(r)
        return v.v(r) + dm1 * m.log_w(r)

    return ld


@dataclass(frozen=True, eq=False)
class MassReport:
    radial_mass: float        # integral of e^V w^(d-1) dr (inf when divergent)
    z: float                  # times sphere area
    converged: bool
    divergent: bool
    tail_trace: list = field(repr=False, default_factory=list)


def partition_mass(m: ModelManifold, v: RadialPotential) -> MassReport:
    """Total mass of the radial density; divergence is a verdict, not an error."""
    res = quad.integrate_improper(log_density(m, v), a=_R_MIN)
    if res.divergent:
        return MassReport(math.inf, math.inf, False, True, res.tail_trace)
    value = res.require_converged("partition mass")
    return MassReport(value, value * sphere_area(m.dim), True, False, res.tail_trace)


@dataclass(frozen=True, eq=False)
class MomentReport:
    lam: float
    value: float              # mu(e^(lam r^2)), inf when divergent
    converged: bool
    tail_trace: list = field(repr=False, default_factory=list)


def exp_moment(m: ModelManifold, v: RadialPotential, lam: float) -> MomentReport:
    """Normalized moment mu(exp(lam r^2)) with a divergence verdict."""
    mass = partition_mass(m, v)
    if mass.divergent:
        raise DomainError("base measure has infinite mass; moment undefined")
    ld = log_density(m, v)
    res = quad.integrate_improper(lambda r: ld(r) + lam * _as_f(r) ** 2, a=_R_MIN)
    if res.divergent:
        return MomentReport(lam, math.inf, False, res.tail_trace)
    num = res.require_converged("exponential moment")
    return MomentReport(lam, num / mass.radial_mass, True, res.tail_trace)


def exp_moment_threshold(m: ModelManifold, v: RadialPotential,
                         lam_hi: float = 64.0, rel_tol: float = 1e-3) -> float:
    """Largest exponent with mu(exp(lam r^2)) finite, located by bisection.

    Returns 0.0 when every positive exponent diverges and ``lam_hi`` when
    even that converges (super-Gaussian decay).
    """
    # Sub-Gaussian tails defeat quadrature at tiny exponents (the integrand
    # only turns upward beyond any practical radius), so classify the tail
    # first: slower-than-quadratic log-density decay means no positive
    # exponent is integrable.
    if tail_class(m, v) != "gaussian-like":
        return 0.0
    probe = 1e-6
    if not exp_moment(m, v, probe).converged:
        return 0.0
    lo, hi = probe, probe
    while hi < lam_hi:
        hi = min(hi * 4.0, lam_hi)
        if exp_moment(m, v, hi).converged:
            lo = hi
        else:
            break
    else:
        return lam_hi
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if exp_moment(m, v, mid).converged:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def expect(m: ModelManifold, v: RadialPotential, f: Callable) -> float:
    """mu(f) for a radial function f of moderate growth."""
    mass = partition_mass(m, v)
    if mass.divergent:
        raise DomainError("base measure has infinite mass")
    ld = log_density(m, v)
    num = quad.integrate_improper(ld, factor=f, a=_R_MIN)
    return num.require_converged("mean") / mass.radial_mass


def tail_class(m: ModelManifold, v: RadialPotential) -> str:
    """{'gaussian-like', 'subexponential', 'divergent'} from the tail log-density.

    The fitted quantity is the log-log slope of -log density(r) on a window
    past the bulk; slope >= 1.5 counts as gaussian-like concentration.
    """
    mass = partition_mass(m, v)
    if mass.divergent:
        return "divergent"
    ld = log_density(m, v)
    lo = 8.0
    for _ in range(12):
        window = np.geomspace(lo, 5.0 * lo, 12)
        neg = -ld(window)
        if np.all(neg > 0.0):
            slope = np.polyfit(np.log(window), np.log(neg), 1)[0]
            return "gaussian-like" if slope >= 1.5 else "subexponential"
        lo *= 2.0
    raise ResolutionError("tail window search failed for a finite-mass density")


# ---------------------------------------------------------------------------
# entropy / energy functionals


@dataclass(frozen=True, eq=False)
class RadialTestFunction:
    """Positive radial test function.  When (log_f, dlog_f) are supplied the
    entropy/energy quadratures run entirely in log space, which keeps sharp
    exponential members evaluable past the radius where f**2 itself overflows."""
    name: str
    f: Callable = field(repr=False)
    df: Callable = field(repr=False)
    log_f: Optional[Callable] = field(default=None, repr=False)
    dlog_f: Optional[Callable] = field(default=None, repr=False)


def quadratic_exp_member(beta: float) -> RadialTestFunction:
    """f(r) = exp(beta r^2 / 4)."""

    def f(r):
        return np.exp(0.25 * beta * _as_f(r) ** 2)

    def df(r):
        r = _as_f(r)
        return 0.5 * beta * r * np.exp(0.25 * beta * r * r)

    def log_f(r):
        return 0.25 * beta * _as_f(r) ** 2

    def dlog_f(r):
        return 0.5 * beta * _as_f(r)

    return RadialTestFunction(f"quad_exp(beta={beta:.6g})", f, df, log_f, dlog_f)


def bump_member(center: float, width: float) -> RadialTestFunction:
    """Gaussian bump exp(-(r-center)^2/(2 width^2))."""

    def f(r):
        u = (_as_f(r) - center) / width
        return np.exp(-0.5 * u * u)

    def df(r):
        u = (_as_f(r) - center) / width
        return -u / width * np.exp(-0.5 * u * u)

    def log_f(r):
        u = (_as_f(r) - center) / width
        return -0.5 * u * u

    def dlog_f(r):
        return -(_as_f(r) - center) / (width * width)

    return RadialTestFunction(f"bump(c={center:g},w={width:g})", f, df, log_f, dlog_f)


def default_test_family(m: ModelManifold, v: RadialPotential,
                        bump_centers=(1.0, 2.0, 4.0), bump_width: float = 1.0):
    """Quadratic exponentials scaled to the scenario's moment threshold, plus bumps.

    The positive exponents approach (but stay inside) the integrability
    threshold beta_c = 2 * sup{lam : mu(e^(lam r^2)) < inf}; the sharpest
    members witness most of the achievable entropy/energy ratio.
    """
    betas = [-1.0, -0.5]
    beta_c = 2.0 * exp_moment_threshold(m, v)
    if beta_c > 0.0:
        betas += [f * beta_c for f in (0.25, 0.5, 0.75, 0.9, 0.95, 0.98, 0.995)]
    family = [quadratic_exp_member(b) for b in betas]
    family += [bump_member(c, bump_width) for c in bump_centers]
    return family


@dataclass(frozen=True)
class EntropyEnergy:
    entropy: float
    energy: float

    @property
    def ratio(self) -> float:
        if self.energy == 0.0:
            return 0.0
        return self.entropy / self.energy


def entropy_energy(m: ModelManifold, v: RadialPotential,
                   tf: RadialTestFunction) -> EntropyEnergy:
    """Ent(g^2) with g = f/sqrt(mu(f^2)), and mu(f'^2)/mu(f^2), by quadrature."""
    mass = partition_mass(m, v)
    if mass.divergent:
        raise DomainError("base measure has infinite mass")
    ld = log_density(m, v)

    # Entropy is integrated in the pointwise-nonnegative Bregman form
    # x log x - x + 1 with x = f^2/mu(f^2): Ent = mu(mu(f^2) * psi(x)) / mu(f^2)
    # = (radial integral of e^ld psi(x)) / radial mass.  Near-constant members
    # otherwise lose the O(eps^2) entropy to cancellation across the integral,
    # and the form is second-order insensitive to the mu(f^2) estimate.
    if tf.log_f is not None and tf.dlog_f is not None:
        # log form: shift log f by a constant that puts the weighted peak at
        # O(1) so mu(f^2) stays representable for members near the moment
        # threshold (both functionals are invariant under f -> a*f).
        lf, dlf = tf.log_f, tf.dlog_f
        probe = np.geomspace(_R_MIN, 1e4, 2048)
        smax = float(np.max(ld(probe) + 2.0 * lf(probe)))
        if not math.isfinite(smax):
            raise DegenerateInputError(f"mu(f^2) vanishes for {tf.name}")

        def lw2(r):
            return ld(r) + 2.0 * lf(r) - smax

        i_f2 = quad.integrate_improper(lw2, a=_R_MIN)
        i_f2.require_converged("mu(f^2)")
        n2 = i_f2.value / mass.radial_mass           # mu(f^2) up to e^smax
        if not n2 > 1e-300:
            raise DegenerateInputError(f"mu(f^2) vanishes for {tf.name}")
        ln_n2 = math.log(n2) + smax                  # true log mu(f^2)

        # psi(y) = e^y y - e^y + 1 for y = log x, split at y = 0 so neither
        # piece can overflow: e^y (y + expm1(-y)) carries the weight for
        # y > 0, -expm1(y) + y e^y stays bounded for y <= 0.
        def ent_above(r):
            y = 2.0 * lf(r) - ln_n2
            up = y > 0.0
            em = np.expm1(np.where(up, -y, 0.0))
            return np.where(up, y + em, 0.0)

        def ent_below(r):
            y = np.minimum(2.0 * lf(r) - ln_n2, 0.0)
            return -np.expm1(y) + y * np.exp(y)

        i_above = quad.integrate_improper(
            lambda r: ld(r) + 2.0 * lf(r) - ln_n2, factor=ent_above, a=_R_MIN)
        i_below = quad.integrate_improper(ld, factor=ent_below, a=_R_MIN)
        i_en = quad.integrate_improper(lw2, factor=lambda r: dlf(r) ** 2, a=_R_MIN)
        ent = (i_above.require_converged("entropy")
               + i_below.require_converged("entropy")) / mass.radial_mass
        energy = i_en.require_converged("energy") / i_f2.value
        return EntropyEnergy(ent, energy)

    i_f2 = quad.integrate_improper(ld, factor=lambda r: tf.f(r) ** 2, a=_R_MIN)
    i_f2.require_converged("mu(f^2)")
    n2 = i_f2.value / mass.radial_mass
    if not n2 > 1e-300:
        raise DegenerateInputError(f"mu(f^2) vanishes for {tf.name}")

    def ent_factor(r):
        x = tf.f(r) ** 2 / n2
        t = np.where(x > 0.0, x - 1.0, 0.0)
        psi = x * np.log1p(t) - t                    # x log x - x + 1, x > 0
        return np.where(x > 0.0, psi, 1.0)

    i_ent = quad.integrate_improper(ld, factor=ent_factor, a=_R_MIN)
    i_en = quad.integrate_improper(ld, factor=lambda r: tf.df(r) ** 2, a=_R_MIN)
    ent = i_ent.require_converged("entropy") / mass.radial_mass
    energy = i_en.require_converged("energy") / i_f2.value
    return EntropyEnergy(ent, energy)


@dataclass(frozen=True, eq=False)
class WitnessReport:
    best: float
    best_member: str
    members: list            # (name, entropy, energy, ratio) rows


def lsi_lower_bound(m: ModelManifold, v: RadialPotential, family) -> WitnessReport:
    """Best witnessed entropy/energy ratio over the family (a certified lower bound)."""
    rows = []
    best = -math.inf
    best_name = ""
    for tf in family:
        try:
            ee = entropy_energy(m, v, tf)
        except DegenerateInputError:
            continue
        rows.append((tf.name, ee.entropy, ee.energy, ee.ratio))
        if ee.ratio > best:
            best, best_name = ee.ratio, tf.name
    if not rows:
        raise DegenerateInputError("every family member was degenerate")
    return WitnessReport(best, best_name, rows)


# ---------------------------------------------------------------------------
# discretized radial generator: spectral gap and semigroup oracles


def _grid_domain(ldens, r_max):
    """Upper radius for the dense grid: where the log-density has dropped
    ~120 below its peak (mass beyond is negligible for eigenfunctions)."""
    if r_max is not None:
        return float(r_max)
    probe = np.geomspace(_R_MIN, 1e4, 4096)
    vals = ldens(probe)
    peak = float(np.max(vals))
    past = probe[(probe > probe[int(np.argmax(vals))]) & (vals < peak - 120.0)]
    if past.size == 0:
        raise DomainError("density does not decay inside the probe range; pass r_max")
    return float(past[0])


def _sector_matrices(ldens, m, grid, ell):
    """Lumped divergence-form discretization of the sector-ell radial operator."""
    n = grid.size
    mid = 0.5 * (grid[:-1] + grid[1:])
    lw = ldens(grid)
    shift = float(np.max(lw))
    w_node = np.exp(lw - shift)
    w_mid = np.exp(ldens(mid) - shift)
    dr = np.diff(grid)
    cell = np.empty(n)
    cell[0] = 0.5 * dr[0]
    cell[-1] = 0.5 * dr[-1]
    cell[1:-1] = 0.5 * (dr[:-1] + dr[1:])
    dmass = w_node * cell
    flux = w_mid / dr
    diag = np.zeros(n)
    diag[:-1] += flux
    diag[1:] += flux
    if ell > 0:
        coupling = ell * (ell + m.dim - 2.0)
        inv_w2 = np.exp(-2.0 * m.log_w(grid))
        diag += coupling * inv_w2 * dmass
    # symmetrize the generalized problem with D^(-1/2) K D^(-1/2)
    keep = dmass > 1e-280
    if not keep.all():
        raise ResolutionError("grid extends into zero-mass region; shrink r_max")
    s = 1.0 / np.sqrt(dmass)
    d_sym = diag * s * s
    e_sym = -flux * s[:-1] * s[1:]
    return d_sym, e_sym


def _sector_eigs(ldens, m, grid, ell, count):
    d_sym, e_sym = _sector_matrices(ldens, m, grid, ell)
    vals = eigh_tridiagonal(d_sym, e_sym, eigvals_only=True,
                            select="i", select_range=(0, count - 1))
    return vals


@dataclass(frozen=True)
class GapReport:
    gap: float
    gap_coarse: float
    gap_fine: float
    sector: int          # angular sector achieving the gap
    r_max: float
    n: int


def spectral_gap(m: ModelManifold, v: RadialPotential, r_max: float | None = None,
                 n: int = 900, r_min: float = 1e-3) -> GapReport:
    """Smallest nonzero eigenvalue of the generator over radial functions and
    the first angular sector, by dense discretization with Richardson
    extrapolation over two resolutions."""
    ldens = log_density(m, v)
    hi = _grid_domain(ldens, r_max)
    results = []
    for nn in (n, 2 * n):
        grid = np.geomspace(r_min, hi, nn)
        ell0 = _sector_eigs(ldens, m, grid, 0, 2)
        ell1 = _sector_eigs(ldens, m, grid, 1, 1)
        gap_n = min(float(ell0[1]), float(ell1[0]))
        sec = 0 if ell0[1] <= ell1[0] else 1
        results.append((gap_n, sec))
    coarse, fine = results[0][0], results[1][0]
    if not math.isfinite(coarse) or not math.isfinite(fine) or fine <= 0.0:
        raise ResolutionError("spectral discretization produced a nonpositive gap")
    if abs(fine - coarse) > 0.10 * abs(fine):
        raise ResolutionError(
            f"gap estimates disagree beyond 10% ({coarse:.6g} vs {fine:.6g}); refine the grid")
    gap = (4.0 * fine - coarse) / 3.0
    return GapReport(gap, coarse, fine, results[1][1], hi, n)


class SemigroupQuadrature:
    """Dense-grid evolution oracle for the radial semigroup.

    Diagonalizes the symmetrized generator once; ``apply(f, T, x)`` then
    evaluates (P_T f)(x) for radial f.  Natural (reflecting) boundaries at
    both grid ends match the simulator's pole guard.
    """

    def __init__(self, m: ModelManifold, v: RadialPotential,
                 r_max: float | None = None, n: int = 1600, r_min: float = 1e-3):
        ldens = log_density(m, v)
        hi = _grid_domain(ldens, r_max)
        grid = np.geomspace(r_min, hi, n)
        d_sym, e_sym = _sector_matrices(ldens, m, grid, 0)
        vals, vecs = eigh_tridiagonal(d_sym, e_sym)
        lw = ldens(grid)
        shift = float(np.max(lw))
        w_node = np.exp(lw - shift)
        dr = np.diff(grid)
        cell = np.empty(n)
        cell[0] = 0.5 * dr[0]
        cell[-1] = 0.5 * dr[-1]
        cell[1:-1] = 0.5 * (dr[:-1] + dr[1:])
        self._sqrt_mass = np.sqrt(w_node * cell)
        self.grid = grid
        self._vals = np.maximum(vals, 0.0)
        self._vecs = vecs
        self.r_max = hi

    def apply(self, f: Callable, T: float, x) -> np.ndarray:
        """(P_T f)(x) for radial f; x scalar or array of radii."""
        if T < 0.0:
            raise DomainError("time must be >= 0")
        coef = self._vecs.T @ (self._sqrt_mass * f(self.grid))
        sol = (self._vecs @ (np.exp(-self._vals * T) * coef)) / self._sqrt_mass
        return np.interp(_as_f(x), self.grid, sol)

    def stationary_mean(self, f: Callable) -> float:
        """mu-restricted-to-the-grid mean of f (quadrature cross-check)."""
        w2 = self._sqrt_mass ** 2
        return float(np.sum(w2 * f(self.grid)) / np.sum(w2))


def sample_radius(m: ModelManifold, v: RadialPotential, n_samples: int,
                  rng: np.random.Generator, r_max: float | None = None,
                  grid_n: int = 20000) -> np.ndarray:
    """Draw radii from the normalized radial density by inverse-CDF lookup."""
    ldens = log_density(m, v)
    hi = _grid_domain(ldens, r_max)
    grid = np.linspace(_R_MIN, hi, grid_n)
    lw = ldens(grid)
    dens = np.exp(lw - np.max(lw))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    u = rng.random(n_samples)
    return np.interp(u, cdf, grid)
