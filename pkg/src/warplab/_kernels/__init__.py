"""Hot path-simulation kernels with a compiled core and a numpy fallback.

The Euler step loops dominate the runtime of the whole package, so they are
implemented twice with identical floating-point semantics:

* ``warplab._kernels._ext``  -- Cython extension, compiled with
  ``-ffp-contract=off`` so the arithmetic matches IEEE double ops one to one;
* ``warplab._kernels._py``   -- vectorized numpy fallback.

The backend is selected once at import time: the extension when it built,
the fallback otherwise.  ``WARPLAB_KERNEL=ext|py|auto`` overrides the choice
(``ext`` raises if the extension is unavailable).  Both backends consume the
same per-path counter-based noise streams, so ensembles are reproducible
bit for bit for a given backend regardless of chunking or worker count.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _py

try:
    from . import _ext
    _HAVE_EXT = True
except ImportError:
    _ext = None
    _HAVE_EXT = False

_choice = os.environ.get("WARPLAB_KERNEL", "auto").strip().lower()
if _choice not in ("auto", "ext", "py"):
    raise RuntimeError(f"WARPLAB_KERNEL must be auto, ext or py (got {_choice!r})")
if _choice == "ext" and not _HAVE_EXT:
    raise RuntimeError("WARPLAB_KERNEL=ext but the compiled kernel is not available")
if _choice == "py" or (_choice == "auto" and not _HAVE_EXT):
    _impl = _py
    BACKEND = "py"
else:
    _impl = _ext
    BACKEND = "ext"

# warp dispatch codes (r * w'/w is the tabulated quantity: smooth at the pole)
WARP_FLAT = 0
WARP_SINH = 1
WARP_GAUSS = 2
WARP_TABLE = 3

# potential dispatch codes
POT_ZERO = 0
POT_QUAD = 1
POT_QUADSQRT = 2
POT_POWER = 3
POT_TABLE = 4

# optional per-path accumulator: time integral of (primitive of phi)^2
PHI_NONE = 0
PHI_POWER = 1

# coupling drift schedules
SCHED_QUAD = 0
SCHED_GROWTH = 1

XI_SCHEDULE = 0
XI_ZERO = 1
XI_CONST = 2

_EMPTY = np.zeros(0, dtype=np.float64)


@dataclass(frozen=True)
class DriftSpec:
    """Scenario data needed by the kernels to evaluate the radial drift."""

    dm1: float                      # d - 1
    warp_kind: int
    warp_p0: float = 0.0            # gauss: 2k
    warp_table: np.ndarray = field(default_factory=lambda: _EMPTY)
    warp_dr: float = 1.0
    pot_kind: int = POT_ZERO
    pot_p0: float = 0.0             # quad: a | quadsqrt: 2k | power: alpha
    pot_p1: float = 0.0             # quadsqrt: lam
    pot_table: np.ndarray = field(default_factory=lambda: _EMPTY)
    pot_dr: float = 1.0


def backend_name() -> str:
    return BACKEND


def have_extension() -> bool:
    return _HAVE_EXT


def get_impl(name: str | None = None):
    """Return a kernel implementation module (for the benchmark)."""
    if name in (None, "active"):
        return _impl
    if name == "py":
        return _py
    if name == "ext":
        if not _HAVE_EXT:
            raise RuntimeError("compiled kernel not available")
        return _ext
    raise ValueError(f"unknown kernel backend {name!r}")


def radial_block(impl, r, z, h, rmin, spec: DriftSpec, phikind, phialpha,
                 ir2, iphi2, rmax, refl):
    """Advance a block of paths; returns 0 or 1 (drift overflow)."""
    return impl.radial_block(
        r, z, h, rmin,
        spec.dm1, spec.warp_kind, spec.warp_p0, spec.warp_table, spec.warp_dr,
        spec.pot_kind, spec.pot_p0, spec.pot_p1, spec.pot_table, spec.pot_dr,
        phikind, phialpha, ir2, iphi2, rmax, refl)


def comparison_block(impl, r, rho, z, z2, h, rmin, spec: DriftSpec,
                     sched, c, sigma, delta, c1, bigc, twosig, twotheta,
                     eps, twoalpha, phialpha, rho0_over_t, ximode, xiconst,
                     k0, lm, lc, dommax, tau, coupled):
    """Advance a block of coupled distance-comparison paths."""
    return impl.comparison_block(
        r, rho, z, z2, h, rmin,
        spec.dm1, spec.warp_kind, spec.warp_p0, spec.warp_table, spec.warp_dr,
        spec.pot_kind, spec.pot_p0, spec.pot_p1, spec.pot_table, spec.pot_dr,
        sched, c, sigma, delta, c1, bigc, twosig, twotheta,
        eps, twoalpha, phialpha, rho0_over_t, ximode, xiconst,
        k0, lm, lc, dommax, tau, coupled)
