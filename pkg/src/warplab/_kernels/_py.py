"""Pure numpy fallback kernels.

Per-element arithmetic is written to match the compiled kernel operation for
operation (same order, same IEEE ops), so for drift families that avoid
transcendental dispatch the two backends agree bit for bit.
"""

from __future__ import annotations

import math

import numpy as np


def _interp_uniform(tab, dr, r):
    x = r / dr
    i = np.floor(x)
    idx = i.astype(np.int64)
    n = tab.shape[0]
    last = idx >= n - 1
    idxc = np.minimum(idx, n - 2)
    f = x - i
    val = tab[idxc] + f * (tab[idxc + 1] - tab[idxc])
    return np.where(last, tab[n - 1], val)


def _pint(r, alpha):
    # primitive of the growth function: int_0^r s^(alpha-1) ds
    return (r ** alpha) / alpha


def _drift(r, dm1, wkind, w0, wtab, wdr, pkind, p0, p1, ptab, pdr):
    if wkind == 0:
        t = dm1 / r
    elif wkind == 1:
        t = dm1 * (np.cosh(r) / np.sinh(r))
    elif wkind == 2:
        t = dm1 * (1.0 / r + w0 * r)
    else:
        t = dm1 * _interp_uniform(wtab, wdr, r) / r
    if pkind == 0:
        return t
    if pkind == 1:
        vp = -(p0 * r)
    elif pkind == 2:
        vp = -(p0 * r) - (p1 * r) / np.sqrt(1.0 + r * r)
    elif pkind == 3:
        vp = -(r ** p0) / p0
    else:
        vp = _interp_uniform(ptab, pdr, r)
    return t + vp


def radial_block(r, z, h, rmin, dm1, wkind, w0, wtab, wdr,
                 pkind, p0, p1, ptab, pdr, phikind, phialpha,
                 ir2, iphi2, rmax, refl):
    nsteps = z.shape[1]
    bcap = 0.5 / h
    sq2h = math.sqrt(2.0 * h)
    cur = r.copy()
    for j in range(nsteps):
        b = _drift(cur, dm1, wkind, w0, wtab, wdr, pkind, p0, p1, ptab, pdr)
        if np.any(np.abs(b) * h > 1.0):
            return 1
        b = np.clip(b, -bcap, bcap)
        rn = cur + b * h + sq2h * z[:, j]
        low = rn < rmin
        if low.any():
            rn = np.where(low, 2.0 * rmin - rn, rn)
            refl += low
        ir2 += 0.5 * h * (cur * cur + rn * rn)
        if phikind == 1:
            s0 = _pint(cur, phialpha)
            s1 = _pint(rn, phialpha)
            iphi2 += 0.5 * h * (s0 * s0 + s1 * s1)
        np.maximum(rmax, rn, out=rmax)
        cur = rn
    r[:] = cur
    return 0


def comparison_block(r, rho, z, z2, h, rmin, dm1, wkind, w0, wtab, wdr,
                     pkind, p0, p1, ptab, pdr,
                     sched, c, sigma, delta, c1, bigc, twosig, twotheta,
                     eps, twoalpha, phialpha, rho0_over_t, ximode, xiconst,
                     k0, lm, lc, dommax, tau, coupled):
    nsteps = z.shape[1]
    bcap = 0.5 / h
    sq2h = math.sqrt(2.0 * h)
    sqh = math.sqrt(h)
    cur = r.copy()
    rh = rho.copy()
    active = coupled == 0
    for j in range(nsteps):
        if active.any():
            if ximode == 1:
                xi = np.zeros_like(cur)
            elif ximode == 2:
                xi = np.full_like(cur, xiconst)
            elif sched == 0:
                xi = bigc + twosig * cur + rho0_over_t
            else:
                xi = bigc + twotheta * _pint(cur, phialpha) + rho0_over_t
            if sched == 0:
                s = sigma * (cur + rh)
                bigk = c + s * s
            else:
                bigk = eps * (cur + rh) ** twoalpha
            sk = np.sqrt(bigk * dm1)
            arg = (0.5 * rh) * np.sqrt(bigk / dm1)
            ibound = 2.0 * sk * np.tanh(arg)
            if sched == 0:
                vpair = c1 - delta * rh
            else:
                vpair = c1 - _pint(0.5 * rh, phialpha)
            dd = ibound + vpair - xi
            dom = dd + rho0_over_t
            np.copyto(dommax, dom, where=active & (dom > dommax))
            lm += np.where(active, xi * (sqh * z2[:, j]), 0.0)
            lc += np.where(active, xi * xi, 0.0)
            rhn = rh + h * dd
            hit = active & (rhn <= 0.0)
            if hit.any():
                tau[hit] = (k0 + j + 1) * h
                coupled[hit] = 1
            rh = np.where(active, np.where(hit, 0.0, rhn), rh)
            active = active & ~hit
        b = _drift(cur, dm1, wkind, w0, wtab, wdr, pkind, p0, p1, ptab, pdr)
        if np.any(np.abs(b) * h > 1.0):
            return 1
        b = np.clip(b, -bcap, bcap)
        rn = cur + b * h + sq2h * z[:, j]
        low = rn < rmin
        if low.any():
            rn = np.where(low, 2.0 * rmin - rn, rn)
        cur = rn
    r[:] = cur
    rho[:] = rh
    return 0
