# cython: language_level=3
"""Compiled Euler-step kernels.

Every arithmetic expression mirrors the numpy fallback in ``_py`` operation
for operation (the build passes -ffp-contract=off), so both backends produce
bit-identical paths for the polynomial drift families.
"""

cimport cython
from libc.math cimport cosh, fabs, floor, pow, sinh, sqrt, tanh


cdef inline double _interp_uniform(const double[::1] tab, double dr, double r) noexcept nogil:
    cdef double x = r / dr
    cdef Py_ssize_t i = <Py_ssize_t>floor(x)
    cdef Py_ssize_t n = tab.shape[0]
    cdef double f
    if i >= n - 1:
        return tab[n - 1]
    f = x - <double>i
    return tab[i] + f * (tab[i + 1] - tab[i])


cdef inline double _pint(double r, double alpha) noexcept nogil:
    return pow(r, alpha) / alpha


cdef inline double _drift(double r, double dm1, int wkind, double w0,
                          const double[::1] wtab, double wdr,
                          int pkind, double p0, double p1,
                          const double[::1] ptab, double pdr) noexcept nogil:
    cdef double t, vp
    if wkind == 0:
        t = dm1 / r
    elif wkind == 1:
        t = dm1 * (cosh(r) / sinh(r))
    elif wkind == 2:
        t = dm1 * (1.0 / r + w0 * r)
    else:
        t = dm1 * _interp_uniform(wtab, wdr, r) / r
    if pkind == 0:
        return t
    if pkind == 1:
        vp = -(p0 * r)
    elif pkind == 2:
        vp = -(p0 * r) - (p1 * r) / sqrt(1.0 + r * r)
    elif pkind == 3:
        vp = -pow(r, p0) / p0
    else:
        vp = _interp_uniform(ptab, pdr, r)
    return t + vp


@cython.boundscheck(False)
@cython.wraparound(False)
def radial_block(double[::1] r, const double[:, ::1] z, double h, double rmin,
                 double dm1, int wkind, double w0,
                 const double[::1] wtab, double wdr,
                 int pkind, double p0, double p1,
                 const double[::1] ptab, double pdr,
                 int phikind, double phialpha,
                 double[::1] ir2, double[::1] iphi2, double[::1] rmax,
                 long[::1] refl):
    cdef Py_ssize_t npath = r.shape[0]
    cdef Py_ssize_t nsteps = z.shape[1]
    cdef double bcap = 0.5 / h
    cdef double sq2h = sqrt(2.0 * h)
    cdef Py_ssize_t p, j
    cdef double cr, b, rn, i2, ip2, rmx, s0, s1
    cdef long nref
    cdef int flag = 0
    with nogil:
        for p in range(npath):
            cr = r[p]
            i2 = ir2[p]
            ip2 = iphi2[p]
            rmx = rmax[p]
            nref = refl[p]
            for j in range(nsteps):
                b = _drift(cr, dm1, wkind, w0, wtab, wdr,
                           pkind, p0, p1, ptab, pdr)
                if fabs(b) * h > 1.0:
                    flag = 1
                    break
                if b > bcap:
                    b = bcap
                elif b < -bcap:
                    b = -bcap
                rn = cr + b * h + sq2h * z[p, j]
                if rn < rmin:
                    rn = 2.0 * rmin - rn
                    nref += 1
                i2 += 0.5 * h * (cr * cr + rn * rn)
                if phikind == 1:
                    s0 = _pint(cr, phialpha)
                    s1 = _pint(rn, phialpha)
                    ip2 += 0.5 * h * (s0 * s0 + s1 * s1)
                if rn > rmx:
                    rmx = rn
                cr = rn
            r[p] = cr
            ir2[p] = i2
            iphi2[p] = ip2
            rmax[p] = rmx
            refl[p] = nref
            if flag:
                break
    return flag


@cython.boundscheck(False)
@cython.wraparound(False)
def comparison_block(double[::1] r, double[::1] rho, const double[:, ::1] z,
                     const double[:, ::1] z2, double h, double rmin,
                     double dm1, int wkind, double w0,
                     const double[::1] wtab, double wdr,
                     int pkind, double p0, double p1,
                     const double[::1] ptab, double pdr,
                     int sched, double c, double sigma, double delta, double c1,
                     double bigc, double twosig, double twotheta,
                     double eps, double twoalpha, double phialpha,
                     double rho0_over_t, int ximode, double xiconst,
                     long k0, double[::1] lm, double[::1] lc,
                     double[::1] dommax, double[::1] tau,
                     unsigned char[::1] coupled):
    cdef Py_ssize_t npath = r.shape[0]
    cdef Py_ssize_t nsteps = z.shape[1]
    cdef double bcap = 0.5 / h
    cdef double sq2h = sqrt(2.0 * h)
    cdef double sqh = sqrt(h)
    cdef Py_ssize_t p, j
    cdef double cr, rh, b, rn, rhn, xi, s, bigk, sk, arg, ib, vpair, dd, dom
    cdef double lmp, lcp, dmx, tp
    cdef unsigned char cpl
    cdef int flag = 0
    with nogil:
        for p in range(npath):
            cr = r[p]
            rh = rho[p]
            lmp = lm[p]
            lcp = lc[p]
            dmx = dommax[p]
            tp = tau[p]
            cpl = coupled[p]
            for j in range(nsteps):
                if cpl == 0:
                    if ximode == 1:
                        xi = 0.0
                    elif ximode == 2:
                        xi = xiconst
                    elif sched == 0:
                        xi = bigc + twosig * cr + rho0_over_t
                    else:
                        xi = bigc + twotheta * _pint(cr, phialpha) + rho0_over_t
                    if sched == 0:
                        s = sigma * (cr + rh)
                        bigk = c + s * s
                    else:
                        bigk = eps * pow(cr + rh, twoalpha)
                    sk = sqrt(bigk * dm1)
                    arg = (0.5 * rh) * sqrt(bigk / dm1)
                    ib = 2.0 * sk * tanh(arg)
                    if sched == 0:
                        vpair = c1 - delta * rh
                    else:
                        vpair = c1 - _pint(0.5 * rh, phialpha)
                    dd = ib + vpair - xi
                    dom = dd + rho0_over_t
                    if dom > dmx:
                        dmx = dom
                    lmp += xi * (sqh * z2[p, j])
                    lcp += xi * xi
                    rhn = rh + h * dd
                    if rhn <= 0.0:
                        cpl = 1
                        tp = (k0 + j + 1) * h
                        rhn = 0.0
                    rh = rhn
                b = _drift(cr, dm1, wkind, w0, wtab, wdr,
                           pkind, p0, p1, ptab, pdr)
                if fabs(b) * h > 1.0:
                    flag = 1
                    break
                if b > bcap:
                    b = bcap
                elif b < -bcap:
                    b = -bcap
                rn = cr + b * h + sq2h * z[p, j]
                if rn < rmin:
                    rn = 2.0 * rmin - rn
                cr = rn
            r[p] = cr
            rho[p] = rh
            lm[p] = lmp
            lc[p] = lcp
            dommax[p] = dmx
            tau[p] = tp
            coupled[p] = cpl
            if flag:
                break
    return flag
