# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled triangle quadrature for radial bilinear multipliers.

See ``_bilinear_py`` for the reference implementation; both follow the
same panel layout so their outputs agree to rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log2, pow, fabs, ceil, floor, INFINITY

cnp.import_array()

cdef double GL_X[8]
cdef double GL_W[8]
_x, _w = np.polynomial.legendre.leggauss(8)
for _i in range(8):
    GL_X[_i] = _x[_i]
    GL_W[_i] = _w[_i]


cdef inline double _half_bump(double x) nogil:
    if x <= 0.0:
        return 0.0
    return exp(-1.0 / x)


cdef inline double _step(double x) nogil:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    cdef double a = _half_bump(x)
    cdef double b = _half_bump(1.0 - x)
    return a / (a + b)


cdef inline double _tail(double xi, double edge) nogil:
    # T_edge(xi): 0 below 2^(edge-3/4), 1 above 2^(edge-1/4)
    if edge == -INFINITY:
        return 1.0
    if edge == INFINITY:
        return 0.0
    if xi <= 0.0:
        return 0.0
    return _step(2.0 * (log2(xi) - edge + 0.75))


cdef inline double _weight(double xi, double lo, double hi) nogil:
    return _tail(xi, lo) - _tail(xi, hi)


cdef inline double complex _interp(const double complex[:] table, double xi,
                                   double dxi) nogil:
    # cubic Lagrange on a uniform table with odd reflection through 0
    cdef Py_ssize_t last = table.shape[0] - 1
    cdef double x = xi / dxi
    cdef long q0 = <long> floor(x)
    cdef double t = x - q0
    cdef double c[4]
    c[0] = -t * (t - 1.0) * (t - 2.0) / 6.0
    c[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
    c[2] = -(t + 1.0) * t * (t - 2.0) / 2.0
    c[3] = (t + 1.0) * t * (t - 1.0) / 6.0
    cdef double complex acc = 0.0
    cdef long q
    cdef int i
    for i in range(4):
        q = q0 - 1 + i
        if q < 0:
            acc = acc - c[i] * table[-q]
        elif q <= last:
            acc = acc + c[i] * table[q]
    return acc


cdef inline double _denominator(int kind, double s, double b, double a,
                                double alpha) nogil:
    if kind == 1:
        return -s * s + alpha * b + a * a
    if kind == 2:
        return -s * s - alpha * b + a * a
    if kind == 3:
        return b * b - a * a - alpha * s
    return 1.0


cdef int _sorted_cuts(double lo, double hi, double* pts, int npts,
                      double* out) nogil:
    # out = [lo, interior points sorted, hi]; returns count
    cdef int m = 0
    cdef int i, j
    cdef double tmp
    out[m] = lo
    m += 1
    for i in range(npts):
        if pts[i] > lo and pts[i] < hi:
            out[m] = pts[i]
            m += 1
    out[m] = hi
    m += 1
    for i in range(1, m - 1):
        for j in range(i + 1, m - 1):
            if out[j] < out[i]:
                tmp = out[i]
                out[i] = out[j]
                out[j] = tmp
    return m


cdef inline double _support_lo(double edge) nogil:
    if edge == -INFINITY:
        return 0.0
    return pow(2.0, edge - 0.75)


cdef inline double _support_hi(double edge, double cap) nogil:
    if edge == INFINITY:
        return cap
    cdef double v = pow(2.0, edge - 0.25)
    return v if v < cap else cap


def triangle_quadrature(const double[:] s_out, const double complex[:] table_f,
                        const double complex[:] table_g, double dxi,
                        const double[:, :] pieces, int kind, double alpha,
                        bint undo, double panel):
    """(1/pi) sum over pieces of the weighted triangle integral at each s.

    Each piece row (lb, ub, la, ua) weights the outer variable b by
    T_lb(b) - T_ub(b) and the inner variable a by T_la(a) - T_ua(a).
    Returns ``(values, bad)`` where ``bad`` counts near-resonant nodes.
    """
    cdef Py_ssize_t ns = s_out.shape[0]
    cdef Py_ssize_t npieces = pieces.shape[0]
    cdef double cap = dxi * (table_f.shape[0] - 1)
    out_arr = np.zeros(ns, dtype=np.complex128)
    cdef double complex[:] out = out_arr
    cdef long bad = 0
    cdef Py_ssize_t m, p
    cdef double s, lb, ub, la, ua, b_lo, b_hi, a_lo, a_hi, lo, hi
    cdef double bcuts[16]
    cdef double acuts[8]
    cdef double bpts[10]
    cdef double apts[4]
    cdef int nb, na, ib, ia, kb, ka, gb, ga, npan_b, npan_a
    cdef double seg_lo, seg_hi, width, half, mid, b, wb, fb_w
    cdef double alo, ahi, aseg_lo, aseg_hi, awidth, ahalf, amid, a, wa, den
    cdef double complex fb, inner, total
    cdef double pi = 3.141592653589793
    with nogil:
        for m in range(ns):
            s = s_out[m]
            total = 0.0
            for p in range(npieces):
                lb = pieces[p, 0]
                ub = pieces[p, 1]
                la = pieces[p, 2]
                ua = pieces[p, 3]
                b_lo = _support_lo(lb)
                b_hi = _support_hi(ub, cap)
                a_lo = _support_lo(la)
                a_hi = _support_hi(ua, cap)
                if b_lo >= b_hi or a_lo >= a_hi:
                    continue
                lo = b_lo
                if a_lo - s > lo:
                    lo = a_lo - s
                if s - a_hi > lo:
                    lo = s - a_hi
                hi = b_hi
                if s + a_hi < hi:
                    hi = s + a_hi
                if lo >= hi:
                    continue
                bpts[0] = s
                bpts[1] = s - a_lo
                bpts[2] = s + a_lo
                bpts[3] = s - a_hi
                bpts[4] = a_lo - s
                bpts[5] = a_hi - s
                bpts[6] = pow(2.0, lb - 0.25) if lb != -INFINITY else -1.0
                bpts[7] = pow(2.0, ub - 0.75) if ub != INFINITY else -1.0
                apts[0] = pow(2.0, la - 0.25) if la != -INFINITY else -1.0
                apts[1] = pow(2.0, ua - 0.75) if ua != INFINITY else -1.0
                nb = _sorted_cuts(lo, hi, bpts, 8, bcuts)
                for ib in range(nb - 1):
                    seg_lo = bcuts[ib]
                    seg_hi = bcuts[ib + 1]
                    if seg_hi <= seg_lo:
                        continue
                    npan_b = <int> ceil((seg_hi - seg_lo) / panel)
                    width = (seg_hi - seg_lo) / npan_b
                    half = 0.5 * width
                    for kb in range(npan_b):
                        mid = seg_lo + (kb + 0.5) * width
                        for gb in range(8):
                            b = mid + half * GL_X[gb]
                            wb = half * GL_W[gb]
                            fb_w = _weight(b, lb, ub)
                            if fb_w == 0.0:
                                continue
                            fb = _interp(table_f, b, dxi)
                            alo = fabs(s - b)
                            if a_lo > alo:
                                alo = a_lo
                            ahi = s + b
                            if a_hi < ahi:
                                ahi = a_hi
                            if ahi <= alo:
                                continue
                            na = _sorted_cuts(alo, ahi, apts, 2, acuts)
                            inner = 0.0
                            for ia in range(na - 1):
                                aseg_lo = acuts[ia]
                                aseg_hi = acuts[ia + 1]
                                if aseg_hi <= aseg_lo:
                                    continue
                                npan_a = <int> ceil((aseg_hi - aseg_lo) / panel)
                                awidth = (aseg_hi - aseg_lo) / npan_a
                                ahalf = 0.5 * awidth
                                for ka in range(npan_a):
                                    amid = aseg_lo + (ka + 0.5) * awidth
                                    for ga in range(8):
                                        a = amid + ahalf * GL_X[ga]
                                        wa = ahalf * GL_W[ga] * _weight(a, la, ua)
                                        if wa == 0.0:
                                            continue
                                        den = _denominator(kind, s, b, a, alpha)
                                        if kind != 0 and fabs(den) < 1e-12 * alpha * b * (1.0 + s):
                                            bad += 1
                                            continue
                                        if undo:
                                            inner = inner + wa * (_interp(table_g, a, dxi) / den) * den
                                        else:
                                            inner = inner + wa * _interp(table_g, a, dxi) / den
                            total = total + wb * fb_w * fb * inner
            out[m] = total / pi
    return out_arr, bad
