"""Reference triangle quadrature for radial bilinear multipliers.

Same panel layout as the compiled kernel: for every output wavenumber s and
every weighted piece, the outer variable b runs over composite 8-point
Gauss-Legendre panels cut at the kinks of the triangle |a-b| <= s <= a+b and
at the plateau edges of the dyadic weights; the inner variable a likewise.
The inner loop is vectorized, the outer loops are plain Python.
"""

from __future__ import annotations

import math

import numpy as np

GL_X, GL_W = np.polynomial.legendre.leggauss(8)


def _step(x):
    x = np.asarray(x, dtype=float)
    out = np.clip(x, 0.0, 1.0)
    inside = (x > 0) & (x < 1)
    xi = x[inside]
    a = np.exp(-1.0 / xi)
    b = np.exp(-1.0 / (1.0 - xi))
    out[inside] = a / (a + b)
    return out


def _tail(xi, edge):
    xi = np.asarray(xi, dtype=float)
    if edge == -math.inf:
        return np.ones_like(xi)
    if edge == math.inf:
        return np.zeros_like(xi)
    with np.errstate(divide="ignore"):
        lg = np.log2(np.where(xi > 0, xi, 1.0))
    return np.where(xi > 0, _step(2.0 * (lg - edge + 0.75)), 0.0)


def weight(xi, lo, hi):
    return _tail(xi, lo) - _tail(xi, hi)


def interp(table, xi, dxi):
    xi = np.asarray(xi, dtype=float)
    x = xi / dxi
    q0 = np.floor(x).astype(np.int64)
    t = x - q0
    coef = (
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    )
    last = table.shape[0] - 1
    acc = np.zeros(xi.shape, dtype=complex)
    for i, c in enumerate(coef):
        q = q0 - 1 + i
        sign = np.where(q < 0, -1.0, 1.0)
        idx = np.abs(q)
        valid = idx <= last
        acc += np.where(valid, c * sign * table[np.minimum(idx, last)], 0.0)
    return acc


def denominator(kind, s, b, a, alpha):
    if kind == 1:
        return -s * s + alpha * b + a * a
    if kind == 2:
        return -s * s - alpha * b + a * a
    if kind == 3:
        return b * b - a * a - alpha * s
    return np.ones_like(a)


def _cuts(lo, hi, pts):
    inner = sorted(p for p in pts if lo < p < hi)
    return [lo] + inner + [hi]


def _nodes(lo, hi, panel):
    npan = math.ceil((hi - lo) / panel)
    width = (hi - lo) / npan
    mids = lo + (np.arange(npan) + 0.5) * width
    x = (mids[:, None] + 0.5 * width * GL_X[None, :]).ravel()
    w = np.tile(0.5 * width * GL_W, npan)
    return x, w


def _support(lo_edge, hi_edge, cap):
    lo = 0.0 if lo_edge == -math.inf else 2.0 ** (lo_edge - 0.75)
    hi = cap if hi_edge == math.inf else min(cap, 2.0 ** (hi_edge - 0.25))
    return lo, hi


def _plateau_edges(lo_edge, hi_edge):
    pts = []
    if lo_edge != -math.inf:
        pts.append(2.0 ** (lo_edge - 0.25))
    if hi_edge != math.inf:
        pts.append(2.0 ** (hi_edge - 0.75))
    return pts


def triangle_quadrature(s_out, table_f, table_g, dxi, pieces, kind, alpha, undo, panel):
    s_out = np.asarray(s_out, dtype=float)
    table_f = np.asarray(table_f, dtype=complex)
    table_g = np.asarray(table_g, dtype=complex)
    cap = dxi * (table_f.shape[0] - 1)
    out = np.zeros(s_out.shape, dtype=complex)
    bad = 0
    for m, s in enumerate(s_out):
        total = 0.0j
        for lb, ub, la, ua in np.asarray(pieces, dtype=float):
            b_lo, b_hi = _support(lb, ub, cap)
            a_lo, a_hi = _support(la, ua, cap)
            if b_lo >= b_hi or a_lo >= a_hi:
                continue
            lo = max(b_lo, a_lo - s, s - a_hi)
            hi = min(b_hi, s + a_hi)
            if lo >= hi:
                continue
            bpts = [s, s - a_lo, s + a_lo, s - a_hi, a_lo - s, a_hi - s]
            bpts += _plateau_edges(lb, ub)
            apts = _plateau_edges(la, ua)
            cuts = _cuts(lo, hi, bpts)
            for seg_lo, seg_hi in zip(cuts[:-1], cuts[1:]):
                if seg_hi <= seg_lo:
                    continue
                bx, bw = _nodes(seg_lo, seg_hi, panel)
                fbw = weight(bx, lb, ub)
                fb = interp(table_f, bx, dxi)
                for b, wb, wgt, fval in zip(bx, bw, fbw, fb):
                    if wgt == 0.0:
                        continue
                    alo = max(a_lo, abs(s - b))
                    ahi = min(a_hi, s + b)
                    if ahi <= alo:
                        continue
                    inner = 0.0j
                    acuts = _cuts(alo, ahi, apts)
                    for aseg_lo, aseg_hi in zip(acuts[:-1], acuts[1:]):
                        if aseg_hi <= aseg_lo:
                            continue
                        ax, aw = _nodes(aseg_lo, aseg_hi, panel)
                        aw = aw * weight(ax, la, ua)
                        keep = aw != 0.0
                        ax, aw = ax[keep], aw[keep]
                        den = denominator(kind, s, b, ax, alpha)
                        if kind != 0:
                            near = np.abs(den) < 1e-12 * alpha * b * (1.0 + s)
                            bad += int(near.sum())
                            ax, aw, den = ax[~near], aw[~near], den[~near]
                        g = interp(table_g, ax, dxi)
                        if undo:
                            inner += np.sum(aw * (g / den) * den)
                        else:
                            inner += np.sum(aw * g / den)
                    total += wb * wgt * fval * inner
        out[m] = total / math.pi
    return out, bad
