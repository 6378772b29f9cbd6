"""Dyadic frequency regions and the bilinear normal-form transform.

Littlewood-Paley pieces are built in log2 frequency from the C-infinity
step s(x) = f(x)/(f(x)+f(1-x)), f(x) = exp(-1/x):

    T_j(xi)   = s(2 (log2 xi - j + 3/4))
    phi_j(xi) = T_j(xi) - T_{j+1}(xi)

so phi_j lives on (2^{j-3/4}, 2^{j+3/4}), equals 1 on [2^{j-1/4}, 2^{j+1/4}]
and the phi_j telescope to 1.  On a grid the lowest and highest blocks
absorb everything below and above, which keeps the finite sum exact.

Pair indices (j, k) always refer to (first argument, second argument);
for Omega that is (frequency of N, frequency of u).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import RadialField, RadialGrid, dst_forward, dst_inverse

try:
    from ._bilinear import triangle_quadrature as _kernel
    KERNEL = "compiled"
except ImportError:  # pragma: no cover - exercised when the extension is absent
    from ._bilinear_py import triangle_quadrature as _kernel
    KERNEL = "python"

from . import _bilinear_py

__all__ = [
    "RegionKind",
    "FrequencyRegion",
    "region_contains",
    "default_beta",
    "lp_weight",
    "lp_indices",
    "lp_project",
    "masked_product",
    "continuous_spectrum",
    "bilinear",
    "omega",
    "omega_plus",
    "omega_minus",
    "omega_tilde",
    "resonance_scan",
    "resonance_ok",
    "normal_form_residual",
    "ResidualReport",
    "Denominator",
    "KERNEL",
]

log = logging.getLogger(__name__)

LP_LOWER = 0.5   # sum_k phi_k^2 >= 1/2 for this partition
LP_UPPER = 1.0   # and <= 1


# -- regions ---------------------------------------------------------------

class RegionKind(enum.Enum):
    XL = "XL"
    RL = "RL"
    LL = "LL"
    LH = "LH"
    HH = "HH"
    RR = "RR"
    LX = "LX"


def default_beta(alpha: float) -> float:
    return float(max(10, math.ceil(5 + abs(math.log2(alpha)))))


@dataclass(frozen=True)
class FrequencyRegion:
    """A union of the named dyadic regions at threshold ``beta``."""

    kinds: tuple
    beta: float

    def __post_init__(self):
        kinds = tuple(RegionKind(k) if not isinstance(k, RegionKind) else k
                      for k in ((self.kinds,) if isinstance(self.kinds, (str, RegionKind))
                                else self.kinds))
        object.__setattr__(self, "kinds", kinds)

    @classmethod
    def of(cls, *names, beta: float) -> "FrequencyRegion":
        return cls(tuple(names), float(beta))

    def __contains__(self, pair) -> bool:
        j, k = pair
        return any(region_contains(kind, j, k, self.beta) for kind in self.kinds)

    def __or__(self, other: "FrequencyRegion") -> "FrequencyRegion":
        if other.beta != self.beta:
            raise ValueError("cannot join regions with different beta")
        return FrequencyRegion(self.kinds + other.kinds, self.beta)


def region_contains(kind, j: int, k: int, beta: float) -> bool:
    """Membership of the index pair (j, k).

    LH is taken as {k > j - 5} minus LL, which makes {XL, LL, RL, LH} a
    partition of Z^2 together with the other three definitions.
    """
    kind = RegionKind(kind) if not isinstance(kind, RegionKind) else kind
    if kind is RegionKind.XL:
        return j >= max(k + 5, beta)
    if kind is RegionKind.RL:
        return abs(j) < beta and j >= k + 5
    if kind is RegionKind.LL:
        return max(j, k) <= -beta
    if kind is RegionKind.LH:
        return k > j - 5 and not max(j, k) <= -beta
    if kind is RegionKind.HH:
        return abs(j - k) < 5 and max(j, k) >= beta
    if kind is RegionKind.RR:
        return max(j, k) < beta
    if kind is RegionKind.LX:
        return k >= max(j + 5, beta)
    raise ValueError(kind)


# -- Littlewood-Paley pieces --------------------------------------------------

def lp_indices(grid: RadialGrid) -> tuple[int, int]:
    """Smallest range of blocks whose lumped ends cover every grid wavenumber."""
    lo = math.floor(math.log2(grid.k[0]) + 0.25)
    hi = math.ceil(math.log2(grid.k[-1]) - 0.25)
    return lo, hi


def lp_weight(xi, lo_edge: float, hi_edge: float) -> np.ndarray:
    """T_lo(xi) - T_hi(xi); infinite edges give the lumped end blocks."""
    return _bilinear_py.weight(xi, lo_edge, hi_edge)


def _block_edges(j: int, lo: int, hi: int) -> tuple[float, float]:
    return (-math.inf if j <= lo else float(j)), (math.inf if j >= hi else float(j + 1))


def lp_symbol(grid: RadialGrid, j: int) -> np.ndarray:
    lo, hi = lp_indices(grid)
    if j < lo or j > hi:
        return np.zeros(grid.n)
    return lp_weight(grid.k, *_block_edges(j, lo, hi))


def lp_project(f: RadialField, k: int) -> RadialField:
    if not f.is_physical:
        raise ValueError("needs a physical field")
    g = f.grid
    return f.with_values(dst_inverse(g, lp_symbol(g, k) * dst_forward(g, f.values)))


def _pieces(grid: RadialGrid, region: FrequencyRegion) -> np.ndarray:
    """Rows (lb, ub, la, ua): for each first-argument block j, the contiguous
    runs of second-argument blocks k with (j, k) in the region."""
    lo, hi = lp_indices(grid)
    rows = []
    for j in range(lo, hi + 1):
        lb, ub = _block_edges(j, lo, hi)
        ks = [k for k in range(lo, hi + 1) if (j, k) in region]
        run_start = None
        for k in ks + [None]:
            if run_start is None:
                run_start = prev = k
                continue
            if k is not None and k == prev + 1:
                prev = k
                continue
            la = -math.inf if run_start <= lo else float(run_start)
            ua = math.inf if prev >= hi else float(prev + 1)
            rows.append((lb, ub, la, ua))
            run_start = prev = k
    return np.array(rows, dtype=float).reshape(-1, 4)


def masked_product(f: RadialField, g: RadialField, region: FrequencyRegion) -> RadialField:
    """sum over (j, k) in region of (P_j f)(P_k g), evaluated pointwise."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    grid = f.grid
    fh = dst_forward(grid, f.values)
    gh = dst_forward(grid, g.values)
    out = np.zeros(grid.n, dtype=complex)
    for lb, ub, la, ua in _pieces(grid, region):
        pf = dst_inverse(grid, lp_weight(grid.k, lb, ub) * fh)
        pg = dst_inverse(grid, lp_weight(grid.k, la, ua) * gh)
        out += pf * pg
    return grid.field(out)


# -- continuous spectra and the bilinear quadrature ---------------------------

def continuous_spectrum(f: RadialField, refine: int = 16) -> tuple[np.ndarray, float]:
    """Table of W(xi) = int_0^r_max r f(r) sin(xi r) dr on xi = q dxi.

    Zero padding the type-I sine transform by ``refine`` gives the trapezoid
    values on a grid ``refine`` times finer than the native wavenumbers.
    """
    g = f.grid
    length = refine * (g.n + 1) - 1
    padded = np.zeros(length, dtype=complex)
    padded[: g.n] = g.r * f.values
    vals = 0.5 * g.h * sfft.dst(padded, type=1)
    table = np.concatenate([[0.0], vals, [0.0]])
    return table, g.dk / refine


class Denominator(enum.IntEnum):
    ONE = 0
    SCHRODINGER_PLUS = 1
    SCHRODINGER_MINUS = 2
    WAVE = 3


def bilinear(f: RadialField, g: RadialField, region: FrequencyRegion,
             denominator: Denominator, alpha: float = 1.0, conj_f: bool = False,
             conj_g: bool = False, undo: bool = False, panel: float | None = None,
             refine: int = 16, kernel=None) -> RadialField:
    """Radial bilinear multiplier

        W_out(s) = (1/pi) iint_{|a-b| <= s <= a+b} mask(b, a) W_f(b) W_g(a) / den(s, b, a)

    evaluated at the grid wavenumbers and mapped back to a physical field.
    ``undo`` multiplies the integrand back by the denominator.
    """
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    grid = f.grid
    pieces = _pieces(grid, region)
    if pieces.shape[0] == 0:
        return grid.zeros()
    tf, dxi = continuous_spectrum(f.conj() if conj_f else f, refine)
    tg, _ = continuous_spectrum(g.conj() if conj_g else g, refine)
    if panel is None:
        panel = min(0.25, 2.0 * np.pi / (0.5 * grid.r_max))
    run = _kernel if kernel is None else kernel
    w_out, bad = run(np.ascontiguousarray(grid.k), tf, tg, float(dxi), pieces,
                     int(denominator), float(alpha), bool(undo), float(panel))
    if bad:
        raise ArithmeticError(f"{bad} quadrature nodes hit a near-resonant denominator")
    w_hat = np.asarray(w_out) / grid.spectral_to_continuum
    return grid.field(dst_inverse(grid, w_hat))


def _nonresonant(beta):
    return FrequencyRegion.of("XL", "LL", beta=beta)


def _wave_region(beta):
    return FrequencyRegion.of("XL", "LX", beta=beta)


def omega_plus(f, g, beta, alpha, **kw):
    return bilinear(f, g, _nonresonant(beta), Denominator.SCHRODINGER_PLUS, alpha, **kw)


def omega_minus(f, g, beta, alpha, **kw):
    return bilinear(f, g, _nonresonant(beta), Denominator.SCHRODINGER_MINUS, alpha, **kw)


def omega(n_field: RadialField, u: RadialField, beta: float, alpha: float,
          denominator_one: bool = False, undo: bool = False, **kw) -> RadialField:
    """(Omega_+(N, u) + Omega_-(conj N, u)) / 2 on XL u LL."""
    if denominator_one:
        plus = bilinear(n_field, u, _nonresonant(beta), Denominator.ONE, alpha, **kw)
        minus = bilinear(n_field, u, _nonresonant(beta), Denominator.ONE, alpha,
                         conj_f=True, **kw)
    else:
        plus = omega_plus(n_field, u, beta, alpha, undo=undo, **kw)
        minus = omega_minus(n_field, u, beta, alpha, conj_f=True, undo=undo, **kw)
    return (plus + minus) * 0.5


def omega_tilde(u: RadialField, u2: RadialField, beta: float, alpha: float,
                undo: bool = False, **kw) -> RadialField:
    """Wave-denominator multiplier on XL u LX with the second argument conjugated."""
    return bilinear(u, u2, _wave_region(beta), Denominator.WAVE, alpha, conj_g=True,
                    undo=undo, **kw)


# -- resonance scan ------------------------------------------------------------

RESONANCE_LL_BAND = (0.5, 2.0)
RESONANCE_FLOOR = 0.5


def resonance_ok(scan: dict) -> bool:
    """LL ratios inside RESONANCE_LL_BAND, normalized XL ratios above RESONANCE_FLOOR."""
    lo, hi = RESONANCE_LL_BAND
    return bool(lo <= scan["min_ratio_ll"] and scan["max_ratio_ll"] <= hi
                and scan["min_ratio_schrodinger"] >= RESONANCE_FLOOR
                and scan["min_ratio_wave"] >= RESONANCE_FLOOR)


def resonance_scan(beta: float, alpha: float, samples: int = 24, depth: int = 12) -> dict:
    """Minimum normalized phases over the mask supports.

    LL: |-s^2 +- alpha b + a^2| / (alpha b).
    XL (Schrodinger): |-s^2 +- alpha b + a^2| / (b (1 + s)).
    XL u LX (wave): |b^2 - a^2 - alpha s| / (s (1 + s)).
    The scan covers ``depth`` dyadic blocks past the region boundary, with
    ``samples`` points per axis in log2 b, log2 a and along s in the triangle.
    """
    t = np.linspace(0.0, 1.0, samples)
    u = np.linspace(-0.75, 0.75, samples)

    def triangles(jb, ka):
        lb = (jb[:, None] + u[None, :]).ravel()
        la = (ka[:, None] + u[None, :]).ravel()
        b = 2.0 ** lb[:, None, None]
        a = 2.0 ** la[None, :, None]
        s = np.abs(a - b) + t[None, None, :] * (a + b - np.abs(a - b))
        return np.broadcast_arrays(s, b, a)

    def pair_blocks(kind, j_range, k_range):
        pairs = [(j, k) for j in j_range for k in k_range
                 if region_contains(kind, j, k, beta)]
        return pairs

    def min_over(pairs, fn):
        best = np.inf
        for j, k in pairs:
            s, b, a = triangles(np.array([j]), np.array([k]))
            best = min(best, float(np.min(fn(s, b, a))))
        return best

    lo = int(-beta - depth)
    hi = int(beta + depth)
    ll_pairs = pair_blocks("LL", range(lo, int(-beta) + 1), range(lo, int(-beta) + 1))
    xl_pairs = pair_blocks("XL", range(int(math.floor(beta)), hi), range(lo, hi))
    lx_pairs = [(k, j) for j, k in xl_pairs]

    def schr(sign):
        return lambda s, b, a: np.abs(-s**2 + sign * alpha * b + a**2)

    ll = min(min_over(ll_pairs, lambda s, b, a: schr(+1)(s, b, a) / (alpha * b)),
             min_over(ll_pairs, lambda s, b, a: schr(-1)(s, b, a) / (alpha * b)))
    ll_max = 0.0
    for j, k in ll_pairs:
        s, b, a = triangles(np.array([j]), np.array([k]))
        for sign in (+1, -1):
            ll_max = max(ll_max, float(np.max(schr(sign)(s, b, a) / (alpha * b))))
    xl = min(min_over(xl_pairs, lambda s, b, a: schr(+1)(s, b, a) / (b * (1 + s))),
             min_over(xl_pairs, lambda s, b, a: schr(-1)(s, b, a) / (b * (1 + s))))

    def wave(s, b, a):
        return np.abs(b**2 - a**2 - alpha * s) / (s * (1 + s))

    wave_min = min(min_over(xl_pairs, wave), min_over(lx_pairs, wave))
    return {
        "beta": beta,
        "alpha": alpha,
        "min_ratio_ll": ll,
        "max_ratio_ll": ll_max,
        "min_ratio_schrodinger": xl,
        "min_ratio_wave": wave_min,
        "samples": samples,
    }


# -- transformed-equation residual --------------------------------------------

@dataclass
class ResidualReport:
    residual: float
    times: np.ndarray
    per_sample: np.ndarray
    boundary_norm: float
    cubic_norm: float


def _h1_l2_norm(grid: RadialGrid, u_hat, n_hat) -> float:
    scale = 4.0 * np.pi * grid.h
    return float(np.sqrt(scale * np.sum((1.0 + grid.k**2) * np.abs(u_hat) ** 2
                                        + np.abs(n_hat) ** 2)))


def normal_form_residual(traj, beta: float, panel: float | None = None,
                         refine: int = 16, max_spacing: float = 0.01,
                         kernel=None) -> ResidualReport:
    """Check the trajectory against the integral form obtained by one
    integration by parts in time on the non-resonant regions:

        u(t) = e^{-itL}[u0 + Om(N0,u0)] - Om(N,u)(t)
               - i int_0^t e^{-i(t-s)L}[(nu)_{LH u RL} + (Om+(aD|u|^2,u) - Om-(aD|u|^2,u))/2
                                        + Om(N, nu)] ds
        N(t) = e^{itaD}[N0 + aD Omt(u0,u0)] - aD Omt(u,u)(t)
               + int_0^t e^{i(t-s)aD}[-i aD (u conj u)_{HH u RR}
                                      + aD(-i Omt(nu,u) + i Omt(u,nu))] ds

    with L the Laplacian, n = Re N, Om = omega and Omt = omega_tilde.
    Duhamel integrals use the trapezoid rule on the samples in the
    interaction frame.
    """
    states = traj.states
    if len(states) < 2:
        raise ValueError("need at least two samples")
    times = traj.times
    spacing = np.diff(times)
    if spacing.max() > max_spacing * (1 + 1e-9):
        raise ValueError(f"sample spacing {spacing.max():.3g} exceeds {max_spacing}")
    grid = traj.grid
    alpha = states[0].alpha
    k = grid.k
    kw = dict(panel=panel, refine=refine, kernel=kernel)
    reg_a_c = FrequencyRegion.of("LH", "RL", beta=beta)
    reg_w_c = FrequencyRegion.of("HH", "RR", beta=beta)

    def spec(f):
        return dst_forward(grid, f.values)

    def terms(st):
        u, nf = st.u, st.n_field
        n_re = nf.real
        nu = n_re * u
        u_sq = grid.field(np.abs(u.values) ** 2)
        d_usq = grid.field(dst_inverse(grid, alpha * k * dst_forward(grid, u_sq.values)))
        om = omega(nf, u, beta, alpha, **kw)
        omt = omega_tilde(u, u, beta, alpha, **kw)
        f_u = (masked_product(n_re, u, reg_a_c)
               + (omega_plus(d_usq, u, beta, alpha, **kw)
                  - omega_minus(d_usq, u, beta, alpha, **kw)) * 0.5
               + omega(nf, nu, beta, alpha, **kw))
        f_n_inner = (omega_tilde(nu, u, beta, alpha, **kw) * (-1j)
                     + omega_tilde(u, nu, beta, alpha, **kw) * 1j)
        f_n = (-1j * alpha * k * spec(masked_product(u, u.conj(), reg_w_c))
               + alpha * k * spec(f_n_inner))
        return spec(om), alpha * k * spec(omt), spec(f_u), f_n

    prop_u = lambda t: np.exp(1j * k**2 * t)         # e^{-itL}
    prop_n = lambda t: np.exp(1j * alpha * k * t)    # e^{it alpha D}

    s0 = states[0]
    b_u0, b_n0, f_u0, f_n0 = terms(s0)
    base_u = spec(s0.u) + b_u0
    base_n = spec(s0.n_field) + b_n0
    acc_u = np.zeros(grid.n, dtype=complex)
    acc_n = np.zeros(grid.n, dtype=complex)
    prev = (f_u0 * prop_u(-times[0]), f_n0 * prop_n(-times[0]))
    per = np.zeros(len(states))
    peak = _h1_l2_norm(grid, spec(s0.u), spec(s0.n_field))
    boundary = 0.0
    cubic = 0.0
    for i in range(1, len(states)):
        st = states[i]
        t = times[i] - times[0]
        b_u, b_n, f_u, f_n = terms(st)
        cur = (f_u * prop_u(-t), f_n * prop_n(-t))
        dt = times[i] - times[i - 1]
        acc_u += 0.5 * dt * (prev[0] + cur[0])
        acc_n += 0.5 * dt * (prev[1] + cur[1])
        prev = cur
        rhs_u = prop_u(t) * base_u - b_u - 1j * prop_u(t) * acc_u
        rhs_n = prop_n(t) * base_n - b_n + prop_n(t) * acc_n
        uh, nh = spec(st.u), spec(st.n_field)
        per[i] = _h1_l2_norm(grid, uh - rhs_u, nh - rhs_n)
        peak = max(peak, _h1_l2_norm(grid, uh, nh))
        boundary = max(boundary, _h1_l2_norm(grid, b_u, b_n))
        cubic = max(cubic, _h1_l2_norm(grid, acc_u, acc_n))
    per = per / max(1.0, peak)
    return ResidualReport(float(per.max()), times, per, boundary, cubic)
