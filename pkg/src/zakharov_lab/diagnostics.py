"""Besov-type norms and trajectory-level scattering / grow-up indicators."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import trapezoid

from .grid import RadialField, RadialGrid, dst_forward, dst_inverse
from .normal_form import lp_indices, lp_symbol
from .state import Trajectory

__all__ = [
    "NormSpec",
    "besov_norm",
    "z_norm",
    "spacetime_norm",
    "scattering_indicator",
    "growup_indicator",
    "h1_l2_norm",
    "pullback",
    "DEFAULT_DELTA",
    "DEFAULT_EPSILON",
    "DEFAULT_KAPPA_NORM",
]

DEFAULT_DELTA = 0.1
DEFAULT_EPSILON = 0.01
DEFAULT_KAPPA_NORM = 0.001


@dataclass(frozen=True)
class NormSpec:
    """L^{1/b}_t B^s_{1/d,2} with 1/b = infinity when b = 0."""

    b: float
    d: float
    s: float
    homogeneous: bool = True

    def __post_init__(self):
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"time exponent b must lie in [0, 1], got {self.b}")
        if not 0.0 < self.d <= 1.0:
            raise ValueError(f"space exponent d must lie in (0, 1], got {self.d}")


def _lp_norm_array(grid: RadialGrid, v: np.ndarray, p: float) -> float:
    a = np.abs(v)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float(np.sum(a**p * grid.weights) ** (1.0 / p))


def _blocks(grid: RadialGrid, values: np.ndarray, homogeneous: bool):
    """Yield (index, frequency_scale, block) for the LP decomposition.

    The inhomogeneous variant merges every block with 2^k <= 1 into one
    low-frequency block of scale 1.
    """
    lo, hi = lp_indices(grid)
    spec = dst_forward(grid, values)
    if homogeneous:
        for k in range(lo, hi + 1):
            yield k, 2.0**k, dst_inverse(grid, lp_symbol(grid, k) * spec)
        return
    low = np.zeros(grid.n)
    for k in range(lo, min(0, hi) + 1):
        low = low + lp_symbol(grid, k)
    if low.any():
        yield 0, 1.0, dst_inverse(grid, low * spec)
    for k in range(max(1, lo), hi + 1):
        yield k, 2.0**k, dst_inverse(grid, lp_symbol(grid, k) * spec)


def _besov_array(grid, values, s, p, homogeneous=True):
    total = 0.0
    for _, scale, block in _blocks(grid, values, homogeneous):
        total += scale ** (2.0 * s) * _lp_norm_array(grid, block, p) ** 2
    return float(np.sqrt(total))


def besov_norm(f: RadialField, s: float, p: float, homogeneous: bool = True) -> float:
    """(sum_k 2^{2sk} ||P_k f||_p^2)^{1/2}."""
    if not f.is_physical:
        raise ValueError("needs a physical field")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return _besov_array(f.grid, f.values, s, p, homogeneous)


def _split_y(grid, values, delta):
    """Low blocks (2^k <= 1) at regularity -3/2+delta, high blocks at -3/2-delta;
    the sum of the two pieces bounds the sum-space norm from above."""
    low = high = 0.0
    for k, scale, block in _blocks(grid, values, True):
        if k <= 0:
            low += scale ** (2.0 * (-1.5 + delta)) * _lp_norm_array(grid, block, np.inf) ** 2
        else:
            high += scale ** (2.0 * (-1.5 - delta)) * _lp_norm_array(grid, block, np.inf) ** 2
    return float(np.sqrt(low) + np.sqrt(high))


def z_norm(traj: Trajectory, delta: float = DEFAULT_DELTA) -> dict:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    g = traj.grid
    xs = [_besov_array(g, s.u.values, -0.5 - delta, np.inf, homogeneous=False)
          for s in traj.states]
    ys = [_split_y(g, s.n_field.values.real, delta) for s in traj.states]
    return {"x": float(max(xs)), "y": float(max(ys)), "x_series": xs, "y_series": ys}


def spacetime_norm(traj: Trajectory, spec: NormSpec, component: str = "u") -> float:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if component not in ("u", "N"):
        raise ValueError("component must be 'u' or 'N'")
    g = traj.grid
    p = 1.0 / spec.d
    vals = np.array([
        _besov_array(g, (s.u if component == "u" else s.n_field).values, spec.s, p,
                     spec.homogeneous)
        for s in traj.states
    ])
    if spec.b == 0:
        return float(vals.max())
    t = traj.times
    if len(t) < 2:
        return 0.0
    q = 1.0 / spec.b
    return float(trapezoid(vals**q, t) ** spec.b)


def h1_l2_norm(state) -> float:
    g = state.grid
    uh = dst_forward(g, state.u.values)
    nh = dst_forward(g, state.n_field.values)
    return float(np.sqrt(4.0 * np.pi * g.h * np.sum((1.0 + g.k**2) * np.abs(uh) ** 2
                                                   + np.abs(nh) ** 2)))


def pullback(state) -> tuple[np.ndarray, np.ndarray]:
    """Spectral coefficients of U(-t)(u, N)(t) for the free propagator U."""
    g, t = state.grid, state.time
    uh = dst_forward(g, state.u.values) * np.exp(-1j * g.k**2 * t)
    nh = dst_forward(g, state.n_field.values) * np.exp(-1j * state.alpha * g.k * t)
    return uh, nh


@dataclass
class ScatteringIndicator:
    l4_slope: float
    l4_decreasing: bool
    cauchy_times: list
    cauchy_increments: list
    cauchy_decreasing: bool
    x_trailing: float
    consistent: bool

    def as_dict(self) -> dict:
        return asdict(self)


def scattering_indicator(traj: Trajectory, points: int = 6, delta: float = DEFAULT_DELTA,
                         rtol: float = 1e-9) -> ScatteringIndicator:
    """Finite-time scattering probe on the trailing half of ``traj``.

    ``points`` evenly spaced samples of the trailing half give the pullback
    Cauchy increments.  Monotonicity allows a relative slack ``rtol`` for
    rounding only.
    """
    n = len(traj)
    if n < max(4, points):
        raise ValueError("too few samples for the scattering probe")
    half = n // 2
    t = traj.times[half:]
    l4 = traj.column("u_l4")[half:]
    slope = float(np.polyfit(t, l4, 1)[0]) if len(t) > 1 else 0.0
    scale = max(float(np.max(l4)), 1e-300)
    l4_dec = bool(np.all(np.diff(l4) <= rtol * scale)) and slope < 0
    idx = np.unique(np.linspace(half, n - 1, points).round().astype(int))
    g = traj.grid
    pulls = [pullback(traj.states[i]) for i in idx]
    incs = []
    for (u0, n0), (u1, n1) in zip(pulls[:-1], pulls[1:]):
        du, dn = u1 - u0, n1 - n0
        incs.append(float(np.sqrt(4.0 * np.pi * g.h * np.sum((1.0 + g.k**2) * np.abs(du) ** 2
                                                              + np.abs(dn) ** 2))))
    inc_scale = max(max(incs), 1e-300)
    cauchy_dec = bool(np.all(np.diff(incs) <= rtol * inc_scale))
    x_tr = max(_besov_array(g, traj.states[i].u.values, -0.5 - delta, np.inf, False)
               for i in range(half, n))
    return ScatteringIndicator(
        l4_slope=slope,
        l4_decreasing=l4_dec,
        cauchy_times=[float(traj.times[i]) for i in idx],
        cauchy_increments=incs,
        cauchy_decreasing=cauchy_dec,
        x_trailing=float(x_tr),
        consistent=bool(l4_dec and cauchy_dec),
    )


@dataclass
class GrowupIndicator:
    max_norm: float
    initial_norm: float
    trailing_slope: float
    blowup_suspected: bool
    failure_time: float | None
    consistent: bool

    def as_dict(self) -> dict:
        return asdict(self)


def growup_indicator(traj: Trajectory, rtol: float = 1e-6) -> GrowupIndicator:
    """H^1 x L^2 growth probe; grow-up is never confirmed, only consistent."""
    if len(traj) < 3:
        raise ValueError("too few samples for the grow-up probe")
    norms = np.array([h1_l2_norm(s) for s in traj.states])
    half = len(norms) // 2
    t = traj.times[half:]
    slope = float(np.polyfit(t, norms[half:], 1)[0])
    growing = slope > rtol * norms[0]
    return GrowupIndicator(
        max_norm=float(norms.max()),
        initial_norm=float(norms[0]),
        trailing_slope=slope,
        blowup_suspected=traj.blowup_suspected,
        failure_time=traj.failure_time,
        consistent=bool(growing or traj.blowup_suspected),
    )
