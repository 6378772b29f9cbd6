"""Positive radial ground state of -Laplacian Q + Q = Q^3 in R^3.

The primary solver shoots from the origin and bisects on Q(0).  A
spectral-renormalization fixed-point iteration on the sine grid serves as
an independent cross-check.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .functionals import grad_sq, mass as _mass, nls_energy
from .grid import RadialField, RadialGrid, dst_forward, dst_inverse, value_at_origin
from .state import State

__all__ = [
    "GroundState",
    "ThresholdConstants",
    "solve_ground_state",
    "shoot_central_value",
    "fixed_point_ground_state",
    "scale_ground_state",
    "standing_wave_state",
    "threshold_constants",
    "pohozaev_ratios",
    "save_cache",
    "load_cache",
]

log = logging.getLogger(__name__)

CACHE_VERSION = "zakharov-lab-ground-state v1"

_R_START = 1e-4          # series start, error O(r^4) ~ 1e-16
_FINE_H = 1e-3           # spacing of the stored fine profile
_TAIL_MATCH = 1e-6       # switch to the linear tail C e^{-r}/r below this value
_FINE_R_MAX = 400.0      # beyond this e^{-r}/r underflows anyway


@dataclass(frozen=True, eq=False)
class GroundState:
    profile: RadialField
    q0: float
    mass: float
    e_s: float
    j: float
    threshold: float
    fine_r: np.ndarray = field(repr=False)
    fine_q: np.ndarray = field(repr=False)

    def __call__(self, r) -> np.ndarray:
        """Evaluate Q at arbitrary radii from the fine profile."""
        return _evaluate_fine(self.fine_r, self.fine_q, np.asarray(r, dtype=float))


@dataclass(frozen=True)
class ThresholdConstants:
    e_s_q: float
    m_q: float
    j_q: float
    product: float


# -- shooting -----------------------------------------------------------

def _rhs(r, y):
    q, dq = y
    return [dq, -2.0 * dq / r + q - q**3]


def _initial(q0):
    c = (q0 - q0**3) / 6.0
    return [q0 + c * _R_START**2, 2.0 * c * _R_START]


def _crossing(r, y):
    return y[0]


_crossing.terminal = True
_crossing.direction = -1


def _turning(r, y):
    return y[1]


_turning.terminal = True
_turning.direction = 1


def _shoot(q0: float, r_end: float, dense: bool = False):
    return solve_ivp(_rhs, (_R_START, r_end), _initial(q0), method="DOP853",
                     rtol=1e-13, atol=1e-16, events=(_crossing, _turning),
                     dense_output=dense)


def _classify_shot(q0: float, r_end: float) -> int:
    """+1 if the shot crosses zero (q0 too large), -1 if it turns back up."""
    sol = _shoot(q0, r_end)
    if sol.t_events[0].size:
        return 1
    if sol.t_events[1].size:
        return -1
    return 0


def shoot_central_value(lo: float = 4.0, hi: float = 4.7, r_end: float = 40.0,
                        max_iter: int = 200) -> float:
    """Bisect on Q(0) between undershooting and crossing shots."""
    s_lo, s_hi = _classify_shot(lo, r_end), _classify_shot(hi, r_end)
    if not (s_lo == -1 and s_hi == 1):
        raise ValueError(f"interval [{lo}, {hi}] does not bracket the ground state")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            return mid
        s = _classify_shot(mid, r_end)
        if s == 1:
            hi = mid
        elif s == -1:
            lo = mid
        else:
            return mid
    raise RuntimeError("bisection on Q(0) did not converge")


def _fine_profile(q0: float):
    """Integrate the accepted shot and glue the linear tail where Q ~ 1e-6."""
    sol = _shoot(q0, 40.0, dense=True)
    r_stop = sol.t[-1]
    r_probe = np.arange(_R_START, r_stop, _FINE_H)
    q_probe = sol.sol(r_probe)[0]
    below = np.nonzero(q_probe < _TAIL_MATCH)[0]
    if below.size == 0:
        raise RuntimeError("shot never reached the tail matching level")
    r_match = r_probe[below[0]]
    c_tail = sol.sol(r_match)[0] * r_match * np.exp(r_match)
    r_fine = np.concatenate([[0.0], np.arange(_FINE_H, _FINE_R_MAX, _FINE_H)])
    q_fine = np.empty_like(r_fine)
    inner = r_fine < r_match
    q_fine[inner] = sol.sol(np.maximum(r_fine[inner], _R_START))[0]
    q_fine[0] = q0
    rt = r_fine[~inner]
    q_fine[~inner] = c_tail * np.exp(-rt) / rt
    return r_fine, q_fine


def _evaluate_fine(r_fine, q_fine, r):
    # interpolate log Q so the exponential tail stays accurate
    interp = PchipInterpolator(r_fine, np.log(q_fine), extrapolate=True)
    out = np.zeros_like(r)
    inside = r <= r_fine[-1]
    out[inside] = np.exp(interp(r[inside]))
    return out


def _assemble(grid: RadialGrid, q0: float, r_fine, q_fine) -> GroundState:
    q = _evaluate_fine(r_fine, q_fine, grid.r)
    prof = grid.field(q)
    m = _mass(prof)
    e = nls_energy(prof)
    return GroundState(profile=prof, q0=q0, mass=m, e_s=e, j=e + m, threshold=e * m,
                       fine_r=r_fine, fine_q=q_fine)


def solve_ground_state(grid: RadialGrid, tol: float = 1e-10,
                       cache_path: str | os.PathLike | None = None) -> GroundState:
    """Shooting solve projected onto ``grid``.

    ``tol`` bounds the bisection width on Q(0); the ODE itself is always
    integrated near machine precision.
    """
    if grid.r_max < 15:
        raise ValueError(f"r_max={grid.r_max} is too small to hold the ground-state tail")
    if not 0 < tol <= 1e-4:
        raise ValueError(f"tol must lie in (0, 1e-4], got {tol}")
    q0 = None
    if cache_path is not None and os.path.exists(cache_path):
        q0 = _read_cache_q0(cache_path, grid)
    if q0 is None:
        q0 = shoot_central_value()
        log.info("ground state Q(0) = %.15f", q0)
    r_fine, q_fine = _fine_profile(q0)
    gs = _assemble(grid, q0, r_fine, q_fine)
    if cache_path is not None:
        save_cache(gs, cache_path)
    return gs


# -- fixed-point cross-check ----------------------------------------------

def fixed_point_ground_state(grid: RadialGrid, tol: float = 1e-13, max_iter: int = 2000,
                             initial=None):
    """Spectral renormalization on the sine grid.

    Iterates q_hat <- S^{3/2} (q^3)_hat / (1 + k^2) with the stabilizing
    factor S = <(1+k^2) q_hat, q_hat> / <q_hat, (q^3)_hat>.  Returns
    ``(q0, mass, profile)``.
    """
    symbol = 1.0 + grid.k**2
    q = np.exp(-grid.r**2 / 4.0) * 3.0 if initial is None else np.asarray(initial, float)
    q_hat = dst_forward(grid, q).real
    for _ in range(max_iter):
        cube_hat = dst_forward(grid, dst_inverse(grid, q_hat).real ** 3).real
        s = np.dot(symbol * q_hat, q_hat) / np.dot(q_hat, cube_hat)
        new_hat = s**1.5 * cube_hat / symbol
        change = np.linalg.norm(new_hat - q_hat) / np.linalg.norm(new_hat)
        q_hat = new_hat
        if change < tol:
            break
    else:
        raise RuntimeError("fixed-point iteration did not converge")
    prof = grid.field(dst_inverse(grid, q_hat).real)
    return value_at_origin(prof).real, _mass(prof), prof


# -- scaling family -------------------------------------------------------

def scale_ground_state(gs: GroundState, lam: float, grid: RadialGrid | None = None) -> RadialField:
    """lam * Q(lam r) sampled on ``grid`` (the profile grid by default)."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    grid = gs.profile.grid if grid is None else grid
    if lam == 1.0 and grid == gs.profile.grid:
        return gs.profile
    return grid.field(lam * gs(lam * grid.r))


def standing_wave_state(gs: GroundState, lam: float = 1.0, theta: float = 0.0,
                        alpha: float = 1.0, grid: RadialGrid | None = None) -> State:
    q = scale_ground_state(gs, lam, grid)
    qv = q.values.real
    return State(q.with_values(np.exp(1j * theta) * qv), q.with_values(qv**2), alpha, 0.0)


def threshold_constants(gs: GroundState) -> ThresholdConstants:
    return ThresholdConstants(e_s_q=gs.e_s, m_q=gs.mass, j_q=gs.j, product=gs.threshold)


def pohozaev_ratios(gs: GroundState) -> tuple[float, float]:
    """||grad Q||^2 / (3/4 ||Q||_4^4) and ||Q||^2 / (1/4 ||Q||_4^4); both 1 exactly.

    ``gs.mass`` is half the squared L^2 norm.
    """
    prof = gs.profile
    q4 = float(np.sum(np.abs(prof.values) ** 4 * prof.grid.weights))
    g2 = grad_sq(prof.grid, prof.values)
    return g2 / (0.75 * q4), 2.0 * gs.mass / (0.25 * q4)


# -- cache ----------------------------------------------------------------

def save_cache(gs: GroundState, path) -> None:
    g = gs.profile.grid
    header = f"{CACHE_VERSION}\nn {g.n}\nr_max {g.r_max!r}\nq0 {gs.q0!r}"
    # write then rename so concurrent sweep workers never read a partial file
    tmp = f"{os.fspath(path)}.{os.getpid()}.tmp"
    np.savetxt(tmp, gs.profile.values.real, header=header, fmt="%.17e")
    os.replace(tmp, path)


def _read_cache_q0(path, grid: RadialGrid):
    with open(path) as fh:
        lines = [fh.readline().lstrip("# ").strip() for _ in range(4)]
    if lines[0] != CACHE_VERSION:
        log.warning("ignoring ground-state cache %s with header %r", path, lines[0])
        return None
    return float(lines[3].split()[1])


def load_cache(path) -> GroundState:
    with open(path) as fh:
        lines = [fh.readline().lstrip("# ").strip() for _ in range(4)]
    if lines[0] != CACHE_VERSION:
        raise ValueError(f"unsupported cache header {lines[0]!r}")
    n = int(lines[1].split()[1])
    r_max = float(lines[2].split()[1])
    q0 = float(lines[3].split()[1])
    values = np.loadtxt(path)
    grid = RadialGrid(n, r_max)
    r_fine, q_fine = _fine_profile(q0)
    gs = _assemble(grid, q0, r_fine, q_fine)
    if not np.allclose(gs.profile.values.real, values, rtol=1e-10, atol=1e-14):
        raise ValueError("cached profile does not match its central value")
    return gs
