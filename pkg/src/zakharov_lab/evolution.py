"""Strang splitting for the first-order radial Zakharov system.

The free part is diagonal in the sine basis.  The coupling part is solved
exactly: |u| is frozen under u <- exp(-i dt Re N) u and Re N is frozen
because the N increment -i dt alpha D|u|^2 is purely imaginary.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .functionals import functional_record
from .grid import RadialGrid, dst_forward, dst_inverse
from .state import State, Trajectory

__all__ = [
    "linear_flow",
    "nonlinear_step",
    "strang_step",
    "evolve",
    "time_reverse",
    "conservation_report",
    "ConservationReport",
    "outer_mass_fraction",
]

log = logging.getLogger(__name__)

REFLECTION_FRACTION = 1e-6


def linear_flow(state: State, dt: float) -> State:
    g = state.grid
    u_hat = dst_forward(g, state.u.values) * np.exp(1j * g.k**2 * dt)
    n_hat = dst_forward(g, state.n_field.values) * np.exp(1j * state.alpha * g.k * dt)
    return state.replace(u=dst_inverse(g, u_hat), n=dst_inverse(g, n_hat),
                         time=state.time + dt)


def nonlinear_step(state: State, dt: float) -> State:
    g = state.grid
    u = state.u.values * np.exp(-1j * dt * state.n_field.values.real)
    d_u2 = dst_inverse(g, g.k * dst_forward(g, np.abs(u) ** 2))
    n = state.n_field.values - 1j * dt * state.alpha * d_u2.real
    return state.replace(u=u, n=n)


def strang_step(state: State, dt: float) -> State:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    half = linear_flow(state, 0.5 * dt)
    return linear_flow(nonlinear_step(half, dt), 0.5 * dt)


def time_reverse(state: State) -> State:
    """(u, N)(t) -> (conj u, conj N)(-t) maps solutions to solutions."""
    return State(state.u.conj(), state.n_field.conj(), state.alpha, -state.time)


class _Stepper:
    """Array-level propagator that merges adjacent linear half steps."""

    def __init__(self, grid: RadialGrid, alpha: float, dt: float):
        self.grid = grid
        self.alpha = alpha
        self.dt = dt
        k = grid.k
        self.lin_u_half = np.exp(0.5j * k**2 * dt)
        self.lin_n_half = np.exp(0.5j * alpha * k * dt)
        self.lin_u = self.lin_u_half**2
        self.lin_n = self.lin_n_half**2
        self.kick = -1j * dt * alpha * k

    def advance(self, u_hat, n_hat, steps: int):
        """``steps`` Strang steps in the spectral variables."""
        g = self.grid
        u_hat = u_hat * self.lin_u_half
        n_hat = n_hat * self.lin_n_half
        for i in range(steps):
            u = dst_inverse(g, u_hat)
            re_n = dst_inverse(g, n_hat).real
            u = u * np.exp(-1j * self.dt * re_n)
            u_hat = dst_forward(g, u)
            n_hat = n_hat + self.kick * dst_forward(g, np.abs(u) ** 2)
            if i < steps - 1:
                u_hat = u_hat * self.lin_u
                n_hat = n_hat * self.lin_n
        return u_hat * self.lin_u_half, n_hat * self.lin_n_half


def outer_mass_fraction(state: State, fraction: float = 0.1) -> float:
    g = state.grid
    dens = np.abs(state.u.values) ** 2 * g.weights
    total = dens.sum()
    if total == 0:
        return 0.0
    return float(dens[g.r > (1.0 - fraction) * g.r_max].sum() / total)


def evolve(state: State, t_final: float, dt: float, sample_every: int = 1,
           monitors=()) -> Trajectory:
    """Integrate to ``t_final``, sampling every ``sample_every`` steps.

    ``dt`` is shrunk slightly if needed so that an integer number of steps
    lands on ``t_final``.  Each monitor is a callable ``state -> dict`` whose
    entries are stored as trajectory columns.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    span = t_final - state.time
    if not span > 0:
        raise ValueError("t_final must exceed the initial time")
    if sample_every < 1:
        raise ValueError("sample_every must be a positive integer")
    steps = max(1, math.ceil(span / dt - 1e-9))
    dt = span / steps
    g = state.grid
    traj = Trajectory(grid=g, dt=dt)
    stepper = _Stepper(g, state.alpha, dt)

    def record(s):
        vals = {}
        for mon in monitors:
            vals.update(mon(s))
        traj.append(s, functional_record(s), **vals)
        if outer_mass_fraction(s) > REFLECTION_FRACTION and not traj.warnings:
            traj.warnings.append(f"mass reached the outer 10% of the grid at t={s.time:.6g}")
            log.warning(traj.warnings[-1])

    record(state)
    u_hat = dst_forward(g, state.u.values)
    n_hat = dst_forward(g, state.n_field.values)
    done = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while done < steps:
            chunk = min(sample_every, steps - done)
            u_hat, n_hat = stepper.advance(u_hat, n_hat, chunk)
            done += chunk
            t = state.time + done * dt
            if not (np.all(np.isfinite(u_hat)) and np.all(np.isfinite(n_hat))):
                traj.blowup_suspected = True
                traj.failure_time = t
                log.warning("non-finite values at t=%.6g, trajectory truncated", t)
                break
            record(State(g.field(dst_inverse(g, u_hat)), g.field(dst_inverse(g, n_hat)),
                         state.alpha, t))
    return traj


@dataclass(frozen=True)
class ConservationReport:
    mass_drift: float
    energy_drift: float


def conservation_report(traj: Trajectory) -> ConservationReport:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    m = traj.column("mass")
    e = traj.column("e_z")
    mass_drift = float(np.max(np.abs(m - m[0])) / m[0]) if m[0] > 0 else float(np.max(np.abs(m)))
    energy_drift = float(np.max(np.abs(e - e[0])) / (1.0 + abs(e[0])))
    return ConservationReport(mass_drift, energy_drift)
