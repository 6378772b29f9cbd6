"""State of the first-order Zakharov system and sampled trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import RadialField, RadialGrid, apply_D_power

__all__ = ["State", "Trajectory", "from_second_order", "to_second_order"]


@dataclass(frozen=True, eq=False)
class State:
    """Schrodinger field ``u`` and complex wave field ``n_field`` at ``time``."""

    u: RadialField
    n_field: RadialField
    alpha: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.u.grid != self.n_field.grid:
            raise ValueError("u and N live on different grids")
        if not (self.u.is_physical and self.n_field.is_physical):
            raise ValueError("state fields must be physical")

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    @classmethod
    def from_arrays(cls, grid: RadialGrid, u, n, alpha=1.0, time=0.0) -> "State":
        return cls(grid.field(u), grid.field(n), float(alpha), float(time))

    def replace(self, u=None, n=None, time=None) -> "State":
        g = self.grid
        return State(
            g.field(self.u.values if u is None else u),
            g.field(self.n_field.values if n is None else n),
            self.alpha,
            self.time if time is None else float(time),
        )


def from_second_order(u0: RadialField, n0: RadialField, n1: RadialField, alpha: float) -> State:
    """Pack (u, n, dn/dt) into N = n - i D^{-1} (dn/dt) / alpha."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not (u0.grid == n0.grid == n1.grid):
        raise ValueError("fields live on different grids")
    y = apply_D_power(n1, -1.0)
    n = n0.values - 1j * y.values / alpha
    return State(u0, u0.grid.field(n), float(alpha), 0.0)


def to_second_order(state: State) -> tuple[RadialField, RadialField]:
    """Recover (n, dn/dt) = (Re N, -alpha D Im N)."""
    n = state.n_field.real
    dn = apply_D_power(state.n_field.imag, 1.0) * (-state.alpha)
    return n, dn.real


@dataclass
class Trajectory:
    """Ordered samples ``(State, FunctionalRecord)`` of one run."""

    grid: RadialGrid
    dt: float
    samples: list = field(default_factory=list)
    monitors: dict = field(default_factory=dict)
    blowup_suspected: bool = False
    failure_time: float | None = None
    warnings: list = field(default_factory=list)

    def append(self, state: State, record, **monitor_values):
        if self.samples and state.time <= self.samples[-1][0].time:
            raise ValueError("sample times must be strictly increasing")
        self.samples.append((state, record))
        for key, val in monitor_values.items():
            self.monitors.setdefault(key, []).append(val)

    def __len__(self):
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s, _ in self.samples])

    @property
    def states(self) -> list:
        return [s for s, _ in self.samples]

    @property
    def records(self) -> list:
        return [r for _, r in self.samples]

    def column(self, name: str) -> np.ndarray:
        if name in self.monitors:
            return np.asarray(self.monitors[name], dtype=float)
        return np.array([getattr(r, name) for r in self.records], dtype=float)
