"""Conserved and variational functionals of the radial Zakharov system."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .grid import RadialField, RadialGrid, dst_forward
from .state import State

__all__ = [
    "FunctionalRecord",
    "mass",
    "nls_energy",
    "zakharov_energy",
    "second_order_energy",
    "k_functional",
    "action",
    "g_functional",
    "deviation",
    "functional_record",
    "grad_sq",
]

_CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class FunctionalRecord:
    mass: float
    e_s: float
    e_z: float
    k: float
    nu_l2: float
    grad_u_l2: float
    u_l4: float
    im_n_l2: float

    def as_dict(self) -> dict:
        return asdict(self)


# -- array kernels --------------------------------------------------------

def grad_sq(grid: RadialGrid, u: np.ndarray) -> float:
    w_hat = dst_forward(grid, u)
    return float(4.0 * np.pi * grid.h * np.sum(grid.k**2 * np.abs(w_hat) ** 2))


def _integral(grid: RadialGrid, density: np.ndarray) -> float:
    return float(np.sum(density * grid.weights))


def _l2sq(grid, f):
    return _integral(grid, np.abs(f) ** 2)


def _record(grid: RadialGrid, u: np.ndarray, n: np.ndarray) -> FunctionalRecord:
    g2 = grad_sq(grid, u)
    u2 = np.abs(u) ** 2
    m = 0.5 * _integral(grid, u2)
    q4 = _integral(grid, u2**2)
    e_s = 0.5 * g2 - 0.25 * q4
    nu2 = _l2sq(grid, n - u2)
    e_z_direct = 0.5 * g2 + 0.25 * _l2sq(grid, n) - 0.5 * _integral(grid, n.real * u2)
    e_z_split = e_s + 0.25 * nu2
    if abs(e_z_direct - e_z_split) > _CONSISTENCY_TOL * (1.0 + abs(e_z_direct)):
        raise ArithmeticError(
            f"energy forms disagree: {e_z_direct!r} vs {e_z_split!r}")
    return FunctionalRecord(
        mass=m,
        e_s=e_s,
        e_z=e_z_direct,
        k=g2 - 0.75 * q4,
        nu_l2=np.sqrt(nu2),
        grad_u_l2=np.sqrt(g2),
        u_l4=q4**0.25,
        im_n_l2=np.sqrt(_l2sq(grid, n.imag)),
    )


# -- public API -------------------------------------------------------------

def _phys(u: RadialField):
    if not u.is_physical:
        raise ValueError("functionals need physical fields")
    return u.grid, u.values


def mass(u: RadialField) -> float:
    grid, v = _phys(u)
    return 0.5 * _l2sq(grid, v)


def nls_energy(u: RadialField) -> float:
    grid, v = _phys(u)
    return 0.5 * grad_sq(grid, v) - 0.25 * _integral(grid, np.abs(v) ** 4)


def zakharov_energy(state: State) -> float:
    """Direct form; cross-checked against E_S + ||N - |u|^2||^2 / 4."""
    return _record(state.grid, state.u.values, state.n_field.values).e_z


def second_order_energy(u0: RadialField, n0: RadialField, n1: RadialField, alpha: float) -> float:
    """int |grad u|^2 + (|D^{-1} n_t|^2/alpha^2 + n^2)/2 - n|u|^2, which is 2 E_Z."""
    grid, v = _phys(u0)
    y_hat = dst_forward(grid, n1.values) / grid.k
    y_sq = 4.0 * np.pi * grid.h * float(np.sum(np.abs(y_hat) ** 2))
    n = n0.values.real
    return (grad_sq(grid, v) + 0.5 * (y_sq / alpha**2 + _l2sq(grid, n))
            - _integral(grid, n * np.abs(v) ** 2))


def k_functional(u: RadialField) -> float:
    grid, v = _phys(u)
    return grad_sq(grid, v) - 0.75 * _integral(grid, np.abs(v) ** 4)


def action(u: RadialField, lam: float) -> float:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return nls_energy(u) + lam**2 * mass(u)


def g_functional(u: RadialField, lam: float) -> float:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    grid, v = _phys(u)
    return grad_sq(grid, v) / 6.0 + 0.5 * lam**2 * _l2sq(grid, v)


def deviation(state: State) -> tuple[RadialField, RadialField]:
    """Complex deviation N - |u|^2 and real deviation Re N - |u|^2."""
    u2 = np.abs(state.u.values) ** 2
    n = state.n_field.values
    g = state.grid
    return g.field(n - u2), g.field(n.real - u2)


def functional_record(state: State) -> FunctionalRecord:
    return _record(state.grid, state.u.values, state.n_field.values)
