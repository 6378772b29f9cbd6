"""Radial discretization of R^3.

A radial function u(r) is stored on the interior nodes r_j = j*h of
[0, r_max].  The substitution w = r*u turns the radial Laplacian into
w''/r, so the type-I discrete sine transform of w diagonalizes Laplacian,
D = sqrt(-Laplacian) and every other radial Fourier multiplier.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Representation",
    "RadialGrid",
    "RadialField",
    "make_grid",
    "to_spectral",
    "to_physical",
    "apply_laplacian",
    "apply_D_power",
    "radial_derivative",
    "radial_scaling_derivative",
    "value_at_origin",
    "inner",
    "lp_norm",
    "gradient_norm",
]


class Representation(enum.Enum):
    PHYSICAL = "physical"
    SPECTRAL = "spectral"


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid with ``n`` interior nodes on ``[0, r_max]``."""

    n: int
    r_max: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"grid needs at least 8 interior nodes, got n={self.n}")
        if not np.isfinite(self.r_max) or self.r_max <= 0:
            raise ValueError(f"r_max must be positive, got {self.r_max}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "r_max", float(self.r_max))

    @cached_property
    def h(self) -> float:
        return self.r_max / (self.n + 1)

    @cached_property
    def r(self) -> np.ndarray:
        r = np.arange(1, self.n + 1) * self.h
        r.flags.writeable = False
        return r

    @cached_property
    def k(self) -> np.ndarray:
        k = np.arange(1, self.n + 1) * (np.pi / self.r_max)
        k.flags.writeable = False
        return k

    @property
    def dk(self) -> float:
        return np.pi / self.r_max

    @property
    def k_max(self) -> float:
        return self.n * np.pi / self.r_max

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal radial measure 4*pi*r_j^2*h."""
        w = 4.0 * np.pi * self.r**2 * self.h
        w.flags.writeable = False
        return w

    @cached_property
    def spectral_to_continuum(self) -> float:
        """Factor mapping orthonormal DST coefficients of w to the sine
        transform W(k) = int_0^inf w(r) sin(kr) dr at k = k_m."""
        return self.r_max / np.sqrt(2.0 * (self.n + 1))

    def field(self, values, representation=Representation.PHYSICAL) -> "RadialField":
        return RadialField(self, np.asarray(values, dtype=complex), representation)

    def from_function(self, func) -> "RadialField":
        return self.field(func(self.r))

    def zeros(self) -> "RadialField":
        return self.field(np.zeros(self.n, dtype=complex))


def make_grid(n: int, r_max: float) -> RadialGrid:
    return RadialGrid(n, r_max)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Complex radial samples (physical) or sine coefficients of w (spectral)."""

    grid: RadialGrid
    values: np.ndarray
    representation: Representation = field(default=Representation.PHYSICAL)

    # keep numpy from broadcasting ndarray * field into an object array
    __array_ufunc__ = None

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def is_physical(self) -> bool:
        return self.representation is Representation.PHYSICAL

    def _check_compatible(self, other: "RadialField"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")
        if other.representation is not self.representation:
            raise ValueError("representation mismatch")

    def with_values(self, values) -> "RadialField":
        return RadialField(self.grid, values, self.representation)

    def conj(self) -> "RadialField":
        return self.with_values(np.conj(self.values))

    @property
    def real(self) -> "RadialField":
        return self.with_values(self.values.real)

    @property
    def imag(self) -> "RadialField":
        return self.with_values(self.values.imag)

    def __abs__(self) -> "RadialField":
        return self.with_values(np.abs(self.values))

    def __neg__(self):
        return self.with_values(-self.values)

    def __add__(self, other):
        if isinstance(other, RadialField):
            self._check_compatible(other)
            return self.with_values(self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, RadialField):
            self._check_compatible(other)
            return self.with_values(self.values - other.values)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, RadialField):
            self._check_compatible(other)
            if not self.is_physical:
                raise ValueError("pointwise products need physical fields")
            return self.with_values(self.values * other.values)
        if np.isscalar(other):
            return self.with_values(self.values * other)
        if isinstance(other, np.ndarray) and other.shape == self.values.shape:
            if not self.is_physical:
                raise ValueError("pointwise products need physical fields")
            return self.with_values(self.values * other)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return (f"RadialField(n={self.grid.n}, r_max={self.grid.r_max}, "
                f"{self.representation.value})")


# -- array-level transforms (used directly by the hot paths) -------------

def dst_forward(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    """Orthonormal DST-I coefficients of w = r*u (last axis)."""
    return sfft.dst(u * grid.r, type=1, norm="ortho", axis=-1)


def dst_inverse(grid: RadialGrid, w_hat: np.ndarray) -> np.ndarray:
    return sfft.dst(w_hat, type=1, norm="ortho", axis=-1) / grid.r


def multiplier(grid: RadialGrid, u: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    return dst_inverse(grid, symbol * dst_forward(grid, u))


def _w_derivative(grid: RadialGrid, w_hat: np.ndarray) -> np.ndarray:
    """d/dr of the sine series with coefficients w_hat, at r_0..r_{n+1}."""
    n = grid.n
    padded = np.zeros(w_hat.shape[:-1] + (n + 2,), dtype=complex)
    padded[..., 1:-1] = w_hat * grid.k
    # DCT-I: y_j = x_0 + (-1)^j x_{n+1} + 2 sum_m x_m cos(pi j m/(n+1))
    y = sfft.dct(padded.real, type=1, axis=-1) + 1j * sfft.dct(padded.imag, type=1, axis=-1)
    return 0.5 * np.sqrt(2.0 / (n + 1)) * y


def _require_physical(f: RadialField):
    if not f.is_physical:
        raise ValueError("operation needs a physical field")


# -- public field-level operations --------------------------------------

def to_spectral(f: RadialField) -> RadialField:
    _require_physical(f)
    return RadialField(f.grid, dst_forward(f.grid, f.values), Representation.SPECTRAL)


def to_physical(f: RadialField) -> RadialField:
    if f.is_physical:
        raise ValueError("field is already physical")
    return RadialField(f.grid, dst_inverse(f.grid, f.values), Representation.PHYSICAL)


def apply_laplacian(f: RadialField) -> RadialField:
    _require_physical(f)
    return f.with_values(multiplier(f.grid, f.values, -f.grid.k**2))


def D_symbol(grid: RadialGrid, s: float, inhomogeneous: bool = False) -> np.ndarray:
    if inhomogeneous:
        return (1.0 + grid.k**2) ** (0.5 * s)
    return grid.k**s


def apply_D_power(f: RadialField, s: float, inhomogeneous: bool = False) -> RadialField:
    """Apply D^s (or <D>^s when ``inhomogeneous``); k_m > 0 so s < 0 is safe."""
    _require_physical(f)
    return f.with_values(multiplier(f.grid, f.values, D_symbol(f.grid, s, inhomogeneous)))


def radial_derivative(f: RadialField) -> RadialField:
    """du/dr = (w' - u)/r with w' from the cosine series."""
    _require_physical(f)
    dw = _w_derivative(f.grid, dst_forward(f.grid, f.values))[..., 1:-1]
    return f.with_values((dw - f.values) / f.grid.r)


def radial_scaling_derivative(f: RadialField) -> RadialField:
    """r * du/dr, computed as w' - u."""
    _require_physical(f)
    dw = _w_derivative(f.grid, dst_forward(f.grid, f.values))[..., 1:-1]
    return f.with_values(dw - f.values)


def value_at_origin(f: RadialField) -> complex:
    """u(0) = w'(0) for a field regular at the origin."""
    _require_physical(f)
    return complex(_w_derivative(f.grid, dst_forward(f.grid, f.values))[0])


def inner(f: RadialField, g: RadialField) -> float:
    """Real part of the L^2(R^3) pairing."""
    _require_physical(f)
    f._check_compatible(g)
    return float(np.sum((np.conj(f.values) * g.values).real * f.grid.weights))


def lp_norm(f: RadialField, p: float) -> float:
    _require_physical(f)
    if p < 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    return float(np.sum(a**p * f.grid.weights) ** (1.0 / p))


def gradient_norm(f: RadialField) -> float:
    """||grad u||_2, exact on the grid: 4*pi*h * sum k_m^2 |w_hat_m|^2."""
    _require_physical(f)
    w_hat = dst_forward(f.grid, f.values)
    return float(np.sqrt(4.0 * np.pi * f.grid.h * np.sum(f.grid.k**2 * np.abs(w_hat) ** 2)))
