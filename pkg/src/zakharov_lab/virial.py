"""Global and localized virial functionals of the radial Zakharov flow.

Orientation: with the real pairing <f|g> = Re int conj(f) g,

    V   = <u | i r u_r> + (1/2 alpha) <N | i r d_r D^{-1} N>
    dV/dt = 2K(u) + ||nu||^2 / 2 - <nu | |u|^2>,     nu = N - |u|^2.

The localized functional uses the symmetrized generator (A psi + psi A) and
therefore tends to 2V, not V, once the cutoff covers the state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functionals import functional_record
from .grid import RadialField, RadialGrid, _w_derivative, dst_forward, dst_inverse
from .state import State, Trajectory

__all__ = [
    "CutoffProfile",
    "smooth_step",
    "virial_value",
    "virial_rhs",
    "merle_virial_value",
    "merle_virial_rhs",
    "merle_virial_rhs_middle",
    "virial_difference_term",
    "localized_virial",
    "rho_r",
    "radial_sobolev_ratio",
    "tail_mass",
    "TailMass",
    "virial_monitor",
    "finite_difference_check",
    "monotonicity_audit",
    "MonotonicityReport",
    "SHARP_RADIAL_SOBOLEV",
]

# sup_r r|u(r)| <= (2 pi)^{-1/2} ||u||_2^{1/2} ||grad u||_2^{1/2} for radial u in R^3
SHARP_RADIAL_SOBOLEV = 1.0 / np.sqrt(2.0 * np.pi)


def _bump_half(x):
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    # 1/x overflows for subnormal x; exp(-inf) = 0 is the right limit
    with np.errstate(over="ignore"):
        out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a, b = _bump_half(x), _bump_half(1.0 - x)
    return a / (a + b)


def _smooth_step_prime(x):
    x = np.asarray(x, dtype=float)
    a, b = _bump_half(x), _bump_half(1.0 - x)
    inside = (x > 0) & (x < 1)
    out = np.zeros_like(x)
    xi = x[inside]
    da = a[inside] / xi**2
    db = -b[inside] / (1.0 - xi) ** 2
    s = a[inside] + b[inside]
    out[inside] = (da * s - a[inside] * (da + db)) / s**2
    return out


@dataclass(frozen=True)
class CutoffProfile:
    """psi_R(r) = s(2 - r/R): equal to 1 on r <= R, 0 on r >= 2R."""

    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"cutoff radius must be positive, got {self.R}")

    def __call__(self, r) -> np.ndarray:
        return smooth_step(2.0 - np.asarray(r, dtype=float) / self.R)

    def r_dpsi(self, r) -> np.ndarray:
        """r * d psi_R / dr."""
        r = np.asarray(r, dtype=float)
        return -(r / self.R) * _smooth_step_prime(2.0 - r / self.R)


# -- array helpers ---------------------------------------------------------

def _r_dr(grid: RadialGrid, f: np.ndarray) -> np.ndarray:
    return _w_derivative(grid, dst_forward(grid, f))[..., 1:-1] - f


def _d_power(grid, f, s):
    return dst_inverse(grid, grid.k**s * dst_forward(grid, f))


def _pair(grid: RadialGrid, f, g) -> float:
    return float(np.sum((np.conj(f) * g).real * grid.weights))


def _sq(grid, f) -> float:
    return float(np.sum(np.abs(f) ** 2 * grid.weights))


def _unpack(state: State):
    return state.grid, state.u.values, state.n_field.values, state.alpha


# -- global identities -----------------------------------------------------

def virial_value(state: State) -> float:
    g, u, n, a = _unpack(state)
    y = _d_power(g, n, -1.0)
    return _pair(g, u, 1j * _r_dr(g, u)) + _pair(g, n, 1j * _r_dr(g, y)) / (2.0 * a)


def virial_rhs(state: State) -> float:
    g, u, n, _ = _unpack(state)
    rec = functional_record(state)
    nu = n - np.abs(u) ** 2
    return 2.0 * rec.k + 0.5 * rec.nu_l2**2 - _pair(g, nu, np.abs(u) ** 2)


def merle_virial_value(state: State) -> float:
    g, u, n, a = _unpack(state)
    y_im = _d_power(g, n.imag, -1.0)
    return _pair(g, u, 1j * _r_dr(g, u)) - _pair(g, n.real, _r_dr(g, y_im)) / a


def merle_virial_rhs(state: State) -> float:
    rec = functional_record(state)
    return 6.0 * rec.e_z - rec.grad_u_l2**2 - 2.0 * rec.im_n_l2**2


def merle_virial_rhs_middle(state: State) -> float:
    """Equivalent form 2K + (3/2)||nu||^2 - 2||Im N||^2."""
    rec = functional_record(state)
    return 2.0 * rec.k + 1.5 * rec.nu_l2**2 - 2.0 * rec.im_n_l2**2


def virial_difference_term(state: State) -> float:
    """(d-1)/(2 alpha) <Re N | D^{-1} Im N> with d = 3.

    The two virial values satisfy V - V_merle = -virial_difference_term.
    """
    g, _, n, a = _unpack(state)
    return _pair(g, n.real, _d_power(g, n.imag, -1.0)) / a


# -- localized functionals ------------------------------------------------

def _check_cutoff(grid: RadialGrid, cutoff: CutoffProfile):
    if 2.0 * cutoff.R >= grid.r_max:
        raise ValueError(f"cutoff support 2R={2 * cutoff.R} exceeds r_max={grid.r_max}")


def localized_virial(state: State, cutoff: CutoffProfile) -> float:
    """Re<-iu|(A0 psi + psi A0)u> + Re<(-i/2alpha) D^{-1}N|(A1 psi + psi A1)N>."""
    g, u, n, a = _unpack(state)
    _check_cutoff(g, cutoff)
    psi = cutoff(g.r)
    rpsi = cutoff.r_dpsi(g.r)
    y = _d_power(g, n, -1.0)
    u_part = 2.0 * _pair(g, u, 1j * psi * _r_dr(g, u))
    n_gen = rpsi * n + 2.0 * psi * _r_dr(g, n) + 4.0 * psi * n
    n_part = _pair(g, y, 1j * n_gen) / (2.0 * a)
    return u_part + n_part


def rho_r(state: State, cutoff: CutoffProfile) -> float:
    g, u, n, _ = _unpack(state)
    _check_cutoff(g, cutoff)
    y = _d_power(g, n.real - np.abs(u) ** 2, -1.0)
    band = (g.r >= cutoff.R) & (g.r <= 2.0 * cutoff.R)
    return float(np.sum(np.abs(y[band]) ** 2 * g.weights[band])) / cutoff.R**2


def radial_sobolev_ratio(u: RadialField) -> float:
    if not u.is_physical:
        raise ValueError("needs a physical field")
    g, v = u.grid, u.values
    l2 = np.sqrt(_sq(g, v))
    if l2 == 0:
        raise ValueError("ratio undefined for the zero field")
    w_hat = dst_forward(g, v)
    grad = np.sqrt(4.0 * np.pi * g.h * np.sum(g.k**2 * np.abs(w_hat) ** 2))
    return float(np.max(np.abs(g.r * v)) / np.sqrt(l2 * grad))


@dataclass(frozen=True)
class TailMass:
    grad_u: float
    u2: float
    u4: float
    u6: float
    nu2: float
    grad_y: float
    y_over_r: float

    @property
    def total(self) -> float:
        return (self.grad_u + self.u2 + self.u4 + self.u6 + self.nu2
                + self.grad_y + self.y_over_r)


def tail_mass(state: State, R: float) -> TailMass:
    """Seven exterior integrals over r >= R with nu = Re N - |u|^2, y = D^{-1} nu."""
    g, u, n, _ = _unpack(state)
    if not R < g.r_max:
        raise ValueError(f"R={R} lies outside the grid")
    nu = n.real - np.abs(u) ** 2
    y = _d_power(g, nu, -1.0)
    du = _r_dr(g, u) / g.r
    dy = _r_dr(g, y) / g.r
    mask = g.r >= R
    wt = g.weights[mask]

    def tail(dens):
        return float(np.sum(dens[mask] * wt))

    au = np.abs(u)
    return TailMass(
        grad_u=tail(np.abs(du) ** 2),
        u2=tail(au**2),
        u4=tail(au**4),
        u6=tail(au**6),
        nu2=tail(nu**2),
        grad_y=tail(np.abs(dy) ** 2),
        y_over_r=tail(np.abs(y) ** 2 / g.r**2),
    )


# -- trajectory tools -------------------------------------------------------

def virial_monitor(radii=()):
    """Monitor recording V, its right-hand side, Merle's pair and V_R, rho_R."""
    cutoffs = [CutoffProfile(float(R)) for R in radii]

    def monitor(state: State) -> dict:
        out = {
            "virial": virial_value(state),
            "virial_rhs": virial_rhs(state),
            "merle": merle_virial_value(state),
            "merle_rhs": merle_virial_rhs(state),
            "virial_diff": virial_difference_term(state),
        }
        for c in cutoffs:
            if 2.0 * c.R < state.grid.r_max:
                out[f"v_r_{c.R:g}"] = localized_virial(state, c)
                out[f"rho_{c.R:g}"] = rho_r(state, c)
        return out

    return monitor


def finite_difference_check(traj: Trajectory, value: str, rhs: str):
    """Centered difference of ``value`` against ``rhs`` at interior samples.

    Returns ``(times, slopes, rhs, excess)`` where excess > 0 marks a failure
    of |slope - rhs| <= 1e-3 (1 + |rhs|).
    """
    t = traj.times
    v = traj.column(value)
    r = traj.column(rhs)
    slopes = (v[2:] - v[:-2]) / (t[2:] - t[:-2])
    rr = r[1:-1]
    excess = np.abs(slopes - rr) - 1e-3 * (1.0 + np.abs(rr))
    return t[1:-1], slopes, rr, excess


@dataclass
class MonotonicityReport:
    verdict: str
    kappa_est: float | None
    lower_bound: float | None
    slopes: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "kappa_est": self.kappa_est,
            "lower_bound": self.lower_bound,
            "slopes": {k: [float(x) for x in v] for k, v in self.slopes.items()},
            "violations": self.violations,
            "ok": self.ok,
        }


def monotonicity_audit(traj: Trajectory, cutoffs, gs, lam: float | None = None,
                       verdict: str | None = None, trailing: float = 0.5,
                       min_radius: float = 16.0) -> MonotonicityReport:
    """Slope audit of V_R along ``traj``.

    Grow-up: slopes on the trailing fraction of samples must stay below
    -kappa_est/2 with kappa_est = 2 (lam J(Q) - E_Z - lam^2 M).
    Scattering: slopes for R >= ``min_radius`` must stay above
    (1 - 2/sqrt 6) min_t K / 2.
    """
    from .variational import admissible_lambda, classify

    s0 = traj.states[0]
    if verdict is None:
        verdict = classify(s0, gs).verdict.value
    rec0 = traj.records[0]
    if lam is None:
        lam = admissible_lambda(rec0.e_z, rec0.mass, gs.j)
    t = traj.times
    report = MonotonicityReport(verdict=verdict, kappa_est=None, lower_bound=None)
    if lam is not None:
        report.kappa_est = 2.0 * (lam * gs.j - (rec0.e_z + lam**2 * rec0.mass))
    k_min = float(np.min(traj.column("k")))
    report.lower_bound = (1.0 - 2.0 / np.sqrt(6.0)) * k_min / 2.0
    for c in cutoffs:
        R = c.R if isinstance(c, CutoffProfile) else float(c)
        key = f"v_r_{R:g}"
        if key not in traj.monitors:
            v = np.array([localized_virial(s, CutoffProfile(R)) for s in traj.states])
        else:
            v = traj.column(key)
        slopes = np.gradient(v, t)
        report.slopes[key] = slopes
        if verdict == "growup" and report.kappa_est is not None:
            start = int(len(t) * (1.0 - trailing))
            bad = np.nonzero(slopes[start:] > -report.kappa_est / 2.0)[0] + start
            report.violations += [{"R": R, "t": float(t[i]), "slope": float(slopes[i])}
                                  for i in bad]
        elif verdict == "scattering" and R >= min_radius:
            bad = np.nonzero(slopes < report.lower_bound)[0]
            report.violations += [{"R": R, "t": float(t[i]), "slope": float(slopes[i])}
                                  for i in bad]
    return report
