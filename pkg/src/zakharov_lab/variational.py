"""Threshold classifier and the variational inequalities behind it."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .functionals import functional_record, grad_sq
from .grid import RadialField, RadialGrid
from .state import State, Trajectory

__all__ = [
    "Verdict",
    "Classification",
    "classify",
    "admissible_lambda",
    "mu_root",
    "b_function",
    "lemma24_margin",
    "Lemma24Margin",
    "lemma24_audit",
    "sign_persistence_audit",
    "SignReport",
    "minimality_probe",
    "rescaled_action",
    "THRESHOLD_RTOL",
]

# products within this relative distance of the threshold count as "at threshold"
THRESHOLD_RTOL = 1e-6


class Verdict(enum.Enum):
    SCATTERING = "scattering"
    GROWUP = "growup"
    ZERO = "zero_solution"
    NOT_BELOW = "not_below_threshold"


@dataclass(frozen=True)
class Classification:
    product: float
    threshold: float
    k0: float
    lambda_star: float | None
    verdict: Verdict
    tol_k: float

    def as_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d


def admissible_lambda(e_z: float, m: float, j_q: float) -> float | None:
    """Vertex j_q/(2m) of m lam^2 - j_q lam + e_z, if that quadratic dips below 0."""
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")
    if j_q**2 > 4.0 * m * e_z:
        return j_q / (2.0 * m)
    return None


def classify(state: State, gs, tol_k: float | None = None) -> Classification:
    rec = functional_record(state)
    if tol_k is None:
        tol_k = 1e-8 * (1.0 + rec.grad_u_l2**2)
    product = rec.e_z * rec.mass
    below = product < gs.threshold * (1.0 - THRESHOLD_RTOL)
    lam = None
    if not below:
        verdict = Verdict.NOT_BELOW
    else:
        if rec.mass > 0:
            lam = admissible_lambda(rec.e_z, rec.mass, gs.j)
        if rec.k > tol_k:
            verdict = Verdict.SCATTERING
        elif rec.k < -tol_k:
            verdict = Verdict.GROWUP
        else:
            verdict = Verdict.ZERO
    return Classification(product, gs.threshold, rec.k, lam, verdict, tol_k)


def mu_root(u: RadialField) -> float:
    """mu with K(S_mu u) = 0 for the L^2 scaling S_mu u = mu^{3/2} u(mu x)."""
    g, v = u.grid, u.values
    q4 = float(np.sum(np.abs(v) ** 4 * g.weights))
    if q4 == 0:
        raise ValueError("mu undefined for the zero field")
    return 4.0 * grad_sq(g, v) / (3.0 * q4)


def b_function(mu):
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0):
        raise ValueError("b is defined for mu >= 0")
    out = 3.0 * np.sqrt(2.0 / (mu + 2.0)) + (mu - 1.0) * np.sqrt((mu + 2.0) / 2.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Lemma24Margin:
    hypothesis_ok: bool
    k: float
    margin: float
    scale: float


def _margin_from_norms(g2, m, q4, lam, nu, j_q):
    e_s = 0.5 * g2 - 0.25 * q4
    k = g2 - 0.75 * q4
    hyp = e_s + lam**2 * m + 0.25 * nu**2 <= lam * j_q
    l4sq = np.sqrt(q4)
    lhs = 4.0 * k + nu**2
    margin = np.where(k >= 0, lhs - np.sqrt(6.0) * nu * l4sq, -2.0 * nu * l4sq - lhs)
    scale = np.abs(4.0 * k) + nu**2 + np.sqrt(6.0) * nu * l4sq
    return hyp, k, margin, scale


def lemma24_margin(u: RadialField, lam: float, nu: float, j_q: float) -> Lemma24Margin:
    """Margin of the K-sign inequalities; nonnegative whenever hypothesis_ok."""
    if not lam > 0 or nu < 0:
        raise ValueError("need lam > 0 and nu >= 0")
    g, v = u.grid, u.values
    g2 = grad_sq(g, v)
    m = 0.5 * float(np.sum(np.abs(v) ** 2 * g.weights))
    q4 = float(np.sum(np.abs(v) ** 4 * g.weights))
    hyp, k, margin, scale = _margin_from_norms(g2, m, q4, lam, nu, j_q)
    return Lemma24Margin(bool(hyp), float(k), float(margin), float(scale))


def _random_profiles(grid: RadialGrid, rng, count: int):
    """Unit-amplitude smooth radial profiles and their (grad^2, mass, quartic) norms."""
    norms = np.empty((count, 3))
    r = grid.r
    for i in range(count):
        sigma = rng.uniform(0.3, 3.0)
        c = rng.uniform(-0.4, 1.5)
        x = r / sigma
        phi = np.exp(-0.5 * x**2) * (1.0 + c * x**2)
        norms[i] = (grad_sq(grid, phi),
                    0.5 * np.sum(phi**2 * grid.weights),
                    np.sum(phi**4 * grid.weights))
    return norms


def lemma24_audit(j_q: float, samples: int = 10_000, seed: int = 0,
                  grid: RadialGrid | None = None, slack: float = 1e-9) -> dict:
    """Random search for violations of the two K-sign inequalities.

    Draws profile shape, amplitude, lam and nu, keeps only triples that
    satisfy the hypothesis, and counts margins below -slack * scale.
    """
    rng = np.random.default_rng(seed)
    grid = RadialGrid(511, 40.0) if grid is None else grid
    shapes = _random_profiles(grid, rng, 200)
    kept = 0
    violations = []
    min_pos = np.inf
    min_neg = np.inf
    counts = {"k_nonneg": 0, "k_neg": 0}
    while kept < samples:
        batch = 4096
        idx = rng.integers(0, len(shapes), batch)
        g2, m, q4 = shapes[idx].T
        lam = np.exp(rng.uniform(np.log(0.25), np.log(4.0), batch))
        amp = rng.uniform(0.0, 2.5, batch) * lam
        g2, m, q4 = g2 * amp**2, m * amp**2, q4 * amp**4
        e_s = 0.5 * g2 - 0.25 * q4
        room = lam * j_q - e_s - lam**2 * m
        ok = room > 0
        nu = rng.uniform(0.0, 1.0, batch) * 2.0 * np.sqrt(np.maximum(room, 0.0))
        hyp, k, margin, scale = _margin_from_norms(g2, m, q4, lam, nu, j_q)
        sel = np.nonzero(ok & hyp)[0][: samples - kept]
        kept += sel.size
        for i in sel:
            if k[i] >= 0:
                counts["k_nonneg"] += 1
                min_pos = min(min_pos, margin[i] / max(scale[i], 1e-300))
            else:
                counts["k_neg"] += 1
                min_neg = min(min_neg, margin[i] / max(scale[i], 1e-300))
            if margin[i] < -slack * scale[i]:
                violations.append({"lam": float(lam[i]), "nu": float(nu[i]),
                                   "k": float(k[i]), "margin": float(margin[i])})
    return {
        "samples": kept,
        "violations": violations,
        "counts": counts,
        "min_relative_margin_k_nonneg": float(min_pos),
        "min_relative_margin_k_neg": float(min_neg),
        "seed": seed,
    }


@dataclass(frozen=True)
class SignReport:
    k_min: float
    k_max: float
    initial_sign: int
    sign_changed: bool
    tol: float

    def as_dict(self) -> dict:
        return asdict(self)


def sign_persistence_audit(traj: Trajectory, gs=None, tol: float | None = None) -> SignReport:
    k = traj.column("k")
    if tol is None:
        g2 = traj.column("grad_u_l2")[0] ** 2
        tol = 1e-8 * (1.0 + g2)
    s0 = int(np.sign(k[0])) if abs(k[0]) > tol else 0
    if s0 > 0:
        changed = bool(np.any(k < -tol))
    elif s0 < 0:
        changed = bool(np.any(k > tol))
    else:
        changed = bool(np.any(np.abs(k) > tol))
    return SignReport(float(k.min()), float(k.max()), s0, changed, float(tol))


def rescaled_action(grad2: float, l2sq: float, quartic: float) -> float:
    """J(S_mu phi) at the mu making K vanish, from the norms of phi."""
    mu = 4.0 * grad2 / (3.0 * quartic)
    return 0.5 * mu**2 * grad2 + 0.5 * l2sq - 0.25 * mu**3 * quartic


def minimality_probe(gs, count: int = 100, seed: int = 0, amplitude: float = 0.3) -> np.ndarray:
    """Actions of random perturbations of Q pushed onto {K = 0}, divided by J(Q)."""
    rng = np.random.default_rng(seed)
    grid = gs.profile.grid
    q = gs.profile.values.real
    r = grid.r
    out = np.empty(count)
    for i in range(count):
        sigma = rng.uniform(0.5, 4.0)
        pert = rng.normal() * np.exp(-0.5 * (r / sigma) ** 2) * (1 + rng.normal() * r / sigma)
        phi = q + amplitude * np.max(q) * pert * rng.uniform(0.05, 1.0)
        if rng.uniform() < 0.3:
            phi = phi * np.exp(1j * rng.uniform(0, 1) * r)
        g2 = grad_sq(grid, phi)
        l2 = float(np.sum(np.abs(phi) ** 2 * grid.weights))
        q4 = float(np.sum(np.abs(phi) ** 4 * grid.weights))
        out[i] = rescaled_action(g2, l2, q4) / gs.j
    return out
