"""Scenario orchestration: build, classify, evolve, audit, persist."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ScenarioConfig, serialize_config
from .diagnostics import growup_indicator, h1_l2_norm, scattering_indicator, z_norm
from .evolution import conservation_report, evolve
from .functionals import FunctionalRecord
from .grid import make_grid
from .ground_state import scale_ground_state, solve_ground_state, standing_wave_state
from .state import State
from .variational import classify, sign_persistence_audit
from .virial import finite_difference_check, monotonicity_audit, tail_mass, virial_monitor

log = logging.getLogger(__name__)

__all__ = ["RunArtifacts", "build_initial_state", "run_scenario", "sweep",
           "SCHEMA_PATH", "MASS_DRIFT_TOL", "ENERGY_DRIFT_TOL", "NORMAL_FORM_TOL"]

SCHEMA_PATH = os.path.join(os.path.dirname(__file__), "schemas", "summary.schema.json")
GROUND_STATE_CACHE = "ground_state.cache"
MASS_DRIFT_TOL = 1e-10
ENERGY_DRIFT_TOL = 1e-3
NORMAL_FORM_TOL = 1e-4


@dataclass
class RunArtifacts:
    directory: str
    summary: dict
    trajectory: object = field(repr=False, default=None)

    @property
    def ok(self) -> bool:
        return self.summary["ok"]

    @property
    def paths(self) -> dict:
        names = ["trajectory.csv", "summary.json"]
        names += [f"audit_{k}.json" for k in self.summary["audits"]]
        return {n: os.path.join(self.directory, n) for n in names}


def _ground_state(cfg: ScenarioConfig, grid):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return solve_ground_state(grid, cache_path=os.path.join(cfg.output_dir, GROUND_STATE_CACHE))


def _read_profile_file(path: str, grid):
    """CSV with header r,re_u,im_u,re_n,im_n; linearly resampled onto ``grid``."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    needed = ("r", "re_u", "im_u", "re_n", "im_n")
    missing = [c for c in needed if c not in (data.dtype.names or ())]
    if missing:
        raise ValueError(f"initial.path: missing columns {missing}")
    r = data["r"]
    if np.any(np.diff(r) <= 0):
        raise ValueError("initial.path: r must be strictly increasing")

    def resample(col):
        return np.interp(grid.r, r, data[col], right=0.0)

    u = resample("re_u") + 1j * resample("im_u")
    n = resample("re_n") + 1j * resample("im_n")
    return u, n


def build_initial_state(cfg: ScenarioConfig, grid, gs) -> State:
    r = grid.r
    kind = cfg.initial_kind
    if kind == "standing_wave":
        return standing_wave_state(gs, cfg.initial_lambda, cfg.initial_theta, cfg.alpha, grid)
    if kind == "file":
        u, n = _read_profile_file(cfg.initial_path, grid)
        return State.from_arrays(grid, u, n, cfg.alpha)
    if kind == "ground_state_scaled":
        u = cfg.initial_a * scale_ground_state(gs, cfg.initial_lambda, grid).values.real
    else:
        u = cfg.initial_a * np.exp(-0.5 * (r / cfg.initial_sigma) ** 2)
    u = u * np.exp(1j * cfg.initial_theta)
    if cfg.initial_n_kind == "matched":
        n = np.abs(u) ** 2
    elif cfg.initial_n_kind == "zero":
        n = np.zeros_like(r)
    else:
        n = cfg.initial_n_amplitude * np.exp(-0.5 * (r / cfg.initial_sigma) ** 2)
    return State.from_arrays(grid, u, n.astype(complex), cfg.alpha)


def _monitors(cfg: ScenarioConfig):
    mons = [virial_monitor(cfg.monitors_virial)]
    if cfg.monitors_tails:
        def tails(state):
            return {f"tail_{R:g}": tail_mass(state, R).total for R in cfg.monitors_tails}
        mons.append(tails)
    if cfg.monitors_norms:
        mons.append(lambda state: {"h1_l2": h1_l2_norm(state)})
    return mons


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_trajectory(path, traj):
    rec_cols = list(FunctionalRecord.__dataclass_fields__)
    mon_cols = list(traj.monitors)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + rec_cols + mon_cols)
        for i, (s, rec) in enumerate(traj.samples):
            row = [s.time] + [getattr(rec, c) for c in rec_cols]
            row += [traj.monitors[c][i] for c in mon_cols]
            w.writerow([repr(float(x)) for x in row])


def _run_audits(cfg, traj, gs, verdict: str) -> dict:
    out = {}
    for name in cfg.audits:
        try:
            out[name] = _AUDITS[name](cfg, traj, gs, verdict)
        except Exception as exc:  # recorded, the run still writes its artifacts
            log.warning("audit %s failed to evaluate: %s", name, exc)
            out[name] = {"ok": False, "error": f"{type(exc).__name__}: {exc}"}
    return out


def _audit_conservation(cfg, traj, gs, verdict):
    rep = conservation_report(traj)
    ok = rep.mass_drift <= MASS_DRIFT_TOL and rep.energy_drift <= ENERGY_DRIFT_TOL
    return {"ok": ok, "mass_drift": rep.mass_drift, "energy_drift": rep.energy_drift,
            "mass_tol": MASS_DRIFT_TOL, "energy_tol": ENERGY_DRIFT_TOL}


def _audit_virial(cfg, traj, gs, verdict):
    if len(traj) < 3:
        raise ValueError("virial audit needs at least three samples")
    t, slopes, rhs, excess = finite_difference_check(traj, "virial", "virial_rhs")
    _, m_slopes, m_rhs, m_excess = finite_difference_check(traj, "merle", "merle_rhs")
    diff = traj.column("virial") - traj.column("merle") + traj.column("virial_diff")
    scale = 1.0 + np.max(np.abs(traj.column("virial")))
    diff_err = float(np.max(np.abs(diff)) / scale)
    ok = bool(np.all(excess <= 0) and np.all(m_excess <= 0) and diff_err <= 1e-6)
    return {"ok": ok, "max_excess": float(excess.max()), "max_excess_merle": float(m_excess.max()),
            "difference_error": diff_err, "times": t, "slopes": slopes, "rhs": rhs}


def _audit_sign(cfg, traj, gs, verdict):
    # persistence is only claimed strictly below the threshold
    rep = sign_persistence_audit(traj)
    applicable = verdict in ("scattering", "growup")
    return {"ok": not (applicable and rep.sign_changed), "applicable": applicable,
            **rep.as_dict()}


def _audit_monotonicity(cfg, traj, gs, verdict):
    rep = monotonicity_audit(traj, cfg.monitors_virial, gs, verdict=verdict,
                             trailing=cfg.trailing_window)
    return rep.as_dict()


def _audit_scattering(cfg, traj, gs, verdict):
    ind = scattering_indicator(traj)
    return {"ok": ind.consistent, **ind.as_dict()}


def _audit_growup(cfg, traj, gs, verdict):
    ind = growup_indicator(traj)
    return {"ok": ind.consistent, **ind.as_dict()}


def _audit_normal_form(cfg, traj, gs, verdict):
    from .normal_form import default_beta, normal_form_residual

    beta = cfg.monitors_normal_form_beta
    if beta is None:
        beta = default_beta(cfg.alpha)
    rep = normal_form_residual(traj, beta)
    tol = NORMAL_FORM_TOL * (1.0 + h1_l2_norm(traj.states[0]))
    return {"ok": rep.residual <= tol, "beta": beta, "residual": rep.residual, "tol": tol,
            "boundary_norm": rep.boundary_norm, "cubic_norm": rep.cubic_norm}


_AUDITS = {
    "conservation": _audit_conservation,
    "virial": _audit_virial,
    "sign": _audit_sign,
    "monotonicity": _audit_monotonicity,
    "scattering": _audit_scattering,
    "growup": _audit_growup,
    "normal_form": _audit_normal_form,
}


def _virial_slopes(traj, radii) -> dict:
    t = traj.times
    out = {}
    for R in radii:
        key = f"v_r_{R:g}"
        if key in traj.monitors and len(t) > 1:
            s = np.gradient(traj.column(key), t)
            out[key] = {"min": float(s.min()), "max": float(s.max())}
    return out


def run_scenario(cfg: ScenarioConfig, directory: str | None = None,
                 keep_trajectory: bool = False) -> RunArtifacts:
    """Run one scenario and write trajectory.csv, summary.json, audit_*.json."""
    directory = cfg.output_dir if directory is None else directory
    os.makedirs(directory, exist_ok=True)
    grid = make_grid(cfg.grid_n, cfg.grid_r_max)
    gs = _ground_state(cfg, grid)
    state = build_initial_state(cfg, grid, gs)
    cls = classify(state, gs)
    traj = evolve(state, cfg.t_final, cfg.dt, cfg.sample_every, monitors=_monitors(cfg))
    cons = conservation_report(traj)
    audits = _run_audits(cfg, traj, gs, cls.verdict.value)
    norms = None
    if cfg.monitors_norms:
        z = z_norm(traj)
        norms = {"x": z["x"], "y": z["y"]}
    summary = {
        "version": __version__,
        "config": serialize_config(cfg),
        "classification": cls.as_dict(),
        "conservation_report": {"mass_drift": cons.mass_drift, "energy_drift": cons.energy_drift},
        "indicators": {
            "blowup_suspected": traj.blowup_suspected,
            "failure_time": traj.failure_time,
            "final_time": float(traj.times[-1]),
            "samples": len(traj),
        },
        "virial": _virial_slopes(traj, cfg.monitors_virial),
        "norms": norms,
        "audits": {k: v["ok"] for k, v in audits.items()},
        "warnings": list(traj.warnings),
        "ok": all(v["ok"] for v in audits.values()),
    }
    _write_trajectory(os.path.join(directory, "trajectory.csv"), traj)
    _write_json(os.path.join(directory, "summary.json"), summary)
    for name, body in audits.items():
        _write_json(os.path.join(directory, f"audit_{name}.json"), body)
    return RunArtifacts(directory, _clean(summary), traj if keep_trajectory else None)


def _sweep_one(args):
    cfg, key, value, directory = args
    row = {"param": key, "value": value}
    try:
        run_cfg = cfg.with_value(key, value)
        art = run_scenario(run_cfg, directory)
        s = art.summary
        row.update(verdict=s["classification"]["verdict"], k0=s["classification"]["k0"],
                   product=s["classification"]["product"], ok=s["ok"], virial=s["virial"],
                   error=None)
    except Exception as exc:  # isolated into this row
        row.update(verdict=None, k0=None, product=None, ok=False, virial={},
                   error=f"{type(exc).__name__}: {exc}")
    return row


def sweep(cfg: ScenarioConfig, key: str, values, workers: int = 1) -> list:
    """One run per value of ``key``, in parallel; rows come back in input order."""
    values = list(values)
    if not values:
        return []
    cfg.with_value(key, values[0])  # fail fast on an unknown or invalid key
    # solve once up front so workers share the cache instead of racing on it
    _ground_state(cfg, make_grid(cfg.grid_n, cfg.grid_r_max))
    jobs = [(cfg, key, v, os.path.join(cfg.output_dir, f"{key}={v}")) for v in values]
    if workers <= 1:
        rows = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    _write_json(os.path.join(cfg.output_dir, "sweep.json"), rows)
    return rows
