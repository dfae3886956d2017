"""Figure presets: sweeps that write deterministic CSV tables.

Every table starts with ``#``-prefixed provenance lines (config hash, master
seed, trajectory count, step size, code version) followed by a header row.
Rows come out in grid order and floats are written with ``repr`` so that
reruns are byte-identical whatever the thread count.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analytic
from .config import RunConfig
from .model import SeedPulse, SqueezeWindow, derive_dimensionless, tau_for_r
from .sequence import (Preparation, TWASettings, prepare_ensemble, rotation_uncertainty,
                       run_schedule, xi_vs_interrogation)
from .twa.engine import StepControl, default_workers
from .twa.moments import estimate_moments

EXPERIMENTS = ("fig4_xi_curve", "fig5_seed_sweep", "fig6_xi_dynamics",
               "fig7_rotation_sensitivity", "custom")
FIG5_REFERENCE_ATOMS = 1.0e5


@dataclass
class SweepSpec:
    experiment_name: str
    config: RunConfig = field(default_factory=RunConfig)
    workers: int = 1
    output_path: Path | None = None

    def __post_init__(self):
        if self.experiment_name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment_name!r}; choose from {EXPERIMENTS}")

    def settings(self, single_mode: bool = False) -> TWASettings:
        c = self.config
        return TWASettings(n_traj=c.n_traj, master_seed=c.master_seed, n_modes=c.n_modes,
                           single_mode=single_mode,
                           step=StepControl(dtau=c.dtau, workers=self.workers),
                           delta_phase=c.delta_phase, batches=c.batches)


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[dict]
    provenance: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, val in self.provenance.items():
            buf.write(f"# {key}: {val}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(row[c]) for c in self.columns])
        return buf.getvalue()

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def provenance(spec: SweepSpec, stochastic: bool = True) -> dict:
    c = spec.config
    out = {"experiment": spec.experiment_name, "config_hash": c.digest(),
           "master_seed": c.master_seed, "n_traj": c.n_traj if stochastic else 0,
           "dtau": repr(c.dtau), "version": __version__}
    return out


# --- fig4 -----------------------------------------------------------------

def run_fig4(spec: SweepSpec) -> Table:
    """xi(r) at N_seed = 10 plus the xi(r, N_seed) contour grid (analytic)."""
    c = spec.config
    r_grid = np.linspace(0.0, c.fig4_r_max, c.fig4_r_points)
    rows = []
    for kind, seeds in (("curve", (10.0,)), ("contour", c.fig4_seeds)):
        for n_seed in seeds:
            for r in r_grid:
                state = analytic.TwoModeState(float(r), c.seed_phase, float(n_seed))
                rows.append({"kind": kind, "n_seed": float(n_seed), "r": float(r),
                             "xi": analytic.wineland_xi(state),
                             "min_seed": analytic.min_seed_for_squeezing(r) if r > 0 else 0.0})
    return Table(("kind", "n_seed", "r", "xi", "min_seed"), rows, provenance(spec, stochastic=False))


# --- fig5 -----------------------------------------------------------------

FIG5_COLUMNS = ("model", "n_seed", "r", "t_prep_s", "delta_phi", "delta_phi_stderr", "xi",
                "n_plus", "n_zero", "n_minus", "N_t", "sql", "hl")


def _pick_optimum(points: list[dict]) -> dict:
    """Smallest delta_phi; among points equal to it within stderr, the shortest preparation."""
    finite = [p for p in points if math.isfinite(p["delta_phi"])]
    best = min(finite, key=lambda p: p["delta_phi"])
    for p in sorted(finite, key=lambda p: p["t_prep_s"]):
        tol = math.hypot(p["delta_phi_stderr"], best["delta_phi_stderr"])
        if p["delta_phi"] - best["delta_phi"] <= tol:
            return p
    return best


def scan_preparation(spec: SweepSpec, n_seed: float, r_values, *, single_mode: bool) -> list[dict]:
    """Moments along one squeezing run, sampled at the requested r values."""
    c = spec.config
    phys = c.physical()
    params = derive_dimensionless(phys)
    n0 = phys.atom_number_initial
    settings = spec.settings(single_mode)
    ens = run_schedule(phys, [SeedPulse(n_seed, c.seed_phase)], settings)
    out = []
    for r in r_values:
        tau = tau_for_r(params, n0, float(r))
        ens = run_schedule(phys, [SqueezeWindow(tau - ens.tau)], settings, ens)
        m = estimate_moments(ens, phys.winding_number, batches=settings.batches)
        if m.j_perp > 0 and m.n_total > 0:
            dphi = math.sqrt(m.var_jz) / m.j_perp
            dphi_se = m.stderr.get("xi", math.nan) / math.sqrt(m.n_total)
        else:
            dphi, dphi_se = math.inf, math.nan
        out.append({"model": "smtwa" if single_mode else "mmtwa", "n_seed": float(n_seed),
                    "r": float(r), "t_prep_s": params.to_seconds(tau), "delta_phi": dphi,
                    "delta_phi_stderr": dphi_se, "xi": m.xi, "n_plus": m.populations[0],
                    "n_zero": m.populations[1], "n_minus": m.populations[2], "N_t": m.n_total})
    return out


def _analytic_scan(spec: SweepSpec, n_seed: float, r_values) -> list[dict]:
    c = spec.config
    params = derive_dimensionless(c.physical())
    n0 = c.atom_number_initial
    out = []
    for r in r_values:
        state = analytic.TwoModeState(float(r), c.seed_phase, float(n_seed), n0)
        n_each = analytic.mode_population(state)
        if 2 * n_each > n0:
            break  # the undepleted model cannot spend more atoms than the pump holds
        xi = analytic.wineland_xi(state)
        out.append({"model": "analytic", "n_seed": float(n_seed), "r": float(r),
                    "t_prep_s": params.to_seconds(tau_for_r(params, n0, float(r))),
                    "delta_phi": xi / math.sqrt(2 * n_each), "delta_phi_stderr": 0.0, "xi": xi,
                    "n_plus": n_each, "n_zero": n0 - 2 * n_each, "n_minus": n_each,
                    "N_t": 2 * n_each})
    return out


def fig5_r_grid(spec: SweepSpec, n_seed: float) -> np.ndarray:
    c = spec.config
    r_max = c.fig5_r_max_factor * analytic.optimal_r(FIG5_REFERENCE_ATOMS, n_seed)
    return np.linspace(0.0, r_max, c.fig5_r_points)


def run_fig5(spec: SweepSpec, *, include_scans: bool = False) -> Table:
    """Per seed, the preparation time minimizing delta_phi = xi / sqrt(N_t)."""
    sql = 1 / math.sqrt(FIG5_REFERENCE_ATOMS)
    hl = 1 / FIG5_REFERENCE_ATOMS
    rows = []
    for n_seed in spec.config.fig5_seeds:
        grid = fig5_r_grid(spec, n_seed)
        for scan in (_analytic_scan(spec, n_seed, grid),
                     scan_preparation(spec, n_seed, grid, single_mode=True),
                     scan_preparation(spec, n_seed, grid, single_mode=False)):
            picked = scan if include_scans else [_pick_optimum(scan)]
            for p in picked:
                rows.append({**p, "sql": sql, "hl": hl})
    return Table(FIG5_COLUMNS, rows, provenance(spec))


def optimal_seed(table: Table, model: str) -> float:
    """Seed with the smallest optimal delta_phi for one model."""
    rows = [r for r in table.rows if r["model"] == model]
    return min(rows, key=lambda r: r["delta_phi"])["n_seed"]


# --- fig6 / fig7 ------------------------------------------------------------

def _presets(spec: SweepSpec):
    c = spec.config
    params = derive_dimensionless(c.physical())
    for t_ms, n_seed in zip(c.fig6_t_prep_ms, c.fig6_seeds):
        yield t_ms, n_seed, Preparation(n_seed, params.to_tau(t_ms * 1e-3), c.seed_phase)


FIG6_COLUMNS = ("t_prep_ms", "n_seed", "T_dimensionless", "T_seconds", "xi", "xi_stderr", "N_t")


def run_fig6(spec: SweepSpec) -> Table:
    """xi(T) with interactions off during interrogation, one curve per preset."""
    c = spec.config
    phys = c.physical()
    grid = np.linspace(0.0, c.t_max, c.t_points)
    rows = []
    for t_ms, n_seed, prep in _presets(spec):
        for r in xi_vs_interrogation(phys, prep, grid, settings=spec.settings()):
            rows.append({"t_prep_ms": float(t_ms), "n_seed": float(n_seed), **r})
    return Table(FIG6_COLUMNS, rows, provenance(spec))


FIG7_COLUMNS = ("t_prep_ms", "n_seed", "interaction_scale", "T_dimensionless", "T_seconds",
                "delta_phi", "delta_omega", "delta_omega_stderr", "delta_omega_sql", "N_t")


def run_fig7(spec: SweepSpec) -> Table:
    """Rotation uncertainty against interrogation time for each interaction ratio."""
    c = spec.config
    phys = c.physical()
    winding = phys.winding_number
    grid = np.linspace(0.0, c.t_max, c.fig7_t_points)[1:]
    settings = spec.settings()
    rows = []
    for t_ms, n_seed, prep in _presets(spec):
        split = prepare_ensemble(phys, prep, settings)
        for scale in c.fig7_interaction_scales:
            for r in xi_vs_interrogation(phys, prep, grid, settings=settings,
                                         interaction_scale=scale, ensemble=split):
                n_t = r["N_t"]
                dphi = r["xi"] / math.sqrt(n_t)
                rows.append({
                    "t_prep_ms": float(t_ms), "n_seed": float(n_seed),
                    "interaction_scale": float(scale),
                    "T_dimensionless": r["T_dimensionless"], "T_seconds": r["T_seconds"],
                    "delta_phi": dphi,
                    "delta_omega": rotation_uncertainty(dphi, winding, r["T_seconds"]),
                    "delta_omega_stderr": rotation_uncertainty(r["xi_stderr"] / math.sqrt(n_t),
                                                               winding, r["T_seconds"]),
                    "delta_omega_sql": rotation_uncertainty(1 / math.sqrt(n_t), winding, r["T_seconds"]),
                    "N_t": n_t,
                })
    return Table(FIG7_COLUMNS, rows, provenance(spec))


# --- custom -------------------------------------------------------------------

def run_custom(spec: SweepSpec) -> Table:
    """xi(T) for one preparation taken from the config keys."""
    c = spec.config
    phys = c.physical()
    params = derive_dimensionless(phys)
    prep = Preparation(c.n_seed, params.to_tau(c.t_prep_ms * 1e-3), c.seed_phase)
    grid = np.linspace(0.0, c.t_max, c.t_points)
    settings = spec.settings(single_mode=c.single_mode)
    rows = xi_vs_interrogation(phys, prep, grid, backend=c.backend, settings=settings,
                               interaction_scale=c.interaction_scale, rotation_rate=c.rotation_rate)
    cols = ("T_dimensionless", "T_seconds", "xi", "xi_stderr", "N_t")
    return Table(cols, rows, provenance(spec, stochastic=c.backend == "twa"))


RUNNERS = {
    "fig4_xi_curve": run_fig4,
    "fig5_seed_sweep": run_fig5,
    "fig6_xi_dynamics": run_fig6,
    "fig7_rotation_sensitivity": run_fig7,
    "custom": run_custom,
}


def run_experiment(spec: SweepSpec) -> Table:
    table = RUNNERS[spec.experiment_name](spec)
    if spec.output_path is not None:
        Path(spec.output_path).write_text(table.to_csv())
    return table


def resolve_workers(cli_value: int | None) -> int:
    return cli_value if cli_value else default_workers()
