"""Full interferometer runs: seed, squeeze, split, interrogate, recombine, read out.

The readout observable is J_z after the final beam splitter. Its slope with
respect to the interferometer phase is analytic for the two-mode backend and
a symmetric finite difference for the stochastic backend; the three phases of
the difference are applied to one and the same ensemble so that sampling noise
largely cancels.

A pi pulse between two free-evolution segments gives the echo variant. It is
accepted by the stochastic backend like any other schedule, although an echo
does not recover the sensitivity lost to interactions.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytic
from .model import (DimensionlessParams, FreeEvolution, PhysicalConfig, PulseSchedule,
                    RamanPulse, SeedPulse, SqueezeWindow, derive_dimensionless, squeeze_r,
                    validate_schedule)
from .twa import engine
from .twa.engine import StepControl
from .twa.ensemble import MINUS, PLUS, TrajectoryEnsemble, sample_initial
from .twa.moments import DEFAULT_BATCHES

DEFAULT_DELTA_PHASE = 1e-2
DEFAULT_MODES = 16
DEFAULT_TRAJECTORIES = 1000


class BackendMismatchError(ValueError):
    pass


class UndefinedSensitivityError(ValueError):
    pass


@dataclass
class InterferometerResult:
    signal_mean: float
    signal_var: float
    fringe_slope: float
    delta_phi: float | None
    delta_omega: float | None
    atoms_used: float
    phase: float
    interrogation_time: float  # seconds
    backend: str
    xi_series: list = field(default_factory=list)
    stderr: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass(frozen=True)
class Preparation:
    """Input-state preparation: instantaneous seed then a tracked squeeze window."""

    n_seed: float
    tau_prep: float
    seed_phase: float = analytic.OPTIMAL_CHI


@dataclass(frozen=True)
class TWASettings:
    n_traj: int = DEFAULT_TRAJECTORIES
    master_seed: int = 0
    n_modes: int = DEFAULT_MODES
    single_mode: bool = False
    step: StepControl = field(default_factory=StepControl)
    delta_phase: float = DEFAULT_DELTA_PHASE
    batches: int = DEFAULT_BATCHES


# --- sensitivity algebra --------------------------------------------------

def phase_uncertainty(signal_var: float, slope: float, scale: float = 1.0) -> float:
    """sqrt(Var J_z) / |d<J_z>/dphi|.

    ``scale`` sets what counts as a vanishing slope (|slope| <= 1e-9 scale).
    """
    if not math.isfinite(slope) or abs(slope) <= 1e-9 * max(scale, 1.0):
        raise UndefinedSensitivityError("fringe slope vanishes; phase uncertainty undefined")
    return math.sqrt(max(signal_var, 0.0)) / abs(slope)


def rotation_uncertainty(delta_phi: float, winding: int, interrogation_seconds: float) -> float:
    if interrogation_seconds <= 0:
        raise ValueError("interrogation time must be positive")
    if winding < 1:
        raise ValueError("winding number must be >= 1")
    return delta_phi / (2 * winding * interrogation_seconds)


# --- schedule helpers -----------------------------------------------------

def _interrogation_seconds(schedule: PulseSchedule, params: DimensionlessParams) -> float:
    return params.to_seconds(sum(s.duration for s in schedule if isinstance(s, FreeEvolution)))


def _accumulated_rotation(schedule: PulseSchedule, params: DimensionlessParams) -> float:
    return sum(s.rotation_rate * params.to_seconds(s.duration)
               for s in schedule if isinstance(s, FreeEvolution))


def is_canonical(schedule: PulseSchedule) -> bool:
    kinds = [type(s) for s in schedule]
    if kinds != [SeedPulse, SqueezeWindow, RamanPulse, FreeEvolution, RamanPulse]:
        return False
    seed, squeeze, bs1, free, bs2 = schedule.segments
    return (seed.duration == 0 and squeeze.zeeman_mode == "tracked" and squeeze.zeeman_error == 1.0
            and all(math.isclose(p.angle, math.pi / 2) and p.duration == 0 for p in (bs1, bs2))
            and free.interaction_scale == 0)


def preparation_schedule(prep: Preparation) -> PulseSchedule:
    return PulseSchedule((SeedPulse(prep.n_seed, prep.seed_phase),
                          SqueezeWindow(prep.tau_prep, "tracked")))


# --- analytic backend -----------------------------------------------------

def _run_analytic(config: PhysicalConfig, schedule: PulseSchedule) -> InterferometerResult:
    if not is_canonical(schedule):
        raise BackendMismatchError(
            "analytic backend needs seed -> tracked squeeze -> pi/2 -> free (no interactions) -> pi/2")
    params = derive_dimensionless(config)
    seed, squeeze, bs1, free, bs2 = schedule.segments
    winding = config.winding_number
    n0 = config.atom_number_initial
    state = analytic.TwoModeState(squeeze_r(params, n0, squeeze.duration), seed.seed_phase,
                                  seed.n_seed, n0)
    # the seeded pair does not beat during free flight, so only the phase matters
    phase = 2 * winding * (bs2.beam_rotation - bs1.beam_rotation + _accumulated_rotation(schedule, params))
    mean, var = analytic.readout_moments(state, phase)
    spin = analytic.spin_moments(state)
    slope = math.cos(phase) * spin["jx"] + math.sin(phase) * spin["jz"]
    atoms = 2 * analytic.mode_population(state)
    t_sec = _interrogation_seconds(schedule, params)
    return _finish(mean, var, slope, atoms, phase, t_sec, winding, "analytic",
                   scale=abs(spin["jx"]) + abs(spin["jz"]))


def _finish(mean, var, slope, atoms, phase, t_sec, winding, backend, scale, stderr=None):
    try:
        dphi = phase_uncertainty(var, slope, scale)
    except UndefinedSensitivityError:
        dphi = None
    domega = rotation_uncertainty(dphi, winding, t_sec) if dphi is not None and t_sec > 0 else None
    xi_series = []
    if dphi is not None:
        xi_series.append({"T_seconds": t_sec, "xi": dphi * math.sqrt(atoms)})
    return InterferometerResult(mean, var, slope, dphi, domega, atoms, phase, t_sec, backend,
                                xi_series, stderr or {})


# --- stochastic backend ---------------------------------------------------

def _jz_samples(ensemble: TrajectoryEnsemble) -> np.ndarray:
    pops = np.sum(np.abs(ensemble.amplitudes) ** 2, axis=-1)
    return 0.5 * (pops[:, PLUS] - pops[:, MINUS])


def _readout_atoms(ensemble: TrajectoryEnsemble) -> np.ndarray:
    pops = np.sum(np.abs(ensemble.amplitudes[:, [PLUS, MINUS]]) ** 2, axis=(1, 2))
    return pops - 0.5 * (ensemble.mask[PLUS].sum() + ensemble.mask[MINUS].sum())


@dataclass(frozen=True)
class ReadoutSamples:
    """Per-trajectory readout values at phi and phi +- delta."""

    centre: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    atoms: np.ndarray
    delta: float
    z_offset: float

    def stats(self, sl=slice(None)) -> dict:
        c = self.centre[sl]
        mean = float(c.mean())
        var = float(np.var(c, ddof=1)) - self.z_offset
        slope = float((self.plus[sl].mean() - self.minus[sl].mean()) / (2 * self.delta))
        atoms = float(self.atoms[sl].mean())
        xi = math.sqrt(atoms * max(var, 0.0)) / abs(slope) if slope != 0 else math.inf
        return {"signal_mean": mean, "signal_var": var, "fringe_slope": slope,
                "atoms_used": atoms, "xi": xi}

    def stderr(self, batches: int = DEFAULT_BATCHES) -> dict:
        n = len(self.centre)
        nb = min(batches, n // 2)
        if nb < 2:
            return {}
        edges = np.linspace(0, n, nb + 1).astype(int)
        rows = [self.stats(slice(lo, hi)) for lo, hi in zip(edges[:-1], edges[1:])]
        out = {}
        for key in rows[0]:
            vals = np.array([r[key] for r in rows])
            out[key] = float(np.std(vals, ddof=1) / math.sqrt(nb)) if np.all(np.isfinite(vals)) else math.nan
        return out


def readout(ensemble: TrajectoryEnsemble, pulse: RamanPulse, winding: int, delta: float,
            params: DimensionlessParams | None = None, step: StepControl | None = None) -> ReadoutSamples:
    """Apply the final pulse at phi and phi +- delta to the same ensemble."""
    shift = delta / (2 * winding)
    out = []
    for d in (0.0, shift, -shift):
        p = RamanPulse(pulse.angle, pulse.beam_rotation + d, pulse.duration)
        out.append(_jz_samples(engine.apply_raman_pulse(ensemble, p, winding, params=params, step=step)))
    z_offset = (ensemble.mask[PLUS].sum() + ensemble.mask[MINUS].sum()) / 16.0
    return ReadoutSamples(out[0], out[1], out[2], _readout_atoms(ensemble), delta, z_offset)


def _initial_ensemble(config: PhysicalConfig, settings: TWASettings) -> TrajectoryEnsemble:
    return sample_initial(config.atom_number_initial, settings.n_modes, settings.n_traj,
                          settings.master_seed, winding=config.winding_number,
                          single_mode=settings.single_mode)


def run_schedule(config: PhysicalConfig, segments, settings: TWASettings,
                 ensemble: TrajectoryEnsemble | None = None) -> TrajectoryEnsemble:
    """Push an ensemble (fresh if ``None``) through a list of segments."""
    params = derive_dimensionless(config)
    ens = ensemble if ensemble is not None else _initial_ensemble(config, settings)
    for seg in segments:
        ens = engine.evolve(ens, seg, settings.step, params=params,
                            winding=config.winding_number, n0=config.atom_number_initial)
    return ens


def _run_twa(config: PhysicalConfig, schedule: PulseSchedule, settings: TWASettings) -> InterferometerResult:
    params = derive_dimensionless(config)
    winding = config.winding_number
    segments = list(schedule)
    final = segments[-1] if segments and isinstance(segments[-1], RamanPulse) else None
    body = segments[:-1] if final is not None else segments
    ens = run_schedule(config, body, settings)
    t_sec = _interrogation_seconds(schedule, params)
    if final is None:
        jz = _jz_samples(ens)
        var = float(np.var(jz, ddof=1)) - (ens.mask[PLUS].sum() + ens.mask[MINUS].sum()) / 16.0
        return InterferometerResult(float(jz.mean()), var, math.nan, None, None,
                                    float(_readout_atoms(ens).mean()), math.nan, t_sec, "twa")
    samples = readout(ens, final, winding, settings.delta_phase, params, settings.step)
    st = samples.stats()
    phase = engine.raman_phase(final, ens, winding)
    scale = float(np.abs(samples.centre).mean()) + 1.0
    return _finish(st["signal_mean"], st["signal_var"], st["fringe_slope"], st["atoms_used"],
                   phase, t_sec, winding, "twa", scale=scale, stderr=samples.stderr(settings.batches))


def run_sequence(config: PhysicalConfig, schedule: PulseSchedule, backend: str = "analytic",
                 settings: TWASettings | None = None) -> InterferometerResult:
    errors = validate_schedule(schedule)
    if errors:
        raise ValueError("; ".join(errors))
    if backend == "analytic":
        return _run_analytic(config, schedule)
    if backend == "twa":
        return _run_twa(config, schedule, settings or TWASettings())
    raise BackendMismatchError(f"unknown backend {backend!r}")


# --- xi(T) ----------------------------------------------------------------

XI_COLUMNS = ("T_dimensionless", "T_seconds", "xi", "xi_stderr", "N_t")


def prepare_ensemble(config: PhysicalConfig, prep: Preparation, settings: TWASettings) -> TrajectoryEnsemble:
    """Seed, squeeze and apply the first beam splitter."""
    segs = list(preparation_schedule(prep)) + [RamanPulse(math.pi / 2)]
    return run_schedule(config, segs, settings)


def xi_vs_interrogation(config: PhysicalConfig, prep: Preparation, t_grid, *,
                        backend: str = "twa", settings: TWASettings | None = None,
                        interaction_scale: float = 0.0, rotation_rate: float = 0.0,
                        on_point=None, ensemble: TrajectoryEnsemble | None = None) -> list[dict]:
    """Effective xi = sqrt(N_t) delta_phi at phi = 0 for every T in ``t_grid`` (units of tau).

    The ensemble is carried forward from one grid point to the next, so a
    single free-evolution run serves the whole grid. ``on_point(row, samples)``
    sees each point as it is produced. A prepared ``ensemble`` (after the
    first beam splitter) skips the preparation.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or np.any(np.diff(t_grid) < 0) or t_grid[0] < 0:
        raise ValueError("T grid must be non-empty, non-negative and ascending")
    params = derive_dimensionless(config)
    winding = config.winding_number
    rows = []
    if backend == "analytic":
        if interaction_scale != 0:
            raise BackendMismatchError("analytic backend has no interactions during interrogation")
        state = analytic.TwoModeState(squeeze_r(params, config.atom_number_initial, prep.tau_prep),
                                      prep.seed_phase, prep.n_seed, config.atom_number_initial)
        xi = analytic.wineland_xi(state)
        n_t = 2 * analytic.mode_population(state)
        for t in t_grid:
            rows.append({"T_dimensionless": float(t), "T_seconds": params.to_seconds(t),
                         "xi": xi, "xi_stderr": 0.0, "N_t": n_t})
        return rows
    if backend != "twa":
        raise BackendMismatchError(f"unknown backend {backend!r}")
    settings = settings or TWASettings()
    ens = ensemble if ensemble is not None else prepare_ensemble(config, prep, settings)
    final = RamanPulse(math.pi / 2)
    t_prev = 0.0
    for t in t_grid:
        seg = FreeEvolution(float(t - t_prev), rotation_rate, interaction_scale)
        ens = engine.evolve(ens, seg, settings.step, params=params, winding=winding,
                            n0=config.atom_number_initial)
        t_prev = float(t)
        samples = readout(ens, final, winding, settings.delta_phase)
        st, se = samples.stats(), samples.stderr(settings.batches)
        row = {"T_dimensionless": float(t), "T_seconds": params.to_seconds(t),
               "xi": st["xi"], "xi_stderr": se.get("xi", math.nan), "N_t": st["atoms_used"]}
        rows.append(row)
        if on_point is not None:
            on_point(row, samples)
    return rows


def xi_series_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(XI_COLUMNS)
    for r in rows:
        writer.writerow([repr(float(r[c])) for c in XI_COLUMNS])
    return buf.getvalue()
