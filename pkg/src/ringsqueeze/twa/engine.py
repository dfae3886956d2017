"""Deterministic drift of the truncated-Wigner field equations.

Trajectories are advanced with fixed-step RK4 in the interaction picture of
the kinetic term, so ``-1/2 d^2/dtheta^2`` is applied exactly in mode space.
The contact terms are evaluated on an M-point angle grid. Each trajectory is
rotated by the global phase ``c0 N / L`` (its own chemical-potential scale),
which leaves every observable unchanged but removes the fast common phase
that would otherwise limit the step size.

Work is split into fixed-size trajectory blocks. Block boundaries never depend
on the worker count, so the arithmetic, and hence the output, is the same for
any number of threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np
from scipy import fft as sfft

from ..model import (DimensionlessParams, FreeEvolution, RamanPulse, SeedPulse,
                     SqueezeWindow)
from .ensemble import MINUS, PLUS, ZERO, TrajectoryEnsemble, check_grid, mode_numbers

DEFAULT_DTAU = 1e-4
BLOCK_SIZE = 256


class IntegrationDivergedError(FloatingPointError):
    def __init__(self, tau: float, trajectory: int):
        super().__init__(f"non-finite amplitudes at tau={tau:.6g} in trajectory {trajectory}")
        self.tau = tau
        self.trajectory = trajectory


@dataclass(frozen=True)
class StepControl:
    dtau: float = DEFAULT_DTAU
    workers: int = 1
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if not (self.dtau > 0 and math.isfinite(self.dtau)):
            raise ValueError(f"dtau must be positive, got {self.dtau}")
        if self.workers < 1 or self.block_size < 1:
            raise ValueError("workers and block_size must be >= 1")


def default_workers() -> int:
    env = os.environ.get("RINGSQUEEZE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# --- populations and Zeeman resonance ------------------------------------

def corrected_populations(ensemble: TrajectoryEnsemble) -> np.ndarray:
    """Ensemble-mean number per component with the half-quantum per mode removed."""
    raw = np.mean(np.sum(np.abs(ensemble.amplitudes) ** 2, axis=-1), axis=0)
    return raw - 0.5 * ensemble.mask.sum(axis=-1)


def mean_field_energies(params: DimensionlessParams, populations) -> tuple[float, float, float]:
    """Homogeneous mean-field energies (E+1, E0, E-1) per atom, units of hbar omega."""
    n_p, n_0, n_m = populations
    c0, c2, L = params.c0_tilde, params.c2_tilde, params.ring_length
    e_plus = ((c0 + c2) * (n_0 + n_p) + (c0 - c2) * n_m) / L
    e_minus = ((c0 + c2) * (n_0 + n_m) + (c0 - c2) * n_p) / L
    e_zero = (c0 * n_0 + (c0 + c2) * (n_p + n_m)) / L
    return e_plus, e_zero, e_minus


def resonant_zeeman(params: DimensionlessParams, populations, winding: int) -> float:
    """Quadratic Zeeman shift that makes 0 + 0 -> (+1, +l) + (-1, -l) energy conserving."""
    e_plus, e_zero, e_minus = mean_field_energies(params, populations)
    return e_zero - 0.5 * (e_plus + e_minus) - 0.5 * winding**2


def zeeman_tracking(ensemble: TrajectoryEnsemble, params: DimensionlessParams,
                    winding: int) -> float:
    return resonant_zeeman(params, corrected_populations(ensemble), winding)


# --- drift ----------------------------------------------------------------

@numba.njit(cache=True)
def _contact_terms(raw, c0, c2, zeeman, gauge, out):
    """-i x (contact + Zeeman terms) on the grid.

    ``raw`` is the unnormalized inverse transform ``sum_k a_k exp(i k theta)``;
    the field is ``raw / sqrt(2 pi)`` and the result is scaled back by
    ``sqrt(2 pi)`` so a forward-normalized FFT returns mode amplitudes.
    """
    inv_l = 1.0 / (2.0 * np.pi)
    n_traj, _, n_points = raw.shape
    for b in range(n_traj):
        mu = gauge[b]
        for j in range(n_points):
            p = raw[b, 0, j]
            z = raw[b, 1, j]
            m = raw[b, 2, j]
            n_p = (p.real * p.real + p.imag * p.imag) * inv_l
            n_0 = (z.real * z.real + z.imag * z.imag) * inv_l
            n_m = (m.real * m.real + m.imag * m.imag) * inv_l
            common = c0 * (n_p + n_0 + n_m) - mu
            z2 = z * z * inv_l
            vp = (common + c2 * (n_p + n_0 - n_m) + zeeman) * p + c2 * m.conjugate() * z2
            vm = (common + c2 * (n_m + n_0 - n_p) + zeeman) * m + c2 * p.conjugate() * z2
            v0 = (common + c2 * (n_p + n_m)) * z + 2 * c2 * z.conjugate() * p * m * inv_l
            out[b, 0, j] = complex(vp.imag, -vp.real)
            out[b, 1, j] = complex(v0.imag, -v0.real)
            out[b, 2, j] = complex(vm.imag, -vm.real)


@dataclass(frozen=True)
class _Drift:
    """Right-hand side of the field equations for one step (kinetic term excluded)."""

    c0: float
    c2: float
    zeeman: float
    mask: np.ndarray
    winding: int
    # beam-splitter coupling between (+1, k) and (-1, k - 2l)
    raman_rate: float = 0.0
    raman_phase: float = 0.0
    # seeding coupling between (0, k) and (+-1, k +- l)
    seed_rate: float = 0.0
    seed_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "_full", bool(self.mask.all()))

    def __call__(self, a: np.ndarray, gauge: np.ndarray) -> np.ndarray:
        if self.c0 != 0 or self.c2 != 0 or self.zeeman != 0:
            raw = sfft.ifft(a, axis=-1, norm="forward")
            v = np.empty_like(raw)
            _contact_terms(raw, self.c0, self.c2, self.zeeman, gauge, v)
            out = sfft.fft(v, axis=-1, norm="forward", overwrite_x=True)
        else:
            out = np.zeros_like(a)
        if self.raman_rate:
            shift = 2 * self.winding
            g = -0.5j * self.raman_rate * np.exp(1j * self.raman_phase)
            out[:, PLUS] += g * np.roll(a[:, MINUS], shift, axis=-1)
            out[:, MINUS] += -np.conj(g) * np.roll(a[:, PLUS], -shift, axis=-1)
        if self.seed_rate:
            l = self.winding
            g = -1j * self.seed_rate * np.exp(1j * self.seed_phase)
            out[:, PLUS] += g * np.roll(a[:, ZERO], l, axis=-1)
            out[:, MINUS] += g * np.roll(a[:, ZERO], -l, axis=-1)
            out[:, ZERO] += -np.conj(g) * (np.roll(a[:, PLUS], -l, axis=-1) + np.roll(a[:, MINUS], l, axis=-1))
        if not self._full:
            out *= self.mask
        return out


def _kinetic_phase(n_modes: int, tau: float) -> np.ndarray:
    k = mode_numbers(n_modes).astype(float)
    return np.exp(-0.5j * k * k * tau)


def _rk4ip_step(a, h, drift: _Drift, gauge, half_kinetic):
    """One interaction-picture RK4 step; ``half_kinetic`` is exp(-i k^2 h / 4)."""
    a_ip = half_kinetic * a
    k1 = half_kinetic * drift(a, gauge)
    k2 = drift(a_ip + 0.5 * h * k1, gauge)
    k3 = drift(a_ip + 0.5 * h * k2, gauge)
    k4 = drift(half_kinetic * (a_ip + h * k3), gauge)
    return half_kinetic * (a_ip + (h / 6.0) * (k1 + 2 * k2 + 2 * k3)) + (h / 6.0) * k4


class _BlockRunner:
    def __init__(self, n_traj: int, step: StepControl):
        self.blocks = [slice(s, min(s + step.block_size, n_traj))
                       for s in range(0, n_traj, step.block_size)]
        workers = min(step.workers, len(self.blocks))
        self.pool = ThreadPoolExecutor(workers) if workers > 1 else None

    def map(self, fn):
        if self.pool is None:
            for b in self.blocks:
                fn(b)
        else:
            list(self.pool.map(fn, self.blocks))

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _check_finite(a: np.ndarray, tau: float, offset: int = 0):
    bad = ~np.all(np.isfinite(a.reshape(a.shape[0], -1)), axis=1)
    if np.any(bad):
        raise IntegrationDivergedError(tau, offset + int(np.argmax(bad)))


def integrate(ensemble: TrajectoryEnsemble, duration: float, params: DimensionlessParams, *,
              winding: int, step: StepControl, zeeman=0.0, raman_rate=0.0, raman_phase=0.0,
              seed_rate=0.0, seed_phase=0.0, on_step=None) -> TrajectoryEnsemble:
    """Advance every trajectory by ``duration``.

    ``zeeman`` is a number or a callable ``f(ensemble) -> shift`` evaluated at
    the start of each step. ``on_step(ensemble)`` is called after each step.
    """
    out = ensemble.copy()
    if duration <= 0:
        return out
    check_grid(out.n_modes, winding)
    n_steps = max(1, math.ceil(duration / step.dtau - 1e-9))
    h = duration / n_steps
    half_kinetic = _kinetic_phase(out.n_modes, 0.5 * h)
    amps = out.amplitudes
    gauge = params.c0_tilde * np.sum(np.abs(amps) ** 2, axis=(1, 2)) / params.ring_length
    runner = _BlockRunner(out.n_traj, step)
    try:
        for i in range(n_steps):
            shift = zeeman(out) if callable(zeeman) else zeeman
            drift = _Drift(params.c0_tilde, params.c2_tilde, shift, out.mask, winding,
                           raman_rate, raman_phase, seed_rate, seed_phase)
            tau_end = out.tau + h

            def advance(b, drift=drift, tau_end=tau_end):
                new = _rk4ip_step(amps[b], h, drift, gauge[b], half_kinetic)
                _check_finite(new, tau_end, b.start)
                amps[b] = new

            runner.map(advance)
            out.tau = ensemble.tau + (i + 1) * h
            if on_step is not None:
                on_step(out)
    finally:
        runner.close()
    return out


def free_propagate(ensemble: TrajectoryEnsemble, duration: float) -> TrajectoryEnsemble:
    """Exact non-interacting evolution: a_k -> a_k exp(-i k^2 tau / 2)."""
    out = ensemble.copy()
    out.amplitudes *= _kinetic_phase(out.n_modes, duration)
    out.tau += duration
    return out


# --- pulses ---------------------------------------------------------------

def raman_phase(pulse: RamanPulse, ensemble: TrajectoryEnsemble, winding: int) -> float:
    """Optical phase 2 l Phi, including rotation accumulated during free flight."""
    return 2 * winding * (pulse.beam_rotation + ensemble.rotation)


def beam_splitter(ensemble: TrajectoryEnsemble, angle: float, phase: float,
                  winding: int) -> TrajectoryEnsemble:
    """Instantaneous mixing of (+1, k) with (-1, k - 2l); component 0 untouched."""
    check_grid(ensemble.n_modes, winding)
    out = ensemble.copy()
    a = out.amplitudes
    shift = 2 * winding
    up = a[:, PLUS].copy()
    down = np.roll(a[:, MINUS], shift, axis=-1)
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    e = np.exp(1j * phase)
    a[:, PLUS] = c * up - 1j * s * e * down
    a[:, MINUS] = np.roll(c * down - 1j * s * np.conj(e) * up, -shift, axis=-1)
    return out


def apply_raman_pulse(ensemble: TrajectoryEnsemble, pulse: RamanPulse, winding: int, *,
                      params: DimensionlessParams | None = None,
                      step: StepControl | None = None) -> TrajectoryEnsemble:
    """Apply a beam-splitter pulse, instantaneous unless ``pulse.duration > 0``.

    Finite pulses run the Raman coupling inside the drift together with the
    kinetic and contact terms of ``params`` (no Zeeman shift).
    """
    phase = raman_phase(pulse, ensemble, winding)
    if pulse.duration <= 0:
        return beam_splitter(ensemble, pulse.angle, phase, winding)
    if params is None:
        raise ValueError("a finite-duration pulse needs interaction parameters")
    return integrate(ensemble, pulse.duration, params, winding=winding,
                     step=step or StepControl(), raman_rate=pulse.angle / pulse.duration,
                     raman_phase=phase)


def seed_amplitude(n_seed: float, chi: float) -> complex:
    return -1j * np.exp(1j * chi) * math.sqrt(n_seed)


def seed_pulse(ensemble: TrajectoryEnsemble, n_seed: float, chi: float, n0: float, *,
               winding: int, duration: float = 0.0, params: DimensionlessParams | None = None,
               step: StepControl | None = None) -> TrajectoryEnsemble:
    """Coherently transfer ``n_seed`` atoms into each of (+1, +l) and (-1, -l).

    The instantaneous form displaces both modes by ``-i exp(i chi) sqrt(n_seed)``
    and lowers the pump amplitude to ``sqrt(n0 - 2 n_seed)``. A finite duration
    drives the Raman seed coupling with the pulse area that moves the same
    number of atoms, with the two-photon detuning set on resonance.
    """
    if n_seed < 0:
        raise ValueError("n_seed must be non-negative")
    if 2 * n_seed > n0:
        raise ValueError(f"cannot seed 2 x {n_seed} atoms from a pump of {n0}")
    check_grid(ensemble.n_modes, winding)
    if n_seed == 0:
        return ensemble.copy()
    if duration <= 0:
        out = ensemble.copy()
        alpha = seed_amplitude(n_seed, chi)
        out.amplitudes[:, PLUS, winding % out.n_modes] += alpha
        out.amplitudes[:, MINUS, -winding % out.n_modes] += alpha
        out.amplitudes[:, ZERO, 0] += math.sqrt(n0 - 2 * n_seed) - math.sqrt(n0)
        return out
    if params is None:
        raise ValueError("a finite-duration seed pulse needs interaction parameters")
    # c(t) = c cos(sqrt2 g t), seeded modes -i e^{i chi} c sin(sqrt2 g t)/sqrt2
    rate = math.asin(math.sqrt(2 * n_seed / n0)) / (math.sqrt(2) * duration)
    detuning = -0.5 * winding**2 - params.c2_tilde * n0 / params.ring_length
    return integrate(ensemble, duration, params, winding=winding, step=step or StepControl(),
                     zeeman=detuning, seed_rate=rate, seed_phase=chi)


# --- segment dispatch -----------------------------------------------------

def evolve(ensemble: TrajectoryEnsemble, segment, step: StepControl, *,
           params: DimensionlessParams, winding: int, n0: float,
           on_step=None) -> TrajectoryEnsemble:
    """Advance an ensemble through one schedule segment."""
    if isinstance(segment, SeedPulse):
        return seed_pulse(ensemble, segment.n_seed, segment.seed_phase, n0, winding=winding,
                          duration=segment.duration, params=params, step=step)
    if isinstance(segment, RamanPulse):
        return apply_raman_pulse(ensemble, segment, winding, params=params, step=step)
    if isinstance(segment, SqueezeWindow):
        if segment.zeeman_mode == "tracked":
            def shift(ens):
                return segment.zeeman_error * zeeman_tracking(ens, params, winding)
        elif segment.zeeman_mode == "fixed":
            shift = segment.zeeman_shift
        elif segment.zeeman_mode == "off":
            shift = 0.0
        else:
            raise ValueError(f"unknown zeeman mode {segment.zeeman_mode!r}")
        return integrate(ensemble, segment.duration, params, winding=winding, step=step,
                         zeeman=shift, on_step=on_step)
    if isinstance(segment, FreeEvolution):
        scaled = params.scaled(segment.interaction_scale)
        if scaled.c0_tilde == 0 and scaled.c2_tilde == 0:
            out = free_propagate(ensemble, segment.duration)
        else:
            out = integrate(ensemble, segment.duration, scaled, winding=winding, step=step,
                            on_step=on_step)
        out.rotation = ensemble.rotation + segment.rotation_rate * params.to_seconds(segment.duration)
        return out
    raise TypeError(f"unsupported segment {segment!r}")
