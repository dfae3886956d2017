"""Physical parameters, the dimensionless frame and the pulse schedule.

All dynamics run in the dimensionless ring frame: angle ``theta`` on
[0, 2*pi) and time ``tau = omega * t`` with ``omega = hbar / (m R^2)``.
Dimensional quantities only live on :class:`PhysicalConfig`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Union

# CODATA 2018, 10 significant digits
HBAR = 1.054571817e-34  # J s
BOHR_RADIUS = 5.291772109e-11  # m
ATOMIC_MASS_UNIT = 1.660539067e-27  # kg
RB87_MASS = 86.90918053 * ATOMIC_MASS_UNIT

RING_LENGTH = 2.0 * math.pi


class ConfigError(ValueError):
    """Invalid physical or numerical configuration."""


@dataclass(frozen=True)
class PhysicalConfig:
    """Dimensional experiment parameters (SI units internally)."""

    atom_number_initial: float = 1.0e5
    ring_radius: float = 15.0e-6
    transverse_area: float = 2.33e-12
    scattering_length_s0: float = 110.0 * BOHR_RADIUS
    scattering_length_s2: float = 107.0 * BOHR_RADIUS
    atomic_mass: float = RB87_MASS
    winding_number: int = 2

    def __post_init__(self):
        errors = self.problems()
        if errors:
            raise ConfigError("; ".join(errors))

    def problems(self) -> list[str]:
        out = []
        for name in ("ring_radius", "transverse_area", "atomic_mass",
                     "scattering_length_s0", "scattering_length_s2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                out.append(f"{name} must be positive, got {value!r}")
        if not self.atom_number_initial >= 1:
            out.append(f"atom_number_initial must be >= 1, got {self.atom_number_initial!r}")
        if int(self.winding_number) != self.winding_number or self.winding_number < 1:
            out.append(f"winding_number must be an integer >= 1, got {self.winding_number!r}")
        return out

    @property
    def c0(self) -> float:
        """Spin-independent 1D coupling (J), integrated over the transverse area."""
        a0, a2 = self.scattering_length_s0, self.scattering_length_s2
        return 2 * HBAR**2 * (2 * a2 + a0) / (3 * self.ring_radius * self.atomic_mass * self.transverse_area)

    @property
    def c2(self) -> float:
        """Spin-dependent 1D coupling (J); negative when a2 < a0."""
        a0, a2 = self.scattering_length_s0, self.scattering_length_s2
        return 2 * HBAR**2 * (a2 - a0) / (3 * self.ring_radius * self.atomic_mass * self.transverse_area)

    @property
    def omega(self) -> float:
        return HBAR / (self.atomic_mass * self.ring_radius**2)


@dataclass(frozen=True)
class DimensionlessParams:
    c0_tilde: float
    c2_tilde: float
    omega: float
    ring_length: float = RING_LENGTH

    def scaled(self, interaction_scale: float) -> "DimensionlessParams":
        """Both couplings rescaled together (transverse-area relaxation)."""
        return DimensionlessParams(self.c0_tilde * interaction_scale,
                                   self.c2_tilde * interaction_scale,
                                   self.omega, self.ring_length)

    def to_seconds(self, tau: float) -> float:
        return tau / self.omega

    def to_tau(self, seconds: float) -> float:
        return seconds * self.omega


def derive_dimensionless(config: PhysicalConfig) -> DimensionlessParams:
    """Reduce a physical configuration to the dimensionless couplings.

    ``c_S / (hbar omega)`` simplifies to ``2 (combination of a_S) R / (3 A)``,
    which is what is evaluated here so the result does not depend on hbar or m.
    """
    problems = config.problems()
    if problems:
        raise ConfigError("; ".join(problems))
    a0, a2 = config.scattering_length_s0, config.scattering_length_s2
    scale = 2.0 * config.ring_radius / (3.0 * config.transverse_area)
    return DimensionlessParams(
        c0_tilde=scale * (2 * a2 + a0),
        c2_tilde=scale * (a2 - a0),
        omega=config.omega,
    )


def squeeze_r(params: DimensionlessParams, n0: float, tau_prep: float) -> float:
    """Undepleted-pump squeezing parameter reached after ``tau_prep``."""
    return -params.c2_tilde * n0 / params.ring_length * tau_prep


def tau_for_r(params: DimensionlessParams, n0: float, r: float) -> float:
    return -r * params.ring_length / (params.c2_tilde * n0)


# --- schedule -------------------------------------------------------------

@dataclass(frozen=True)
class SeedPulse:
    """Coherent transfer of ``n_seed`` atoms into each of (+1, +l) and (-1, -l).

    ``duration == 0`` is the instantaneous limit (a displacement); a positive
    duration switches on the Raman seed coupling inside the drift instead.
    """

    n_seed: float
    seed_phase: float = 3 * math.pi / 4
    duration: float = 0.0
    kind: Literal["seed"] = field(default="seed", init=False)


@dataclass(frozen=True)
class SqueezeWindow:
    """Resonant spin-exchange window.

    ``zeeman_mode`` is ``"tracked"`` (resonance recomputed every step from the
    ensemble populations), ``"fixed"`` (uses ``zeeman_shift``) or ``"off"``.
    """

    duration: float
    zeeman_mode: Literal["tracked", "fixed", "off"] = "tracked"
    zeeman_shift: float = 0.0
    # multiplies the tracked shift; 1.1 is a 10% detuning error
    zeeman_error: float = 1.0
    kind: Literal["squeeze"] = field(default="squeeze", init=False)


@dataclass(frozen=True)
class RamanPulse:
    """Beam splitter between (+1, k) and (-1, k - 2l).

    ``beam_rotation`` is the mechanical rotation angle Phi of the LG beams;
    the optical phase seen by the atoms is ``2 l Phi``.
    """

    angle: float = math.pi / 2
    beam_rotation: float = 0.0
    duration: float = 0.0
    kind: Literal["raman"] = field(default="raman", init=False)


@dataclass(frozen=True)
class FreeEvolution:
    """Interrogation period. ``rotation_rate`` in rad/s, ``duration`` in tau."""

    duration: float
    rotation_rate: float = 0.0
    interaction_scale: float = 0.0
    kind: Literal["free"] = field(default="free", init=False)


Segment = Union[SeedPulse, SqueezeWindow, RamanPulse, FreeEvolution]


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple[Segment, ...] = ()

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)

    @property
    def total_duration(self) -> float:
        return sum(getattr(s, "duration", 0.0) for s in self.segments)


def canonical_schedule(n_seed: float, tau_prep: float, interrogation: float,
                       *, seed_phase: float = 3 * math.pi / 4,
                       rotation_rate: float = 0.0, interaction_scale: float = 0.0,
                       final_rotation: float = 0.0) -> PulseSchedule:
    """Seed -> squeeze (tracked) -> pi/2 -> free(T) -> pi/2."""
    return PulseSchedule((
        SeedPulse(n_seed, seed_phase),
        SqueezeWindow(tau_prep, "tracked"),
        RamanPulse(math.pi / 2),
        FreeEvolution(interrogation, rotation_rate, interaction_scale),
        RamanPulse(math.pi / 2, beam_rotation=final_rotation),
    ))


_ALLOWED_ANGLES = (math.pi / 2, math.pi)


def validate_schedule(schedule: PulseSchedule) -> list[str]:
    """Return every invariant violation; an empty list means the schedule is valid.

    A schedule is readout-compatible when its Raman pulses close the
    interferometer, i.e. their summed angle is a multiple of pi.
    """
    errors: list[str] = []
    total_angle = 0.0
    for i, seg in enumerate(schedule):
        duration = getattr(seg, "duration", 0.0)
        if not math.isfinite(duration):
            errors.append(f"non-finite duration at index {i}")
        elif duration < 0:
            errors.append(f"negative duration at index {i}")
        if isinstance(seg, SeedPulse):
            if not seg.n_seed >= 0:
                errors.append(f"negative seed size at index {i}")
        elif isinstance(seg, SqueezeWindow):
            if seg.zeeman_mode not in ("tracked", "fixed", "off"):
                errors.append(f"unknown zeeman mode {seg.zeeman_mode!r} at index {i}")
        elif isinstance(seg, RamanPulse):
            if not any(math.isclose(seg.angle, a) for a in _ALLOWED_ANGLES):
                errors.append(f"raman angle must be pi/2 or pi at index {i}")
            total_angle += seg.angle
        elif isinstance(seg, FreeEvolution):
            if not 0.0 <= seg.interaction_scale <= 1.0:
                errors.append(f"interaction scale outside [0, 1] at index {i}")
            if not math.isfinite(seg.rotation_rate):
                errors.append(f"non-finite rotation rate at index {i}")
        else:
            errors.append(f"unknown segment type at index {i}")
    half_turns = total_angle / math.pi
    if abs(half_turns - round(half_turns)) > 1e-9:
        errors.append("schedule does not end readout-compatible: open beam splitter")
    return errors
