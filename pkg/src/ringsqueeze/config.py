"""Flat ``key = value`` run configuration.

Unit suffixes in key names fix the unit of the value (``ring_radius_um``,
``transverse_area_um2``, ``scattering_length_s0_bohr``, ``t_prep_ms`` ...).
Lines starting with ``#`` and blank lines are ignored; unknown keys are errors.
List-valued keys take comma-separated numbers.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

from .model import (ATOMIC_MASS_UNIT, BOHR_RADIUS, ConfigError, PhysicalConfig,
                    derive_dimensionless)


def _floats(text: str) -> tuple[float, ...]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(float(t) for t in items)


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


# key -> (parser, default, description)
SCHEMA: dict[str, tuple] = {
    # physical system
    "atom_number_initial": (float, 1.0e5, "initial m_F = 0 atom number N0"),
    "ring_radius_um": (float, 15.0, "ring radius R in micrometres"),
    "transverse_area_um2": (float, 2.33, "transverse area A in square micrometres"),
    "scattering_length_s0_bohr": (float, 110.0, "a0 in Bohr radii"),
    "scattering_length_s2_bohr": (float, 107.0, "a2 in Bohr radii"),
    "atomic_mass_amu": (float, 86.90918053, "atomic mass in unified atomic mass units"),
    "winding_number": (_int, 2, "LG winding number l"),
    # numerics
    "n_modes": (_int, 16, "angular-momentum modes per component (M)"),
    "n_traj": (_int, 1000, "stochastic trajectories"),
    "master_seed": (_int, 0, "64-bit master RNG seed"),
    "dtau": (float, 1.0e-4, "RK4 step in dimensionless time"),
    "delta_phase": (float, 1.0e-2, "finite-difference phase step for the fringe slope (rad)"),
    "batches": (_int, 20, "batches for standard errors"),
    # preparation and readout
    "seed_phase": (float, 3 * math.pi / 4, "seed phase chi (rad)"),
    "n_seed": (float, 10.0, "custom: seed atoms per mode"),
    "t_prep_ms": (float, 30.0, "custom: squeezing time in ms"),
    "interaction_scale": (float, 0.0, "custom: c2 ratio during interrogation"),
    "rotation_rate": (float, 0.0, "custom: rotation rate Omega (rad/s)"),
    "single_mode": (_bool, False, "custom: restrict to the three seeded modes"),
    "backend": (str, "twa", "custom: twa or analytic"),
    "t_max": (float, 2.0, "custom/fig6/fig7: longest interrogation time (tau)"),
    "t_points": (_int, 201, "custom/fig6: points in the T grid"),
    # figure presets
    "fig4_r_max": (float, 3.0, "fig4: largest r"),
    "fig4_r_points": (_int, 61, "fig4: r grid points"),
    "fig4_seeds": (_floats, (0.01, 0.1, 0.25, 1.0, 10.0, 100.0, 1000.0), "fig4: contour seed sizes"),
    "fig5_seeds": (_floats, (0.25, 1.0, 4.0, 16.0, 64.0, 256.0), "fig5: seed sizes"),
    "fig5_r_points": (_int, 40, "fig5: preparation-time scan points"),
    "fig5_r_max_factor": (float, 1.2, "fig5: scan up to this multiple of r_opt"),
    "fig6_t_prep_ms": (_floats, (125.0, 60.0, 30.0), "fig6/fig7: preparation times (ms)"),
    "fig6_seeds": (_floats, (100.0, 5000.0, 10000.0), "fig6/fig7: matching seed sizes"),
    "fig7_interaction_scales": (_floats, (0.0, 0.02, 1.0), "fig7: interaction ratios"),
    "fig7_t_points": (_int, 41, "fig7: points in the T grid"),
}

PROVENANCE_EXCLUDED = ("master_seed", "n_traj")


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k: v[1] for k, v in SCHEMA.items()})

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def physical(self) -> PhysicalConfig:
        v = self.values
        return PhysicalConfig(
            atom_number_initial=v["atom_number_initial"],
            ring_radius=v["ring_radius_um"] * 1e-6,
            transverse_area=v["transverse_area_um2"] * 1e-12,
            scattering_length_s0=v["scattering_length_s0_bohr"] * BOHR_RADIUS,
            scattering_length_s2=v["scattering_length_s2_bohr"] * BOHR_RADIUS,
            atomic_mass=v["atomic_mass_amu"] * ATOMIC_MASS_UNIT,
            winding_number=v["winding_number"],
        )

    def with_overrides(self, **kw) -> "RunConfig":
        vals = dict(self.values)
        for k, v in kw.items():
            if v is None:
                continue
            if k not in SCHEMA:
                raise ConfigError(f"unknown key {k!r}")
            vals[k] = v
        out = RunConfig(vals)
        out.check()
        return out

    def problems(self) -> list[str]:
        v = self.values
        out = []
        try:
            derive_dimensionless(self.physical())
        except ConfigError as exc:
            out.append(str(exc))
        if v["n_modes"] < 2 or v["n_modes"] % 2:
            out.append("n_modes must be even and >= 2")
        elif v["n_modes"] < 4 * v["winding_number"] + 2:
            out.append(f"n_modes must be >= 4 l + 2 = {4 * v['winding_number'] + 2}")
        if v["n_traj"] < 2:
            out.append("n_traj must be >= 2")
        if not 0 <= v["master_seed"] < 2**64:
            out.append("master_seed must fit in 64 bits")
        for key in ("dtau", "delta_phase", "t_max"):
            if not (v[key] > 0 and math.isfinite(v[key])):
                out.append(f"{key} must be positive")
        for key in ("n_seed", "t_prep_ms"):
            if v[key] < 0:
                out.append(f"{key} must be non-negative")
        if not 0 <= v["interaction_scale"] <= 1:
            out.append("interaction_scale must lie in [0, 1]")
        for key in ("fig7_interaction_scales",):
            if any(not 0 <= s <= 1 for s in v[key]):
                out.append(f"{key} entries must lie in [0, 1]")
        if v["backend"] not in ("twa", "analytic"):
            out.append("backend must be 'twa' or 'analytic'")
        if len(v["fig6_t_prep_ms"]) != len(v["fig6_seeds"]):
            out.append("fig6_t_prep_ms and fig6_seeds must have equal length")
        for key in ("t_points", "fig4_r_points", "fig5_r_points", "fig7_t_points", "batches"):
            if v[key] < 2:
                out.append(f"{key} must be >= 2")
        if any(s <= 0 for s in v["fig5_seeds"]) or any(s <= 0 for s in v["fig4_seeds"]):
            out.append("seed sizes must be positive")
        return out

    def check(self):
        errors = self.problems()
        if errors:
            raise ConfigError("; ".join(errors))

    def canonical_text(self) -> str:
        lines = []
        for key in sorted(self.values):
            if key in PROVENANCE_EXCLUDED:
                continue
            val = self.values[key]
            if isinstance(val, tuple):
                val = ",".join(repr(float(x)) for x in val)
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key}={val}")
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


def parse_config(text: str) -> RunConfig:
    values = {k: v[1] for k, v in SCHEMA.items()}
    errors = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        try:
            values[key] = SCHEMA[key][0](raw)
        except ValueError as exc:
            errors.append(f"line {lineno}: bad value for {key}: {exc}")
    if errors:
        raise ConfigError("; ".join(errors))
    cfg = RunConfig(values)
    cfg.check()
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
