import math

import pytest
from hypothesis import given, settings, strategies as st

from ringsqueeze.config import RunConfig
from ringsqueeze.model import (BOHR_RADIUS, ConfigError, FreeEvolution, PhysicalConfig,
                               PulseSchedule, RamanPulse, SeedPulse, SqueezeWindow,
                               canonical_schedule, derive_dimensionless, squeeze_r, tau_for_r,
                               validate_schedule)


def test_reference_c2_tilde():
    params = derive_dimensionless(PhysicalConfig())
    assert params.c2_tilde == pytest.approx(-6.82e-4, rel=0.01)
    assert params.ring_length == pytest.approx(2 * math.pi)


def test_equal_scattering_lengths_give_zero_c2():
    cfg = PhysicalConfig(scattering_length_s0=100 * BOHR_RADIUS, scattering_length_s2=100 * BOHR_RADIUS)
    assert derive_dimensionless(cfg).c2_tilde == 0.0


def test_doubling_area_halves_couplings():
    base = derive_dimensionless(PhysicalConfig())
    wide = derive_dimensionless(PhysicalConfig(transverse_area=2 * 2.33e-12))
    assert wide.c0_tilde == pytest.approx(base.c0_tilde / 2, rel=1e-14)
    assert wide.c2_tilde == pytest.approx(base.c2_tilde / 2, rel=1e-14)


def test_dimensionless_matches_dimensional_couplings():
    cfg = PhysicalConfig()
    params = derive_dimensionless(cfg)
    hbar_omega = 1.054571817e-34 * cfg.omega
    assert params.c0_tilde == pytest.approx(cfg.c0 / hbar_omega, rel=1e-12)
    assert params.c2_tilde == pytest.approx(cfg.c2 / hbar_omega, rel=1e-12)
    assert params.omega == pytest.approx(3.2476, rel=1e-4)


def test_unit_systems_agree():
    from_keys = derive_dimensionless(RunConfig().physical())
    si = derive_dimensionless(PhysicalConfig())
    for name in ("c0_tilde", "c2_tilde", "omega"):
        assert getattr(from_keys, name) == pytest.approx(getattr(si, name), rel=1e-12)


@given(radius=st.floats(1e-6, 1e-4), area=st.floats(1e-13, 1e-10),
       a0=st.floats(50, 150), a2=st.floats(50, 150))
@settings(max_examples=50, deadline=None)
def test_coupling_ratio_is_geometry_free(radius, area, a0, a2):
    if abs(a2 - a0) < 1e-3:
        return
    cfg = PhysicalConfig(ring_radius=radius, transverse_area=area,
                         scattering_length_s0=a0 * BOHR_RADIUS, scattering_length_s2=a2 * BOHR_RADIUS)
    p = derive_dimensionless(cfg)
    assert p.c0_tilde / p.c2_tilde == pytest.approx((2 * a2 + a0) / (a2 - a0), rel=1e-9)


@pytest.mark.parametrize("field", ["ring_radius", "transverse_area", "atomic_mass"])
def test_non_positive_geometry_rejected(field):
    with pytest.raises(ConfigError):
        PhysicalConfig(**{field: 0.0})


def test_bad_atom_number_and_winding_rejected():
    with pytest.raises(ConfigError):
        PhysicalConfig(atom_number_initial=0.5)
    with pytest.raises(ConfigError):
        PhysicalConfig(winding_number=0)


def test_squeeze_r_round_trip():
    p = derive_dimensionless(PhysicalConfig())
    assert squeeze_r(p, 1e5, tau_for_r(p, 1e5, 2.5)) == pytest.approx(2.5)
    assert squeeze_r(p, 1e5, 1.0) > 0


def test_interaction_scale_rescales_both():
    p = derive_dimensionless(PhysicalConfig())
    q = p.scaled(0.02)
    assert q.c0_tilde == pytest.approx(0.02 * p.c0_tilde)
    assert q.c2_tilde == pytest.approx(0.02 * p.c2_tilde)


def test_empty_schedule_is_valid():
    assert validate_schedule(PulseSchedule()) == []


def test_canonical_schedule_is_valid():
    assert validate_schedule(canonical_schedule(10, 0.1, 0.5)) == []


def test_negative_duration_reported_with_index():
    sched = PulseSchedule((SeedPulse(10), SqueezeWindow(-1.0)))
    assert "negative duration at index 1" in validate_schedule(sched)


def test_open_beam_splitter_reported():
    sched = PulseSchedule((SeedPulse(10), RamanPulse(math.pi / 2)))
    assert any("readout" in e for e in validate_schedule(sched))


def test_echo_schedule_is_readout_compatible():
    sched = PulseSchedule((RamanPulse(), FreeEvolution(0.2), RamanPulse(math.pi),
                           FreeEvolution(0.2), RamanPulse()))
    assert validate_schedule(sched) == []


def test_schedule_reports_every_problem():
    sched = PulseSchedule((RamanPulse(1.0), FreeEvolution(-2.0, interaction_scale=3.0)))
    errors = validate_schedule(sched)
    assert len(errors) == 4
