import math

import pytest

from ringsqueeze.config import SCHEMA, RunConfig, load_config, parse_config
from ringsqueeze.model import BOHR_RADIUS, ConfigError


def test_defaults_are_valid():
    cfg = RunConfig()
    cfg.check()
    assert set(cfg.values) == set(SCHEMA)


def test_parse_with_units_comments_and_lists():
    cfg = parse_config("""
        # geometry
        ring_radius_um = 20      # micrometres
        scattering_length_s2_bohr = 100
        fig6_t_prep_ms = 10, 20
        fig6_seeds = 5, 6
        single_mode = yes
        n_traj = 1e3
    """)
    phys = cfg.physical()
    assert phys.ring_radius == pytest.approx(20e-6)
    assert phys.scattering_length_s2 == pytest.approx(100 * BOHR_RADIUS)
    assert cfg.fig6_t_prep_ms == (10.0, 20.0)
    assert cfg.single_mode is True
    assert cfg.n_traj == 1000


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match="line 2: unknown key 'ring_radius'"):
        parse_config("n_traj = 10\nring_radius = 15\n")


@pytest.mark.parametrize("text", ["n_traj = 1.5", "single_mode = maybe", "fig5_seeds = ",
                                  "just a line", "winding_number = 0", "n_modes = 6",
                                  "fig6_seeds = 1", "interaction_scale = 2", "backend = exact"])
def test_bad_values_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


def test_load_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("master_seed = 42\n")
    assert load_config(path).master_seed == 42


def test_overrides():
    cfg = RunConfig().with_overrides(master_seed=5, n_traj=None)
    assert cfg.master_seed == 5 and cfg.n_traj == 1000
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(nope=1)
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(n_traj=1)


def test_digest_ignores_seed_and_trajectory_count():
    base = RunConfig()
    assert base.with_overrides(master_seed=9, n_traj=50).digest() == base.digest()
    assert base.with_overrides(dtau=2e-4).digest() != base.digest()


def test_default_seed_phase():
    assert RunConfig().seed_phase == pytest.approx(3 * math.pi / 4)
