"""Multimode truncated-Wigner engine."""

from .engine import (DEFAULT_DTAU, IntegrationDivergedError, StepControl, apply_raman_pulse,
                     beam_splitter, corrected_populations, evolve, free_propagate, integrate,
                     resonant_zeeman, seed_pulse, zeeman_tracking)
from .ensemble import (AliasingError, SpinorField, TrajectoryEnsemble, load_checkpoint,
                       mode_numbers, sample_initial, save_checkpoint)
from .moments import NoVarianceError, SpinMoments, estimate_moments

__all__ = [
    "DEFAULT_DTAU", "AliasingError", "IntegrationDivergedError", "NoVarianceError",
    "SpinMoments", "SpinorField", "StepControl", "TrajectoryEnsemble",
    "apply_raman_pulse", "beam_splitter", "corrected_populations", "estimate_moments",
    "evolve", "free_propagate", "integrate", "load_checkpoint", "mode_numbers",
    "resonant_zeeman", "sample_initial", "save_checkpoint", "seed_pulse", "zeeman_tracking",
]
