"""Wigner-sampled trajectory ensembles on the angular-momentum grid.

Amplitudes are stored as ``(n_traj, 3, M)`` complex arrays. Component axis
order is (+1, 0, -1); the mode axis is in FFT order, so mode ``k`` lives at
index ``k % M``. With ``psi_j(theta) = sum_k a_jk exp(i k theta)/sqrt(2 pi)``
the mode amplitudes are ordinary single-mode Wigner variables.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

PLUS, ZERO, MINUS = 0, 1, 2
COMPONENT_LABELS = ("+1", "0", "-1")

CHECKPOINT_MAGIC = b"RSQZ"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sHIQQd")


class AliasingError(ValueError):
    pass


def mode_numbers(n_modes: int) -> np.ndarray:
    return np.fft.fftfreq(n_modes, d=1.0 / n_modes).astype(np.int64)


def check_grid(n_modes: int, winding: int):
    """The seeded pair and the pulse partners must fit without wrapping."""
    if n_modes % 2:
        raise AliasingError(f"mode count must be even, got {n_modes}")
    if n_modes < 4 * winding + 2:
        raise AliasingError(
            f"M={n_modes} cannot hold modes +-{winding} and their pulse partners "
            f"(need M >= {4 * winding + 2})")


def full_mask(n_modes: int) -> np.ndarray:
    return np.ones((3, n_modes), dtype=bool)


def single_mode_mask(n_modes: int, winding: int) -> np.ndarray:
    """Only (0, 0), (+1, +l) and (-1, -l) are retained."""
    mask = np.zeros((3, n_modes), dtype=bool)
    mask[ZERO, 0] = True
    mask[PLUS, winding % n_modes] = True
    mask[MINUS, -winding % n_modes] = True
    return mask


@dataclass(frozen=True)
class SpinorField:
    amplitudes: np.ndarray
    time: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.amplitudes)):
            raise FloatingPointError("non-finite spinor amplitudes")

    @property
    def number(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass
class TrajectoryEnsemble:
    amplitudes: np.ndarray
    master_seed: int
    mask: np.ndarray
    tau: float = 0.0
    # beam rotation angle accumulated during free evolution (rad)
    rotation: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n_traj(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def count(self) -> int:
        return self.n_traj

    @property
    def n_modes(self) -> int:
        return self.amplitudes.shape[-1]

    def __len__(self):
        return self.n_traj

    def __getitem__(self, index: int) -> SpinorField:
        return SpinorField(self.amplitudes[index].copy(), self.tau)

    @property
    def trajectories(self) -> list[SpinorField]:
        return [self[i] for i in range(self.n_traj)]

    def copy(self) -> "TrajectoryEnsemble":
        return replace(self, amplitudes=self.amplitudes.copy(), meta=dict(self.meta))


def trajectory_noise(master_seed: int, index: int, n_modes: int) -> np.ndarray:
    """Vacuum noise for one trajectory: complex Gaussian, <|eta|^2> = 1/2 per mode.

    Philox is counter based; keying it by (master_seed, index) makes every
    trajectory reproducible on its own.
    """
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    draws = rng.standard_normal((2, 3, n_modes))
    return 0.5 * (draws[0] + 1j * draws[1])


def sample_initial(n0: float, n_modes: int, n_traj: int, master_seed: int, *,
                   winding: int = 2, single_mode: bool = False) -> TrajectoryEnsemble:
    """Coherent m_F = 0 condensate in k = 0 plus vacuum noise in every retained mode."""
    if n_modes < 1 or n_traj < 1:
        raise ValueError("need at least one mode and one trajectory")
    check_grid(n_modes, winding)
    mask = single_mode_mask(n_modes, winding) if single_mode else full_mask(n_modes)
    amps = np.empty((n_traj, 3, n_modes), dtype=np.complex128)
    for i in range(n_traj):
        amps[i] = trajectory_noise(master_seed, i, n_modes)
    amps[:, ZERO, 0] += np.sqrt(n0)
    amps *= mask
    return TrajectoryEnsemble(amps, int(master_seed), mask, meta={"winding": winding})


def save_checkpoint(ensemble: TrajectoryEnsemble, path) -> None:
    """Header (magic, version, M, n_traj, master_seed, tau) + LE complex64 payload."""
    header = _HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, ensemble.n_modes,
                          ensemble.n_traj, ensemble.master_seed & 0xFFFFFFFFFFFFFFFF,
                          float(ensemble.tau))
    payload = ensemble.amplitudes.astype("<c8").tobytes(order="C")
    Path(path).write_bytes(header + payload)


def load_checkpoint(path, *, winding: int = 2) -> TrajectoryEnsemble:
    raw = Path(path).read_bytes()
    magic, version, n_modes, n_traj, seed, tau = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError("not a trajectory checkpoint")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    body = np.frombuffer(raw, dtype="<c8", offset=_HEADER.size)
    if body.size != n_traj * 3 * n_modes:
        raise ValueError("truncated checkpoint payload")
    amps = body.reshape(n_traj, 3, n_modes).astype(np.complex128)
    # retained modes always carry vacuum noise, so exact zeros mark masked modes
    mask = np.any(amps != 0, axis=0)
    return TrajectoryEnsemble(amps, int(seed), mask, tau=tau, meta={"winding": winding})
