"""Pseudo-spin moments from Wigner samples.

``J_x + i J_y = sum_k a_k^* b_(k-2l)`` pairs mode ``k`` of the +1 component
with mode ``k - 2l`` of the -1 component, i.e. the spinor weighted by
``exp(2 i l theta)``. Wigner averages are symmetrically ordered, so

* each mode population loses 1/2,
* Var(J_z) loses 1/16 per retained +-1 mode (from W(n^2) = (|a|^2 - 1/2)^2 - 1/4),
* Var(J_x), Var(J_y) lose 1/8 per retained (a_k, b_(k-2l)) pair.

Standard errors come from batch means over contiguous trajectory batches.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .ensemble import MINUS, PLUS, TrajectoryEnsemble

DEFAULT_BATCHES = 20


class NoVarianceError(ValueError):
    pass


@dataclass(frozen=True)
class SpinMoments:
    mean_jx: float
    mean_jy: float
    mean_jz: float
    var_jz: float
    var_jy: float
    j_perp: float
    xi: float
    n_total: float
    populations: tuple[float, float, float]
    mode_populations: np.ndarray = field(repr=False)
    stderr: dict = field(default_factory=dict)
    var_clamped: bool = False
    n_traj: int = 0

    def as_dict(self) -> dict:
        out = asdict(self)
        out["mode_populations"] = self.mode_populations.tolist()
        out["populations"] = list(self.populations)
        return out


@dataclass(frozen=True)
class _Samples:
    """Per-trajectory Wigner variables needed for the estimators."""

    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    pops: np.ndarray  # (n, 3)
    z_offset: float
    xy_offset: float
    half_quanta: np.ndarray  # (3,)


def _samples(ensemble: TrajectoryEnsemble, winding: int) -> _Samples:
    a = ensemble.amplitudes
    mask = ensemble.mask
    up = a[:, PLUS]
    down = np.roll(a[:, MINUS], 2 * winding, axis=-1)
    adb = np.sum(np.conj(up) * down, axis=-1)
    mode_pop = np.abs(a) ** 2
    pops = mode_pop.sum(axis=-1)
    half = 0.5 * mask.sum(axis=-1)
    jz = 0.5 * ((pops[:, PLUS] - half[PLUS]) - (pops[:, MINUS] - half[MINUS]))
    pairs = np.count_nonzero(mask[PLUS] & np.roll(mask[MINUS], 2 * winding))
    return _Samples(adb.real, adb.imag, jz, pops,
                    z_offset=(mask[PLUS].sum() + mask[MINUS].sum()) / 16.0,
                    xy_offset=pairs / 8.0, half_quanta=half)


def _stats(s: _Samples) -> dict:
    n = len(s.jz)
    pops = s.pops.mean(axis=0) - s.half_quanta
    mean_jx, mean_jy, mean_jz = float(s.jx.mean()), float(s.jy.mean()), float(s.jz.mean())
    var_jz_raw = float(np.var(s.jz, ddof=1)) - s.z_offset if n > 1 else math.nan
    var_jy = float(np.var(s.jy, ddof=1)) - s.xy_offset if n > 1 else math.nan
    var_jz = max(var_jz_raw, 0.0) if math.isfinite(var_jz_raw) else var_jz_raw
    j_perp = math.hypot(mean_jx, mean_jy)
    n_total = float(pops[PLUS] + pops[MINUS])
    if j_perp > 0 and n_total > 0:
        xi = math.sqrt(n_total * var_jz) / j_perp
    else:
        xi = math.inf
    return {
        "mean_jx": mean_jx, "mean_jy": mean_jy, "mean_jz": mean_jz,
        "var_jz": var_jz, "var_jz_raw": var_jz_raw, "var_jy": var_jy,
        "j_perp": j_perp, "xi": xi, "n_total": n_total,
        "n_plus": float(pops[PLUS]), "n_zero": float(pops[1]), "n_minus": float(pops[MINUS]),
    }


def _subset(s: _Samples, idx: slice) -> _Samples:
    return _Samples(s.jx[idx], s.jy[idx], s.jz[idx], s.pops[idx],
                    s.z_offset, s.xy_offset, s.half_quanta)


def batch_stderr(s: _Samples, batches: int = DEFAULT_BATCHES) -> dict:
    n = len(s.jz)
    nb = min(batches, n // 2)
    if nb < 2:
        return {}
    edges = np.linspace(0, n, nb + 1).astype(int)
    per_batch = [_stats(_subset(s, slice(lo, hi))) for lo, hi in zip(edges[:-1], edges[1:])]
    out = {}
    for key in per_batch[0]:
        vals = np.array([b[key] for b in per_batch], dtype=float)
        if not np.all(np.isfinite(vals)):
            out[key] = math.nan
            continue
        out[key] = float(np.std(vals, ddof=1) / math.sqrt(nb))
    return out


def estimate_moments(ensemble: TrajectoryEnsemble, winding: int, *,
                     batches: int = DEFAULT_BATCHES) -> SpinMoments:
    if ensemble.n_traj < 2:
        raise NoVarianceError("moment estimation needs at least two trajectories")
    s = _samples(ensemble, winding)
    st = _stats(s)
    mode_pop = np.mean(np.abs(ensemble.amplitudes) ** 2, axis=0) - 0.5 * ensemble.mask
    return SpinMoments(
        mean_jx=st["mean_jx"], mean_jy=st["mean_jy"], mean_jz=st["mean_jz"],
        var_jz=st["var_jz"], var_jy=st["var_jy"], j_perp=st["j_perp"], xi=st["xi"],
        n_total=st["n_total"],
        populations=(st["n_plus"], st["n_zero"], st["n_minus"]),
        mode_populations=mode_pop,
        stderr=batch_stderr(s, batches),
        var_clamped=st["var_jz_raw"] < 0,
        n_traj=ensemble.n_traj,
    )


def readout_moments(ensemble: TrajectoryEnsemble) -> tuple[float, float]:
    """Mean and ordering-corrected variance of J_z, without the full moment set."""
    s = _samples(ensemble, 0)
    return float(s.jz.mean()), float(np.var(s.jz, ddof=1)) - s.z_offset


def number_variance(ensemble: TrajectoryEnsemble, component: int) -> float:
    """Corrected variance of one component's total number."""
    pops = np.sum(np.abs(ensemble.amplitudes[:, component]) ** 2, axis=-1)
    return float(np.var(pops, ddof=1)) - ensemble.mask[component].sum() / 4.0
