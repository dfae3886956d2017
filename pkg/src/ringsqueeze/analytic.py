"""Closed-form undepleted-pump results for the seeded two-mode squeezer.

The +1/-1 modes evolve as ``a(r) = a cosh r + i b^dag sinh r`` from coherent
seeds ``alpha = -i exp(i chi) sqrt(N_seed)``. Everything here is a pure
function of (r, chi, N_seed); the two-mode Gaussian readout at the end of the
module backs the analytic interferometer backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

OPTIMAL_CHI = 3 * math.pi / 4


class InfeasibleError(ValueError):
    pass


class UndefinedSpinLengthError(ValueError):
    pass


@dataclass(frozen=True)
class TwoModeState:
    squeeze_r: float
    seed_phase: float = OPTIMAL_CHI
    seed_number: float = 10.0
    pump_number: float = 1.0e5

    def __post_init__(self):
        if self.squeeze_r < 0:
            raise ValueError("squeeze_r must be non-negative")
        if self.seed_number < 0:
            raise ValueError("seed_number must be non-negative")


def _gain(r: float, chi: float) -> float:
    # cosh 2r - sin 2chi sinh 2r; at chi = 3pi/4 this is exp(2r)
    if math.isclose(math.sin(2 * chi), -1.0, rel_tol=0, abs_tol=1e-15):
        return math.exp(2 * r)
    return math.cosh(2 * r) - math.sin(2 * chi) * math.sinh(2 * r)


def vacuum_population(r: float) -> float:
    return math.sinh(r) ** 2


def mode_population(state: TwoModeState) -> float:
    """Atoms in each of the seeded modes; only meaningful while << pump."""
    r = state.squeeze_r
    return vacuum_population(r) + _gain(r, state.seed_phase) * state.seed_number


def perpendicular_spin(state: TwoModeState) -> float:
    """Coherent (stimulated) part of the mode population, ``<J_x>``."""
    return abs(_gain(state.squeeze_r, state.seed_phase)) * state.seed_number


def jz_variance(state: TwoModeState) -> float:
    """Var(J_z) = (N_+ + N_-)/4 at the seeding instant; the pair process keeps it."""
    return state.seed_number / 2.0


def wineland_xi(state: TwoModeState) -> float:
    if state.seed_number <= 0:
        raise UndefinedSpinLengthError("xi needs a coherent seed (N_seed > 0)")
    r, chi, ns = state.squeeze_r, state.seed_phase, state.seed_number
    if math.isclose(math.sin(2 * chi), -1.0, rel_tol=0, abs_tol=1e-15):
        # exp(-4r) sinh^2 r written as ((1 - exp(-2r))/2)^2 exp(-2r): no overflow
        shrink = math.exp(-2 * r)
        vac = (0.5 * (1 - shrink)) ** 2 * shrink
        return math.sqrt(vac / ns + shrink)
    g = _gain(r, chi)
    return math.sqrt((vacuum_population(r) / ns + g) / g**2)


def min_seed_for_squeezing(r: float) -> float:
    """Seed size above which the Wineland parameter drops below one."""
    if r <= 0:
        raise ValueError("threshold defined for r > 0")
    return 0.5 * math.exp(-3 * r) * math.sinh(r)


def _check_budget(n_total: float, n_seed: float):
    if n_seed < 0 or n_total < 2 * n_seed:
        raise InfeasibleError(f"need N_t >= 2 N_seed >= 0, got N_t={n_total}, N_seed={n_seed}")


def _optimal_growth(n_total: float, n_seed: float) -> float:
    # exp(2 r_opt), the larger root of (1 + 4Ns) x^2 - 2(Nt + 1) x + 1 = 0
    return (math.sqrt(n_total * (n_total + 2) - 4 * n_seed) + n_total + 1) / (4 * n_seed + 1)


def optimal_r(n_total: float, n_seed: float) -> float:
    """Squeezing that puts half of ``n_total`` in each seeded mode."""
    _check_budget(n_total, n_seed)
    return math.log(math.sqrt(_optimal_growth(n_total, n_seed)))


def heisenberg_xi(n_total: float, n_seed: float) -> float:
    """sqrt(N_t) * xi at the optimal squeezing; equals 1 at the Heisenberg limit."""
    _check_budget(n_total, n_seed)
    if n_seed <= 0:
        raise UndefinedSpinLengthError("xi needs a coherent seed (N_seed > 0)")
    denom = math.sqrt(2 * n_seed) * (math.sqrt(n_total * (n_total + 2) - 4 * n_seed) + n_total + 1)
    return n_total * (4 * n_seed + 1) / denom


def heisenberg_xi_approx(n_seed: float) -> float:
    """Large-N_t limit of :func:`heisenberg_xi`; minimal (sqrt 2) at N_seed = 1/4."""
    if n_seed <= 0:
        raise UndefinedSpinLengthError("xi needs a coherent seed (N_seed > 0)")
    return (1 + 4 * n_seed) / math.sqrt(8 * n_seed)


# --- multimode frequency structure ---------------------------------------

def interrogation_frequencies(winding: int, modes) -> np.ndarray:
    """Beat frequency (units of omega) of the pair a_k^dag b_(k-2l) during free flight."""
    if winding < 1:
        raise ValueError("winding number must be >= 1")
    k = np.asarray(modes, dtype=np.int64)
    return 2 * k * winding - 2 * winding**2


def common_period(winding: int, modes) -> float:
    """2 pi / gcd of the non-zero beat frequencies, in units of 1/omega."""
    freqs = [abs(int(f)) for f in np.atleast_1d(interrogation_frequencies(winding, modes)) if f != 0]
    if not freqs:
        return math.inf
    return 2 * math.pi / reduce(math.gcd, freqs)


def unseeded_variance_term(r_k: float) -> float:
    """<A_k A_k> for an unseeded pair squeezed to r_k."""
    if r_k < 0:
        raise ValueError("r_k must be non-negative")
    return math.sinh(2 * r_k) ** 2 / 8.0


# --- Gaussian two-mode readout -------------------------------------------

def _mode_means_and_cov(state: TwoModeState):
    """Mean and Wigner covariance of (Re a, Im a, Re b, Im b) after squeezing."""
    r, chi, ns = state.squeeze_r, state.seed_phase, state.seed_number
    alpha = -1j * np.exp(1j * chi) * math.sqrt(ns)
    c, s = math.cosh(r), math.sinh(r)
    ar = alpha * c + 1j * np.conj(alpha) * s
    mean = np.array([ar.real, ar.imag, ar.real, ar.imag])
    # a -> c a + i s b*, b -> c b + i s a* acting on vacuum noise (var 1/4 per quadrature)
    # as a real-linear map on (xa, ya, xb, yb)
    lin = np.array([
        [c, 0.0, 0.0, s],
        [0.0, c, s, 0.0],
        [0.0, s, c, 0.0],
        [s, 0.0, 0.0, c],
    ])
    cov = 0.25 * lin @ lin.T
    return mean, cov


def _quadratic_moments(q, l, mean, cov):
    """Mean and variance of x^T q x + l^T x for Gaussian x."""
    mean_val = float(mean @ q @ mean + np.trace(q @ cov) + l @ mean)
    grad = 2 * q @ mean + l
    var_val = float(2 * np.trace(q @ cov @ q @ cov) + grad @ cov @ grad)
    return mean_val, var_val


# Weyl symbols of J_x and J_z in the quadratures (xa, ya, xb, yb)
_QX = 0.5 * np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)
_QZ = 0.5 * np.diag([1.0, 1.0, -1.0, -1.0])
_QY = 0.5 * np.array([[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]], dtype=float)
# symmetric-ordering offset for Var of a spin component spread over 2 modes
TWO_MODE_ORDERING_OFFSET = 2.0 / 16.0


def readout_moments(state: TwoModeState, phase: float) -> tuple[float, float]:
    """Mean and variance of J_z after pi/2 - (no free evolution) - pi/2(phase).

    The output signal is ``sin(phase) J_x(0) - cos(phase) J_z(0)``; moments are
    exact Gaussian integrals of its Weyl symbol.
    """
    mean, cov = _mode_means_and_cov(state)
    q = math.sin(phase) * _QX - math.cos(phase) * _QZ
    m, v = _quadratic_moments(q, np.zeros(4), mean, cov)
    # trace terms of the Weyl symbol carry the half-quanta; J_x, J_z are traceless
    return m, v - TWO_MODE_ORDERING_OFFSET


def spin_moments(state: TwoModeState) -> dict:
    """Exact <J_i> and Var(J_z) of the squeezed input state."""
    mean, cov = _mode_means_and_cov(state)
    out = {}
    for name, q in (("jx", _QX), ("jy", _QY), ("jz", _QZ)):
        m, v = _quadratic_moments(q, np.zeros(4), mean, cov)
        out[name] = m
        out["var_" + name] = v - TWO_MODE_ORDERING_OFFSET
    return out
