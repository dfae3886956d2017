"""Exact two-mode reference: the undepleted pair Hamiltonian in a truncated Fock basis.

``H = g (a^dag b^dag + a b)`` conserves ``n_a - n_b``, so the propagator is a
direct sum of real symmetric tridiagonal blocks, one per number difference.
Each block is exponentiated exactly through its eigendecomposition. The state
is kept as a ``(cutoff, cutoff)`` array of amplitudes ``psi[n_a, n_b]``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    if alpha == 0:
        out = np.zeros(cutoff, dtype=complex)
        out[0] = 1.0
        return out
    n = np.arange(cutoff)
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * np.angle(alpha) * n)


def squeezed_seed_state(r: float, chi: float, n_seed: float, cutoff: int) -> np.ndarray:
    """exp(i r (a^dag b^dag + a b)) |alpha, alpha>, alpha = -i e^{i chi} sqrt(n_seed)."""
    alpha = -1j * np.exp(1j * chi) * math.sqrt(n_seed)
    c = coherent_amplitudes(alpha, cutoff)
    psi = np.outer(c, c)
    out = np.zeros_like(psi)
    for d in range(-(cutoff - 1), cutoff):
        # diagonal n_a - n_b = d: indices (m + max(d,0), m + max(-d,0))
        start_a, start_b = max(d, 0), max(-d, 0)
        length = cutoff - abs(d)
        ia = np.arange(length) + start_a
        ib = np.arange(length) + start_b
        vec = psi[ia, ib]
        if np.vdot(vec, vec).real < 1e-20:
            continue
        # <n+1, m+1| a^dag b^dag |n, m> = sqrt((n+1)(m+1))
        off = np.sqrt((ia[:-1] + 1.0) * (ib[:-1] + 1.0))
        evals, evecs = eigh_tridiagonal(np.zeros(length), off)
        out[ia, ib] = evecs @ (np.exp(1j * r * evals) * (evecs.T @ vec))
    return out


def tail_weight(psi: np.ndarray, margin: int = 8) -> float:
    """Probability within ``margin`` of either truncation edge."""
    p = np.abs(psi) ** 2
    return float(p[-margin:, :].sum() + p[:, -margin:].sum())


def moments(psi: np.ndarray) -> dict:
    """<N_a>, <N_b>, <J_x>, <J_y>, <J_z>, Var(J_z) of a two-mode state."""
    p = np.abs(psi) ** 2
    norm = p.sum()
    n = np.arange(psi.shape[0])[:, None]
    m = np.arange(psi.shape[1])[None, :]
    na = float((p * n).sum() / norm)
    nb = float((p * m).sum() / norm)
    jz_vals = 0.5 * (n - m)
    jz = float((p * jz_vals).sum() / norm)
    jz2 = float((p * jz_vals**2).sum() / norm)
    # <a^dag b> = sum psi*[n+1, m-1] sqrt(n+1) sqrt(m) psi[n, m]
    adb = np.sum(np.conj(psi[1:, :-1]) * np.sqrt(n[:-1] + 1.0) * np.sqrt(m[:, 1:]) * psi[:-1, 1:]) / norm
    return {
        "n_plus": na,
        "n_minus": nb,
        "jx": float(adb.real),
        "jy": float(adb.imag),
        "jz": jz,
        "var_jz": jz2 - jz**2,
    }


def cutoff_for(r: float, n_seed: float) -> int:
    """Basis size with a negligible truncated tail for the given squeeze and seed."""
    mean = math.sinh(r) ** 2 + math.exp(2 * r) * n_seed
    vac = math.sinh(r) ** 2
    spread = math.sqrt(mean * math.exp(2 * r) + vac * (vac + 1))
    return int(mean + 12 * spread + 40)
