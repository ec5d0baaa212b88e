"""Shared test utilities: random unitaries, random safe states, brute-force oracles."""

import numpy as np


def haar_unitary(rng, n):
    """Haar-distributed n x n unitary from the QR of a complex Gaussian."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def special_unitary(rng, n):
    """Haar-like unitary rescaled to determinant one."""
    u = haar_unitary(rng, n)
    det = np.linalg.det(u)
    return u * det ** (-1.0 / n)


def random_safe_state(rng, basis, max_len):
    """Random normalized amplitude vector supported on words of length <= max_len."""
    amps = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    amps[basis.lengths > max_len] = 0.0
    return amps / np.linalg.norm(amps)


def random_safe_psd(rng, basis, max_len, rank=3):
    """Random PSD matrix supported (rows and columns) on words of length <= max_len."""
    mask = basis.lengths <= max_len
    b = rng.normal(size=(basis.dim, rank)) + 1j * rng.normal(size=(basis.dim, rank))
    b[~mask, :] = 0.0
    return b @ b.conj().T


def kraus_oracle(mats, rho):
    """Naive quadruple-loop evaluation of sum_k K rho adjoint(K)."""
    dim = rho.shape[0]
    out = np.zeros_like(rho, dtype=complex)
    for K in mats:
        for r in range(dim):
            for c in range(dim):
                acc = 0.0 + 0.0j
                for a in range(dim):
                    for b in range(dim):
                        acc += K[r, a] * rho[a, b] * np.conj(K[c, b])
                out[r, c] += acc
    return out
