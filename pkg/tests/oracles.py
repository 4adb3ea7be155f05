"""Brute-force reference implementations, deliberately independent of the package."""

from fractions import Fraction

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
# basis order |down>, |up>: bit value 1 = up
SZ = np.array([[-1, 0], [0, 1]], dtype=complex) / 2


def site_operator(op, site, n):
    """``op`` on ``site`` (0-indexed, = bit position) of an n-site chain."""
    out = np.eye(1, dtype=complex)
    for s in reversed(range(n)):
        out = np.kron(out, op if s == site else np.eye(2))
    return out


def full_hamiltonian(n, delta2):
    dim = 2 ** n
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(n - 1):
        for op in (SX, SY, SZ):
            h += site_operator(op, i, n) @ site_operator(op, i + 1, n)
    for i in range(n - 2):
        h += delta2 * site_operator(SZ, i, n) @ site_operator(SZ, i + 2, n)
    assert np.allclose(h.imag, 0)
    return h.real


def explicit_rdm_entropy(state, n, l1):
    """Form rho_1 by an explicit partial trace over the high bits, then diagonalize."""
    d1 = 2 ** l1
    rho = np.zeros((d1, d1), dtype=complex)
    for idx, amp in enumerate(state):
        for jdx, bmp in enumerate(state):
            if idx >> l1 == jdx >> l1:
                rho[idx % d1, jdx % d1] += amp * np.conj(bmp)
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-14]
    return float(-np.sum(p * np.log(p)))


def explicit_rdm_entropy_fast(state, n, l1):
    d1 = 2 ** l1
    psi = np.asarray(state).reshape(2 ** (n - l1), d1)
    rho = psi.T @ psi.conj()
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-14]
    return float(-np.sum(p * np.log(p)))


def page_sum_exact(d1, d2):
    """Page's finite sum in rational arithmetic."""
    if d1 > d2:
        d1, d2 = d2, d1
    total = sum(Fraction(1, k) for k in range(d2 + 1, d1 * d2 + 1))
    return total - Fraction(d1 - 1, 2 * d2)
