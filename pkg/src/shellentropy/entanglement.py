"""Schmidt spectra, von Neumann entropy and the Page average."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .spinbasis import ChainGeometry, SectorBasis, enumerate_sector, popcount, split_config

CLAMP = 1e-12
_MAX_PAGE_TERMS = 1 << 31
_CHUNK = 256


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """Amplitudes psi[a, b] of sum_ab psi[a, b] |a> (x) |b>."""

    geometry: ChainGeometry
    entries: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    probabilities: np.ndarray

    def __len__(self) -> int:
        return len(self.probabilities)


def _check_norm(vec: np.ndarray, atol: float = 1e-10) -> None:
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > atol:
        raise DomainError(f"state is not normalized (|psi| = {norm:.12g})")


def coefficient_matrix(state, basis: SectorBasis, geometry: ChainGeometry) -> CoefficientMatrix:
    """Scatter a sector state into the dense D1 x D2 coefficient matrix."""
    state = np.asarray(state)
    if basis.n_sites != geometry.n:
        raise DomainError(f"basis has {basis.n_sites} sites, geometry {geometry.n}")
    if state.shape != (len(basis),):
        raise DomainError(f"state of shape {state.shape} does not match sector dimension {len(basis)}")
    _check_norm(state)
    a, b = split_config(basis.configs, geometry)
    psi = np.zeros((geometry.dim1, geometry.dim2), dtype=state.dtype)
    psi[a, b] = state
    return CoefficientMatrix(geometry, psi)


def full_coefficient_matrix(state, geometry: ChainGeometry) -> CoefficientMatrix:
    """Coefficient matrix of a state given on the full 2**N product basis."""
    state = np.asarray(state)
    if state.shape != (geometry.dim,):
        raise DomainError(f"state of shape {state.shape} is not on the 2^{geometry.n} space")
    _check_norm(state)
    # index = a + b * D1, so a C-order reshape yields psi[b, a]
    return CoefficientMatrix(geometry, state.reshape(geometry.dim2, geometry.dim1).T)


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.where(p < CLAMP, 0.0, p)


def schmidt_spectrum(matrix: CoefficientMatrix | np.ndarray) -> SchmidtSpectrum:
    psi = matrix.entries if isinstance(matrix, CoefficientMatrix) else np.asarray(matrix)
    _check_norm(psi.ravel())
    s = np.linalg.svd(psi, compute_uv=False)
    p = _clamp(s * s)
    p = np.sort(p)[::-1]
    return SchmidtSpectrum(p)


def _entropy_terms(p: np.ndarray) -> np.ndarray:
    # p may exceed 1 by rounding; such terms are clipped to 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, -p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return np.maximum(terms, 0.0)


def vn_entropy(spectrum: SchmidtSpectrum | np.ndarray) -> float:
    """Entropy in nats, with 0 ln 0 = 0."""
    p = spectrum.probabilities if isinstance(spectrum, SchmidtSpectrum) else np.asarray(spectrum, float)
    return float(math.fsum(_entropy_terms(p)))


def state_entropy(state, geometry: ChainGeometry, basis: SectorBasis | None = None) -> float:
    if basis is None:
        return vn_entropy(schmidt_spectrum(full_coefficient_matrix(state, geometry)))
    return vn_entropy(schmidt_spectrum(coefficient_matrix(state, basis, geometry)))


def batch_entropies(psi: np.ndarray) -> np.ndarray:
    """Entropies of a stack of (already normalized) coefficient matrices."""
    s = np.linalg.svd(psi, compute_uv=False)
    return _entropy_terms(_clamp(s * s)).sum(axis=-1)


class _SectorBlocks:
    """Index maps that block-diagonalize a sector's coefficient matrix.

    A config with k up spins in subsystem 1 only couples row labels of
    popcount k to column labels of popcount n_up - k, so the Schmidt
    spectrum is the union of the blocks' spectra.
    """

    def __init__(self, basis: SectorBasis, geometry: ChainGeometry):
        a, b = split_config(basis.configs, geometry)
        k = popcount(a)
        self.blocks = []
        for kk in np.unique(k):
            sel = np.flatnonzero(k == kk)
            rows = enumerate_sector(geometry.l1, int(kk))
            cols = enumerate_sector(geometry.l2, basis.n_up - int(kk))
            self.blocks.append((sel, rows.rank(a[sel]), cols.rank(b[sel]), len(rows), len(cols)))

    def entropies(self, vecs: np.ndarray) -> np.ndarray:
        nvec = vecs.shape[1]
        terms = np.zeros(nvec)
        for sel, r, c, nr, nc in self.blocks:
            for lo in range(0, nvec, _CHUNK):
                chunk = np.asarray(vecs[sel, lo:lo + _CHUNK])
                block = np.zeros((chunk.shape[1], nr, nc), dtype=chunk.dtype)
                block[:, r, c] = chunk.T
                if nr == 1 or nc == 1:
                    p = np.sum(np.abs(block) ** 2, axis=(1, 2))[:, None]
                else:
                    s = np.linalg.svd(block, compute_uv=False)
                    p = s * s
                terms[lo:lo + _CHUNK] += _entropy_terms(_clamp(p)).sum(axis=-1)
        return terms


def sector_entropies(decomp, geometry: ChainGeometry, columns=None) -> np.ndarray:
    """Subsystem-1 entropy of each eigenvector (or of the selected ``columns``)."""
    if decomp.basis is None or decomp.basis.n_sites != geometry.n:
        raise DomainError("decomposition does not belong to this geometry")
    vecs = decomp.eigenvectors if columns is None else decomp.eigenvectors[:, np.asarray(columns)]
    return _SectorBlocks(decomp.basis, geometry).entropies(vecs)


def page_average(d1: int, d2: int, mode: str = "exact") -> float:
    """Mean subsystem entropy of Haar-random pure states on a D1 x D2 space.

    ``exact`` evaluates sum_{k=D2+1}^{D1 D2} 1/k - (D1 - 1)/(2 D2) with the
    smaller factor as D1; ``asymptotic`` returns ln D1.
    """
    d1, d2 = int(d1), int(d2)
    if d1 < 1 or d2 < 1:
        raise DomainError(f"dimensions must be >= 1, got ({d1}, {d2})")
    if d1 > d2:
        d1, d2 = d2, d1
    if mode == "asymptotic":
        return math.log(d1)
    if mode != "exact":
        raise DomainError(f"unknown mode {mode!r}")
    if d1 * d2 > _MAX_PAGE_TERMS:
        raise DomainError(f"D1*D2 = {d1 * d2} exceeds the summable range")
    k = np.arange(d2 + 1, d1 * d2 + 1, dtype=np.float64)
    return math.fsum(np.concatenate([1.0 / k, [-(d1 - 1) / (2.0 * d2)]]))
