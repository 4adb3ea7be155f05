"""Sector eigendecompositions, the merged spectrum and equal-count DOS windows."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateWindowError, DomainError, NumericalError
from .hamiltonian import CouplingParams, SectorMatrix, build_sector_hamiltonian
from .spinbasis import SectorBasis, enumerate_sector


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    basis: SectorBasis | None
    params: CouplingParams | None
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def n_up(self) -> int:
        return -1 if self.basis is None else self.basis.n_up

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def _fix_signs(vecs: np.ndarray) -> None:
    # largest-magnitude component of each column made positive, in place
    if vecs.size == 0:
        return
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs *= signs


def diagonalize(matrix: SectorMatrix | np.ndarray, tol: float | None = None) -> SpectralDecomposition:
    """Full eigendecomposition of a real symmetric sector matrix.

    Eigenvector signs are fixed so that each column's largest-magnitude entry
    is positive. When ``tol`` is given, residuals ``|H v - lambda v|`` and the
    orthonormality defect are checked against it (relative to ``|H|_F``).
    """
    if isinstance(matrix, SectorMatrix):
        h, basis, params = matrix.entries, matrix.basis, matrix.params
        label = f"sector n_up={basis.n_up} of N={basis.n_sites}"
    else:
        h, basis, params = np.asarray(matrix, dtype=float), None, None
        label = "matrix"
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError(f"{label}: expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise DomainError(f"{label}: non-finite entries")
    if not np.array_equal(h, h.T):
        raise DomainError(f"{label}: matrix is not symmetric")
    try:
        evals, evecs = scipy.linalg.eigh(h, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"{label}: eigensolver failed ({exc})") from exc
    _fix_signs(evecs)
    if tol is not None:
        scale = max(np.linalg.norm(h), 1.0)
        resid = np.max(np.linalg.norm(h @ evecs - evecs * evals, axis=0), initial=0.0)
        ortho = np.max(np.abs(evecs.T @ evecs - np.eye(len(evals))), initial=0.0)
        if resid > tol * scale or ortho > max(tol, 1e-10):
            raise NumericalError(f"{label}: residual {resid:.3g}, orthonormality defect {ortho:.3g}")
    evals.setflags(write=False)
    evecs.setflags(write=False)
    return SpectralDecomposition(basis, params, evals, evecs)


def solve_chain(n_sites: int, params: CouplingParams, tol: float | None = None) -> list[SpectralDecomposition]:
    """Diagonalize every magnetization sector of an ``n_sites`` chain."""
    return [
        diagonalize(build_sector_hamiltonian(enumerate_sector(n_sites, k), params), tol)
        for k in range(n_sites + 1)
    ]


@dataclass(frozen=True, eq=False)
class GlobalSpectrum:
    """Merged spectrum; row ``j`` is eigenvector ``index[j]`` of sector ``n_up[j]``."""

    energies: np.ndarray = field(repr=False)
    n_up: np.ndarray = field(repr=False)
    index: np.ndarray = field(repr=False)
    n_sites: int | None = None
    delta2: float | None = None

    def __len__(self) -> int:
        return len(self.energies)


def merge_spectra(decomps: Sequence[SpectralDecomposition]) -> GlobalSpectrum:
    if not decomps:
        raise DomainError("no spectra to merge")
    sites = {d.basis.n_sites for d in decomps if d.basis is not None}
    deltas = {d.params.delta2 for d in decomps if d.params is not None}
    if len(sites) > 1 or len(deltas) > 1:
        raise DomainError(f"cannot merge spectra with mixed parameters: N={sites}, delta2={deltas}")
    energies = np.concatenate([d.eigenvalues for d in decomps])
    n_up = np.concatenate([
        np.full(d.dim, d.n_up if d.basis is not None else pos) for pos, d in enumerate(decomps)
    ])
    index = np.concatenate([np.arange(d.dim) for d in decomps])
    order = np.lexsort((index, n_up, energies))
    return GlobalSpectrum(
        energies[order], n_up[order], index[order],
        sites.pop() if sites else None,
        deltas.pop() if deltas else None,
    )


@dataclass(frozen=True)
class DosWindow:
    center: float
    width: float
    count: int
    dos: float
    start: int
    stop: int

    @property
    def ln_dos(self) -> float:
        return float(np.log(self.dos))


@dataclass(frozen=True)
class DosEstimate:
    windows: tuple[DosWindow, ...]
    window_count: int
    edge_trim: float
    trimmed: int

    def __len__(self) -> int:
        return len(self.windows)

    @property
    def centers(self) -> np.ndarray:
        return np.array([w.center for w in self.windows])

    @property
    def ln_dos(self) -> np.ndarray:
        return np.array([w.ln_dos for w in self.windows])

    @property
    def peak(self) -> int:
        return int(np.argmax([w.dos for w in self.windows]))

    @property
    def central(self) -> int:
        return len(self.windows) // 2


def default_window_count(total_states: int) -> int:
    """max(20, states // 300), capped at one window per 8 states for tiny chains."""
    return max(2, min(max(20, total_states // 300), total_states // 8))


def estimate_dos(spectrum: GlobalSpectrum, window_count: int | None = None,
                 edge_trim: float = 0.02) -> DosEstimate:
    """Partition the trimmed spectrum into equal-count windows.

    ``edge_trim`` is the fraction of states dropped at each end. Within a
    window, width = last - first energy and dos = count / width.
    """
    total = len(spectrum)
    if window_count is None:
        window_count = default_window_count(total)
    if window_count < 2:
        raise DomainError(f"window_count must be >= 2, got {window_count}")
    if not 0.0 <= edge_trim < 0.5:
        raise DomainError(f"edge_trim must be in [0, 0.5), got {edge_trim}")
    cut = int(np.floor(edge_trim * total))
    lo, hi = cut, total - cut
    if hi - lo < 2 * window_count:
        raise DomainError(f"{hi - lo} retained states cannot fill {window_count} windows of >= 2 states")
    windows = []
    for k, idx in enumerate(np.array_split(np.arange(lo, hi), window_count)):
        e_first, e_last = spectrum.energies[idx[0]], spectrum.energies[idx[-1]]
        width = float(e_last - e_first)
        if width <= 0.0:
            raise DegenerateWindowError(
                f"window {k} ({len(idx)} states at E={e_first:.6g}) is fully degenerate")
        windows.append(DosWindow(float(0.5 * (e_first + e_last)), width, len(idx),
                                 len(idx) / width, int(idx[0]), int(idx[-1]) + 1))
    return DosEstimate(tuple(windows), window_count, edge_trim, 2 * cut)
