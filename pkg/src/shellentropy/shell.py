"""Energy shells and shell-averaged subsystem entropy.

Three estimators of the mean entropy over a shell are provided: the plain
average over the shell's eigenstates, a Monte-Carlo average over
Haar-random superpositions of them, and typical states built on the shell
of non-interacting product eigenstates of the two halves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .entanglement import batch_entropies, sector_entropies
from .errors import DomainError, EmptyShellError
from .hamiltonian import CouplingParams
from .spectral import DosEstimate, GlobalSpectrum, SpectralDecomposition, merge_spectra, solve_chain
from .spinbasis import ChainGeometry

_SAMPLE_CHUNK = 64


@dataclass(frozen=True)
class ByCenter:
    """Eigenstates with energy in (center - width/2, center + width/2]."""

    center: float
    width: float


@dataclass(frozen=True)
class ByWindow:
    dos: DosEstimate
    window: int


@dataclass(frozen=True)
class PeakDos:
    dos: DosEstimate


ShellPolicy = Union[ByCenter, ByWindow, PeakDos]


@dataclass(frozen=True, eq=False)
class EnergyShell:
    center: float
    width: float
    energies: np.ndarray = field(repr=False)
    n_up: np.ndarray = field(repr=False)
    index: np.ndarray = field(repr=False)
    n_sites: int | None = None

    @property
    def d_e(self) -> int:
        return len(self.energies)

    @property
    def interval(self) -> tuple[float, float]:
        return self.center - 0.5 * self.width, self.center + 0.5 * self.width

    def members(self) -> list[tuple[int, int]]:
        return list(zip(self.n_up.tolist(), self.index.tolist()))


@dataclass(frozen=True)
class ShellAverage:
    mean: float
    std: float
    count: int
    method: str
    samples: int | None = None
    seed: int | None = None


def _slice_shell(spectrum, lo_idx, hi_idx, center, width) -> EnergyShell:
    sl = slice(lo_idx, hi_idx)
    return EnergyShell(center, width, spectrum.energies[sl], spectrum.n_up[sl],
                       spectrum.index[sl], spectrum.n_sites)


def select_shell(spectrum: GlobalSpectrum, policy: ShellPolicy) -> EnergyShell:
    """Resolve a shell policy against the merged spectrum.

    Window policies take the window's member states directly, so every
    state of a DOS window (including its lowest one) belongs to its shell.
    """
    if isinstance(policy, PeakDos):
        policy = ByWindow(policy.dos, policy.dos.peak)
    if isinstance(policy, ByWindow):
        if not 0 <= policy.window < len(policy.dos):
            raise DomainError(f"window {policy.window} out of range [0, {len(policy.dos)})")
        w = policy.dos.windows[policy.window]
        if w.stop > len(spectrum):
            raise DomainError("DOS estimate does not belong to this spectrum")
        return _slice_shell(spectrum, w.start, w.stop, w.center, w.width)
    if isinstance(policy, ByCenter):
        if not policy.width > 0:
            raise DomainError(f"shell width must be positive, got {policy.width}")
        lo = policy.center - 0.5 * policy.width
        hi = policy.center + 0.5 * policy.width
        e = spectrum.energies
        i0 = int(np.searchsorted(e, lo, side="right"))
        i1 = int(np.searchsorted(e, hi, side="right"))
        if i1 <= i0:
            nearest = e[np.argmin(np.abs(e - policy.center))]
            raise EmptyShellError(
                f"no eigenstates in ({lo:.6g}, {hi:.6g}]; nearest eigenvalue is {nearest:.6g}, "
                f"e.g. shell ({nearest - 0.5 * policy.width:.6g}, {nearest + 0.5 * policy.width:.6g}]")
        return _slice_shell(spectrum, i0, i1, policy.center, policy.width)
    raise DomainError(f"unknown shell policy {policy!r}")


def _by_sector(decomps) -> Mapping[int, SpectralDecomposition]:
    if isinstance(decomps, Mapping):
        return decomps
    return {d.n_up: d for d in decomps}


def _summary(values: np.ndarray, method: str, samples=None, seed=None) -> ShellAverage:
    values = np.asarray(values, dtype=float)
    n = len(values)
    mean = math.fsum(values) / n
    std = math.sqrt(math.fsum((values - mean) ** 2) / (n - 1)) if n > 1 else 0.0
    return ShellAverage(mean, std, n, method, samples, seed)


def _check_geometry(shell: EnergyShell, geometry: ChainGeometry) -> None:
    if shell.n_sites is not None and shell.n_sites != geometry.n:
        raise DomainError(f"shell belongs to N={shell.n_sites}, geometry has N={geometry.n}")


def member_entropies(shell: EnergyShell, decomps, geometry: ChainGeometry) -> np.ndarray:
    """Entropy of each shell member, in shell order."""
    _check_geometry(shell, geometry)
    sectors = _by_sector(decomps)
    out = np.empty(shell.d_e)
    for k in np.unique(shell.n_up):
        if int(k) not in sectors:
            raise DomainError(f"no eigenvectors for sector n_up={k}")
        sel = np.flatnonzero(shell.n_up == k)
        out[sel] = sector_entropies(sectors[int(k)], geometry, shell.index[sel])
    return out


def eigenstate_shell_average(shell: EnergyShell, decomps, geometry: ChainGeometry) -> ShellAverage:
    return _summary(member_entropies(shell, decomps, geometry), "eigenstate")


def shell_vectors(shell: EnergyShell, decomps, geometry: ChainGeometry) -> np.ndarray:
    """Member eigenvectors embedded in the full 2**N space, one per column."""
    _check_geometry(shell, geometry)
    sectors = _by_sector(decomps)
    out = np.zeros((geometry.dim, shell.d_e))
    for k in np.unique(shell.n_up):
        if int(k) not in sectors:
            raise DomainError(f"no eigenvectors for sector n_up={k}")
        dec = sectors[int(k)]
        sel = np.flatnonzero(shell.n_up == k)
        out[np.ix_(dec.basis.configs, sel)] = np.asarray(dec.eigenvectors[:, shell.index[sel]])
    return out


def haar_coefficients(d: int, seed: int, sample: int) -> np.ndarray:
    """Uniform point on the unit sphere of C^d; stream keyed by (seed, sample)."""
    rng = np.random.default_rng([seed, sample])
    c = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return c / np.linalg.norm(c)


def haar_shell_average(shell: EnergyShell, decomps, geometry: ChainGeometry,
                       samples: int = 500, seed: int = 0) -> ShellAverage:
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    basis_vecs = shell_vectors(shell, decomps, geometry)
    values = np.empty(samples)
    for lo in range(0, samples, _SAMPLE_CHUNK):
        idx = range(lo, min(lo + _SAMPLE_CHUNK, samples))
        coeffs = np.stack([haar_coefficients(shell.d_e, seed, i) for i in idx], axis=1)
        states = basis_vecs @ coeffs
        psi = states.T.reshape(len(idx), geometry.dim2, geometry.dim1).transpose(0, 2, 1)
        values[lo:lo + len(idx)] = batch_entropies(psi)
    return _summary(values, "haar", samples, seed)


@dataclass(frozen=True, eq=False)
class ProductShell:
    """Product eigenstates |1,n> (x) |2,m> of the decoupled halves in a shell.

    ``d1`` and ``d2`` count distinct participating subsystem levels.
    """

    geometry: ChainGeometry
    interval: tuple[float, float]
    energies1: np.ndarray = field(repr=False)
    energies2: np.ndarray = field(repr=False)
    pairs: np.ndarray = field(repr=False)

    @property
    def center(self) -> float:
        return 0.5 * (self.interval[0] + self.interval[1])

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def target_energies(self) -> tuple[float, float]:
        g = self.geometry
        return g.l1 / g.n * self.center, g.l2 / g.n * self.center

    @property
    def d1(self) -> int:
        return len(np.unique(self.pairs[:, 0]))

    @property
    def d2(self) -> int:
        return len(np.unique(self.pairs[:, 1]))

    def __len__(self) -> int:
        return len(self.pairs)


def block_spectrum(n_sites: int, params: CouplingParams) -> np.ndarray:
    """All eigenvalues of an isolated ``n_sites`` block, ascending."""
    if n_sites == 1:
        return np.zeros(2)
    return merge_spectra(solve_chain(n_sites, params)).energies


def build_product_shell(geometry: ChainGeometry, params: CouplingParams,
                        interval: tuple[float, float],
                        spectra: tuple[np.ndarray, np.ndarray] | None = None) -> ProductShell:
    """Enumerate pairs (n, m) with E1[n] + E2[m] in ``(lo, hi]``.

    Coupling across the cut is dropped. ``spectra`` may supply precomputed
    subsystem spectra; by default both blocks are diagonalized here.
    """
    lo, hi = map(float, interval)
    if not hi > lo:
        raise DomainError(f"empty interval ({lo}, {hi}]")
    if spectra is None:
        e1, e2 = block_spectrum(geometry.l1, params), block_spectrum(geometry.l2, params)
    else:
        e1, e2 = (np.asarray(s, dtype=float) for s in spectra)
    total = e1[:, None] + e2[None, :]
    pairs = np.argwhere((total > lo) & (total <= hi))
    if len(pairs) == 0:
        raise EmptyShellError(f"no product states with energy in ({lo:.6g}, {hi:.6g}]")
    return ProductShell(geometry, (lo, hi), e1, e2, pairs)


def typical_product_state_average(pshell: ProductShell, samples: int = 500, seed: int = 0) -> ShellAverage:
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    rows, r = np.unique(pshell.pairs[:, 0], return_inverse=True)
    cols, c = np.unique(pshell.pairs[:, 1], return_inverse=True)
    values = np.empty(samples)
    for lo in range(0, samples, _SAMPLE_CHUNK):
        idx = range(lo, min(lo + _SAMPLE_CHUNK, samples))
        psi = np.zeros((len(idx), len(rows), len(cols)), dtype=complex)
        for j, i in enumerate(idx):
            psi[j, r, c] = haar_coefficients(len(pshell), seed, i)
        values[lo:lo + len(idx)] = batch_entropies(psi)
    return _summary(values, "product", samples, seed)


def spectrum_entropies(spectrum: GlobalSpectrum, decomps, geometry: ChainGeometry) -> np.ndarray:
    """Entropy of every eigenstate, aligned with the merged spectrum."""
    sectors = _by_sector(decomps)
    out = np.empty(len(spectrum))
    for k in np.unique(spectrum.n_up):
        sel = np.flatnonzero(spectrum.n_up == k)
        ent = sector_entropies(sectors[int(k)], geometry)
        out[sel] = ent[spectrum.index[sel]]
    return out


def window_averages(dos: DosEstimate, entropies: np.ndarray) -> list[ShellAverage]:
    """Eigenstate average of precomputed entropies over each DOS window."""
    return [_summary(entropies[w.start:w.stop], "eigenstate") for w in dos.windows]
