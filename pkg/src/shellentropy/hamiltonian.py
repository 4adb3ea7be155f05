"""Dense sector Hamiltonian of the open spin-1/2 chain

    H = sum_i S_i . S_{i+1} + delta2 * sum_i Sz_i Sz_{i+2}

in units of the nearest-neighbour exchange.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spinbasis import SectorBasis, enumerate_sector

_HEADER = struct.Struct("<iidq")


@dataclass(frozen=True)
class CouplingParams:
    delta2: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.delta2):
            raise ValueError(f"delta2 must be finite, got {self.delta2}")

    @property
    def integrable(self) -> bool:
        return self.delta2 == 0.0


@dataclass(frozen=True, eq=False)
class SectorMatrix:
    basis: SectorBasis
    params: CouplingParams
    entries: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def diagonal_energies(configs: np.ndarray, n_sites: int, delta2: float) -> np.ndarray:
    """Ising part of H for each config."""
    configs = np.asarray(configs, dtype=np.int64)
    sz = ((configs[:, None] >> np.arange(n_sites)) & 1) - 0.5
    diag = np.zeros(len(configs))
    if n_sites >= 2:
        diag += np.sum(sz[:, :-1] * sz[:, 1:], axis=1)
    if n_sites >= 3 and delta2 != 0.0:
        diag += delta2 * np.sum(sz[:, :-2] * sz[:, 2:], axis=1)
    return diag


def build_sector_hamiltonian(basis: SectorBasis, params: CouplingParams) -> SectorMatrix:
    if len(basis) == 0:
        raise ValueError("empty sector basis")
    n = basis.n_sites
    configs = basis.configs
    h = np.zeros((len(configs), len(configs)))
    h[np.diag_indices_from(h)] = diagonal_energies(configs, n, params.delta2)
    rows = np.arange(len(configs))
    for i in range(n - 1):
        mask = np.int64(3 << i)
        pair = configs & mask
        hop = (pair != 0) & (pair != mask)
        r = rows[hop]
        c = basis.rank(configs[hop] ^ mask)
        upper = r < c
        r, c = r[upper], c[upper]
        h[r, c] = 0.5
        h[c, r] = 0.5
    h.setflags(write=False)
    return SectorMatrix(basis, params, h)


def sector_hamiltonians(n_sites: int, params: CouplingParams) -> list[SectorMatrix]:
    return [
        build_sector_hamiltonian(enumerate_sector(n_sites, k), params)
        for k in range(n_sites + 1)
    ]


def dump_matrix(matrix: SectorMatrix, path: str | Path) -> None:
    """Write the cache format: little-endian header then row-major doubles."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(matrix.basis.n_sites, matrix.basis.n_up,
                              float(matrix.params.delta2), matrix.dim))
        fh.write(np.ascontiguousarray(matrix.entries, dtype="<f8").tobytes())


def load_matrix(path: str | Path) -> SectorMatrix:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    n, n_up, delta2, dim = _HEADER.unpack_from(raw)
    body = raw[_HEADER.size:]
    if len(body) != 8 * dim * dim:
        raise ValueError(f"{path}: expected {dim}x{dim} doubles, got {len(body)} bytes")
    basis = enumerate_sector(n, n_up)
    if len(basis) != dim:
        raise ValueError(f"{path}: dimension {dim} does not match sector ({n}, {n_up})")
    entries = np.frombuffer(body, dtype="<f8").reshape(dim, dim).astype(float)
    entries.setflags(write=False)
    return SectorMatrix(basis, CouplingParams(delta2), entries)
