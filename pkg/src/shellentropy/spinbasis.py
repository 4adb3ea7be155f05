"""Spin-1/2 product configurations grouped by total magnetization.

A configuration is an N-bit integer; bit ``i`` set means site ``i + 1`` is up.
Subsystem 1 is the left block (sites ``1..l1``), i.e. the low ``l1`` bits, so
the amplitude of config ``a + b * 2**l1`` sits at row ``a``, column ``b`` of
the bipartite coefficient matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

MAX_SITES = 24


@dataclass(frozen=True)
class ChainGeometry:
    """Open chain of ``n`` sites cut after site ``l1``."""

    n: int
    l1: int

    def __post_init__(self):
        if not 2 <= self.n <= MAX_SITES:
            raise ValueError(f"site count must be in [2, {MAX_SITES}], got {self.n}")
        if not 1 <= self.l1 < self.n:
            raise ValueError(f"l1 must satisfy 1 <= l1 < N={self.n}, got {self.l1}")

    @property
    def l2(self) -> int:
        return self.n - self.l1

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def dim1(self) -> int:
        return 1 << self.l1

    @property
    def dim2(self) -> int:
        return 1 << self.l2

    def with_cut(self, l1: int) -> "ChainGeometry":
        return ChainGeometry(self.n, l1)


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """All configurations of ``n_sites`` spins with ``n_up`` up spins, ascending."""

    n_sites: int
    n_up: int
    configs: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.configs)

    def rank(self, config) -> np.ndarray | int:
        """Position of ``config`` (scalar or array) in the sector; -1 if absent."""
        cfg = np.asarray(config, dtype=np.int64)
        pos = np.searchsorted(self.configs, cfg)
        pos = np.minimum(pos, len(self.configs) - 1)
        found = self.configs[pos] == cfg
        out = np.where(found, pos, -1)
        return int(out) if out.ndim == 0 else out


def _site_count(geometry) -> int:
    return geometry.n if isinstance(geometry, ChainGeometry) else int(geometry)


def enumerate_sector(geometry: ChainGeometry | int, n_up: int) -> SectorBasis:
    """Enumerate the fixed-magnetization sector.

    ``geometry`` may be a :class:`ChainGeometry` or a bare site count; the
    latter is used for the isolated subsystem blocks of a product shell.
    """
    n = _site_count(geometry)
    if not 1 <= n <= MAX_SITES:
        raise ValueError(f"site count must be in [1, {MAX_SITES}], got {n}")
    if not 0 <= n_up <= n:
        raise ValueError(f"n_up must be in [0, {n}], got {n_up}")
    configs = np.fromiter(
        (sum(1 << i for i in sites) for sites in combinations(range(n), n_up)),
        dtype=np.int64,
        count=comb(n, n_up),
    )
    configs.sort()
    configs.setflags(write=False)
    return SectorBasis(n, n_up, configs)


def all_sectors(geometry: ChainGeometry | int) -> list[SectorBasis]:
    n = _site_count(geometry)
    return [enumerate_sector(n, k) for k in range(n + 1)]


def split_config(config, geometry: ChainGeometry):
    """Split configs into (subsystem-1 label, subsystem-2 label)."""
    cfg = np.asarray(config, dtype=np.int64)
    a = cfg & (geometry.dim1 - 1)
    b = cfg >> geometry.l1
    if cfg.ndim == 0:
        return int(a), int(b)
    return a, b


def join_config(a, b, geometry: ChainGeometry):
    """Inverse of :func:`split_config`."""
    out = np.asarray(a, dtype=np.int64) | (np.asarray(b, dtype=np.int64) << geometry.l1)
    return int(out) if out.ndim == 0 else out


def popcount(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    count = np.zeros_like(x)
    while np.any(x):
        count += x & 1
        x = x >> 1
    return count
