"""On-disk cache of sector eigendecompositions.

One directory per (N, delta2); eigenvectors are stored as ``.npy`` and
memory-mapped on load so that N = 16 runs need not hold every sector in RAM.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .hamiltonian import CouplingParams, build_sector_hamiltonian
from .spectral import SpectralDecomposition, diagonalize
from .spinbasis import enumerate_sector

ENV_VAR = "SHELLENTROPY_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else Path.home() / ".cache" / "shellentropy"


def cache_key(n_sites: int, delta2: float) -> str:
    digest = hashlib.sha256(f"{n_sites}:{float(delta2).hex()}".encode()).hexdigest()[:16]
    return f"N{n_sites}-{digest}"


def _save(path: Path, arr: np.ndarray) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.save(fh, arr)
    os.replace(tmp, path)


def load_or_solve(n_sites: int, params: CouplingParams, cache_dir: str | Path | None,
                  tol: float | None = None) -> list[SpectralDecomposition]:
    """All sector decompositions, read from ``cache_dir`` when present.

    With ``cache_dir=None`` everything is computed and kept in memory.
    """
    if cache_dir is None:
        from .spectral import solve_chain
        return solve_chain(n_sites, params, tol)
    root = Path(cache_dir) / cache_key(n_sites, params.delta2)
    root.mkdir(parents=True, exist_ok=True)
    meta = root / "meta.json"
    if not meta.exists():
        meta.write_text(json.dumps({"N": n_sites, "delta2": params.delta2}) + "\n")
    out = []
    for k in range(n_sites + 1):
        basis = enumerate_sector(n_sites, k)
        f_val, f_vec = root / f"evals_{k}.npy", root / f"evecs_{k}.npy"
        if not (f_val.exists() and f_vec.exists()):
            dec = diagonalize(build_sector_hamiltonian(basis, params), tol)
            _save(f_vec, dec.eigenvectors)
            _save(f_val, dec.eigenvalues)
            del dec
        evals = np.load(f_val)
        evecs = np.load(f_vec, mmap_mode="r")
        if evals.shape != (len(basis),) or evecs.shape != (len(basis), len(basis)):
            raise ValueError(f"corrupt cache entry {root} sector {k}")
        evals.setflags(write=False)
        out.append(SpectralDecomposition(basis, params, evals, evecs))
    return out
