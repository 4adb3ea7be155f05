"""Least-squares fits and the derived scaling quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError
from .shell import EnergyShell, ShellAverage, eigenstate_shell_average
from .spectral import DosEstimate
from .spinbasis import ChainGeometry


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float
    n_points: int
    resid_std: float
    members: tuple[int, ...] = ()


def ols_fit(x, y) -> LinearFit:
    """Ordinary least squares of y on x. R^2 is 1 when y is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError(f"x and y must be 1-D of equal length, got {x.shape} and {y.shape}")
    n = len(x)
    if n < 2:
        raise DomainError(f"need at least 2 points, got {n}")
    xm, ym = math.fsum(x) / n, math.fsum(y) / n
    dx, dy = x - xm, y - ym
    sxx = math.fsum(dx * dx)
    if sxx == 0.0:
        raise DomainError("all x values are equal; slope undefined")
    slope = math.fsum(dx * dy) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = math.fsum(resid * resid)
    ss_tot = math.fsum(dy * dy)
    r2 = 1.0 if ss_tot == 0.0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    resid_std = math.sqrt(ss_res / (n - 2)) if n > 2 else 0.0
    return LinearFit(slope, intercept, r2, n, resid_std)


def half_windows(dos: DosEstimate, half: str) -> list[int]:
    """Window ids on one side of the peak-DOS window (the peak belongs to both)."""
    p = dos.peak
    if half == "left":
        return list(range(0, p + 1))
    if half == "right":
        return list(range(p, len(dos)))
    if half == "both":
        return list(range(len(dos)))
    raise DomainError(f"half must be 'left', 'right' or 'both', got {half!r}")


def fit_entropy_vs_lndos(dos: DosEstimate, averages: Sequence[ShellAverage | float],
                         half: str = "both") -> LinearFit:
    """Fit the per-window mean entropy against ln(dos) on one spectrum half."""
    if len(averages) != len(dos):
        raise DomainError(f"{len(averages)} averages for {len(dos)} windows")
    ids = half_windows(dos, half)
    if len(ids) < 3:
        raise DomainError(f"{half} half has {len(ids)} windows; need >= 3")
    means = np.array([a.mean if isinstance(a, ShellAverage) else float(a) for a in averages])
    fit = ols_fit(dos.ln_dos[ids], means[ids])
    return LinearFit(fit.slope, fit.intercept, fit.r2, fit.n_points, fit.resid_std, tuple(ids))


@dataclass(frozen=True)
class GammaEstimate:
    gamma_measured: float
    gamma_predicted: float
    eta_measured: float
    center: float
    width: float
    d_e: int


def estimate_gamma(average: ShellAverage, shell: EnergyShell, geometry: ChainGeometry) -> GammaEstimate:
    """Exponent of d1 = D1**gamma: measured S1 / ln D1 against ln d_E / ln D."""
    ln_d1 = geometry.l1 * math.log(2.0)
    return GammaEstimate(
        gamma_measured=average.mean / ln_d1,
        gamma_predicted=math.log(shell.d_e) / (geometry.n * math.log(2.0)),
        eta_measured=math.exp(average.mean / geometry.l1),
        center=shell.center,
        width=shell.width,
        d_e=shell.d_e,
    )


@dataclass(frozen=True)
class VolumeLawScan:
    l1: tuple[int, ...]
    averages: tuple[ShellAverage, ...] = field(repr=False)
    fit: LinearFit

    @property
    def means(self) -> np.ndarray:
        return np.array([a.mean for a in self.averages])


def volume_law_scan(shell: EnergyShell, decomps, n_sites: int,
                    l1_range: Sequence[int]) -> VolumeLawScan:
    """Eigenstate shell averages over several cuts of one fixed shell."""
    l1s = sorted(set(int(l) for l in l1_range))
    if len(l1s) < 2:
        raise DomainError(f"volume-law fit needs >= 2 cuts, got {l1s}")
    if l1s[0] < 1 or l1s[-1] > n_sites // 2:
        raise DomainError(f"cuts must lie in [1, {n_sites // 2}], got {l1s}")
    averages = tuple(
        eigenstate_shell_average(shell, decomps, ChainGeometry(n_sites, l)) for l in l1s
    )
    fit = ols_fit(l1s, [a.mean for a in averages])
    return VolumeLawScan(tuple(l1s), averages, fit)
