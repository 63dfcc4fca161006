"""Finite-resolution phase-estimation model of estimation-first qPCA.

Each eigenvalue is mapped to the phase ``lambda * t / (2 pi)`` and rounded to
the nearest of ``2**m`` bins. This is a deterministic rounding model, not a
simulation of the full QPE outcome distribution: it keeps exactly the
mechanism that matters here, namely that eigenvalues below half a bin are
indistinguishable from zero and eigenvalues within one bin of each other are
indistinguishable from one another.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import QpeConfigurationError
from .spectral import Spectrum

MODEL_CAVEAT = (
    "deterministic nearest-bin rounding model of phase estimation; "
    "not a circuit-level simulation"
)


@dataclass(frozen=True)
class QpeConfig:
    phase_bits: int
    evolution_time: float = 2.0 * math.pi

    def __post_init__(self):
        if int(self.phase_bits) != self.phase_bits or self.phase_bits < 1:
            raise QpeConfigurationError("phase_bits must be an integer >= 1")
        if not (self.evolution_time > 0 and math.isfinite(self.evolution_time)):
            raise QpeConfigurationError("evolution_time must be positive and finite")

    @property
    def n_bins(self) -> int:
        return 2**self.phase_bits

    @property
    def phase_per_eigenvalue(self) -> float:
        # exactly 1.0 for the default t = 2 pi
        return self.evolution_time / (2.0 * math.pi)

    @property
    def max_eigenvalue(self) -> float:
        """Largest eigenvalue that does not wrap around the unit phase circle."""
        return (1.0 - 2.0**-self.phase_bits) / self.phase_per_eigenvalue


@dataclass(frozen=True, eq=False)
class QpeOutcome:
    eigenvalues: np.ndarray
    bins: np.ndarray
    estimates: np.ndarray
    resolved: np.ndarray
    top_identified: bool


def _eigenvalues(spectrum) -> np.ndarray:
    if isinstance(spectrum, Spectrum):
        return np.asarray(spectrum.eigenvalues, dtype=float)
    lam = np.asarray(spectrum, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise QpeConfigurationError("eigenvalues must be a non-empty 1-d sequence")
    return np.sort(lam)[::-1]


def phase_bins(eigenvalues: np.ndarray, cfg: QpeConfig) -> np.ndarray:
    """Nearest-bin rounding, ties away from zero, except that a phase lying
    exactly on the first half-bin boundary falls to bin 0."""
    x = eigenvalues * cfg.phase_per_eigenvalue * cfg.n_bins
    bins = np.floor(x + 0.5).astype(np.int64)
    bins[x == 0.5] = 0
    return bins


def qpe_estimate(spectrum: Union[Spectrum, Sequence[float]], cfg: QpeConfig) -> QpeOutcome:
    lam = _eigenvalues(spectrum)
    if lam[0] > cfg.max_eigenvalue:
        raise QpeConfigurationError(
            f"lambda_max={lam[0]:.6g} wraps around: need lambda_max * t/(2 pi) <= 1 - 2^-{cfg.phase_bits}"
        )
    half_bin = 0.5 / (cfg.n_bins * cfg.phase_per_eigenvalue)
    if lam[-1] < -half_bin:
        raise QpeConfigurationError(f"negative eigenvalue {lam[-1]:.6g} wraps around the phase circle")

    bins = phase_bins(lam, cfg)
    estimates = bins / cfg.n_bins / cfg.phase_per_eigenvalue
    distinct = lam[:, None] != lam[None, :]
    collide = (bins[:, None] == bins[None, :]) & distinct
    resolved = (bins != 0) & ~collide.any(axis=1)
    below = lam < lam[0]
    top = bool(resolved[0] and np.all(bins[0] > bins[below]))
    return QpeOutcome(lam, bins, estimates, resolved, top)


def resolution_floor(cfg: QpeConfig) -> float:
    """Eigenvalue at the half-bin boundary; anything at or below it reads as zero."""
    return 2.0 ** -(cfg.phase_bits + 1) / cfg.phase_per_eigenvalue


def qpe_success_over_scaling(
    base: Union[Spectrum, Sequence[float]], alphas: Sequence[float], cfg: QpeConfig
) -> list[tuple[float, bool]]:
    lam = _eigenvalues(base)
    out = []
    for alpha in alphas:
        if not alpha > 0:
            raise QpeConfigurationError(f"scaling factors must be positive, got {alpha}")
        out.append((float(alpha), qpe_estimate(alpha * lam, cfg).top_identified))
    return out
