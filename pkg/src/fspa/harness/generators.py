"""Synthetic operators, perturbations, initial states and labelled datasets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..encoding import DataMatrix
from ..errors import ConfigError
from ..spectral import HermitianOperator, SubspaceProjector, as_operator, normalize


def rng_for(seed, *index) -> np.random.Generator:
    """Independent stream for grid point ``index`` of a run seeded with ``seed``.

    ``seed`` may itself be a tuple of integers, so ``rng_for((s, i))`` and
    ``rng_for(s, i)`` give the same stream.
    """
    if isinstance(seed, np.random.Generator):
        if index:
            raise ValueError("cannot derive an indexed stream from a Generator")
        return seed
    head = [int(x) for x in seed] if isinstance(seed, (tuple, list)) else [int(seed)]
    return np.random.default_rng(head + [int(i) for i in index])


@dataclass(frozen=True)
class SpectrumSpec:
    """Either explicit ``eigenvalues`` or the family
    ``(top,)*degeneracy + (top*r, top*r*q, top*r*q^2, ...)`` with ``q = tail_decay``.
    """

    dim: Optional[int] = None
    eigenvalues: Optional[tuple] = None
    ratio: Optional[float] = None
    top: float = 1.0
    tail_decay: float = 1.0
    degeneracy: int = 1
    conjugate: bool = False

    def values(self) -> np.ndarray:
        if self.eigenvalues is not None:
            lam = np.asarray(self.eigenvalues, dtype=float)
            if self.dim is not None and self.dim != lam.size:
                raise ConfigError(f"dim={self.dim} but {lam.size} eigenvalues given")
        else:
            if self.dim is None or self.ratio is None:
                raise ConfigError("spectrum needs explicit eigenvalues or dim and ratio")
            if not 0 <= self.ratio <= 1 or not 0 < self.tail_decay <= 1:
                raise ConfigError("ratio must lie in [0, 1] and tail_decay in (0, 1]")
            R = self.degeneracy
            if not 1 <= R <= self.dim:
                raise ConfigError("degeneracy must lie in 1..dim")
            tail = self.top * self.ratio * self.tail_decay ** np.arange(self.dim - R)
            lam = np.concatenate([np.full(R, float(self.top)), tail])
        if lam.size < 1 or np.any(lam < 0) or np.any(np.diff(lam) > 0):
            raise ConfigError("eigenvalues must be non-negative and descending")
        if self.degeneracy > 1 and np.any(lam[: self.degeneracy] != lam[0]):
            raise ConfigError("the first `degeneracy` eigenvalues must be equal")
        return lam


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Q from the QR factorization of a Gaussian matrix, with R's diagonal made positive."""
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    return Q * np.sign(np.diag(R))


def spectral_basis(spec: SpectrumSpec, seed) -> np.ndarray:
    """Eigenbasis used by ``gen_spectrum`` (columns ordered like ``spec.values()``)."""
    d = spec.values().size
    if not spec.conjugate:
        return np.eye(d)
    return random_orthogonal(d, rng_for(seed))


def gen_spectrum(spec: SpectrumSpec, seed=0) -> HermitianOperator:
    lam = spec.values()
    if not spec.conjugate:
        return HermitianOperator.diagonal(lam)
    Q = spectral_basis(spec, seed)
    return HermitianOperator((Q * lam) @ Q.T)


def warm_start(basis: np.ndarray, a1_sq: float) -> np.ndarray:
    """Unit state with ``|a_1|^2 = a1_sq`` on the first basis column and the rest
    spread evenly (positive amplitudes) over the remaining columns."""
    d = basis.shape[0]
    if not 0 <= a1_sq <= 1:
        raise ConfigError("initial overlap must lie in [0, 1]")
    if d == 1:
        coeffs = np.ones(1)
    else:
        coeffs = np.full(d, np.sqrt((1.0 - a1_sq) / (d - 1)))
        coeffs[0] = np.sqrt(a1_sq)
    return basis @ coeffs


def perturb_operator(
    H,
    strength: float,
    seed=0,
    mode: str = "symmetric_gaussian",
    subspace: Optional[SubspaceProjector] = None,
    direction=None,
) -> HermitianOperator:
    """Add a seeded perturbation of the given strength.

    ``symmetric_gaussian``: ``strength * |H|_2`` times a random symmetric matrix of
    unit spectral norm. ``psd_in_subspace``: ``strength * v v^T`` with ``v`` a unit
    vector inside ``subspace`` (seeded unless ``direction`` is given).
    """
    H = as_operator(H)
    if strength < 0:
        raise ValueError("strength must be >= 0")
    rng = rng_for(seed)
    if mode == "symmetric_gaussian":
        G = rng.standard_normal((H.dim, H.dim))
        S = (G + G.T) / 2.0
        S = S / np.max(np.abs(np.linalg.eigvalsh(S)))
        return HermitianOperator(H.matrix + strength * H.spectral_norm * S)
    if mode == "psd_in_subspace":
        if direction is not None:
            v = normalize(direction).amplitudes
        else:
            if subspace is None:
                raise ValueError("psd_in_subspace needs a subspace or an explicit direction")
            v = normalize(subspace.basis @ rng.standard_normal(subspace.rank)).amplitudes
        if subspace is not None and abs(np.dot(v, subspace.apply(v)) - 1.0) > 1e-10:
            raise ValueError("direction does not lie inside the given subspace")
        return HermitianOperator(H.matrix + strength * np.outer(v, v))
    raise ValueError(f"unknown perturbation mode {mode!r}")


def labelled_blobs(
    n_classes: int = 3,
    n_per_class: int = 60,
    dim: int = 8,
    separation: float = 8.0,
    seed=0,
) -> DataMatrix:
    """Isotropic unit-variance Gaussian clusters.

    Class c > 0 is centred at ``separation * (1 - 0.25 (c - 1)) * e_{c-1}``, class
    0 at the origin, so the between-class covariance has distinct leading
    eigenvalues well above the noise floor.
    """
    if n_classes < 2 or dim < n_classes - 1:
        raise ConfigError("need at least 2 classes and dim >= n_classes - 1")
    rng = rng_for(seed)
    centers = np.zeros((n_classes, dim))
    for c in range(1, n_classes):
        centers[c, c - 1] = separation * max(0.25, 1.0 - 0.25 * (c - 1))
    X = np.concatenate([centers[c] + rng.standard_normal((n_per_class, dim)) for c in range(n_classes)])
    y = np.repeat(np.arange(n_classes), n_per_class)
    return DataMatrix(X, y)
