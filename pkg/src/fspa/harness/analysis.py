"""Regression, deflation-based rank-k extraction and the nearest-centroid diagnostic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.model_selection import train_test_split
from sklearn.neighbors import NearestCentroid

from ..encoding import DataMatrix
from ..engine import RunTrace, fspa_run
from ..spectral import HermitianOperator, as_operator, normalize
from .generators import rng_for


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float


def fit_linear(x, y) -> LinearFit:
    """Ordinary least squares ``y ~ slope * x + intercept``.

    R^2 is taken as 1 when the residuals vanish, including constant ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if np.unique(x).size < 2:
        raise ValueError("need at least two distinct x values")
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    slope = float(np.dot(dx, dy) / np.dot(dx, dx))
    intercept = float(ym - slope * xm)
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.dot(dy, dy))
    if ss_res == 0.0 or ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return LinearFit(slope, intercept, r2)


def unit_norm_operator(H) -> tuple[HermitianOperator, float]:
    """Rescale by ``1/|H|_2`` when ``|H|_2 > 1``; returns the operator and the factor used."""
    H = as_operator(H)
    norm = H.spectral_norm
    if norm <= 1.0:
        return H, 1.0
    return H.scaled(1.0 / norm), 1.0 / norm


def deflate(H: HermitianOperator, v: np.ndarray) -> HermitianOperator:
    """``(I - v v^T) H (I - v v^T)``."""
    A = H.matrix
    Av = A @ v
    vAv = float(v @ Av)
    return HermitianOperator(A - np.outer(v, Av) - np.outer(Av, v) + vAv * np.outer(v, v))


def fspa_top_k(rho, k: int, rounds: int, seed=0) -> tuple[np.ndarray, list[RunTrace]]:
    """Leading ``k`` directions by FSPA with deflation between runs.

    Each run starts from a seeded Gaussian vector that depends only on ``seed``
    and the run index, so rescaled operators see identical starting states.
    """
    H, _ = unit_norm_operator(rho)
    if not 1 <= k <= H.dim:
        raise ValueError(f"k={k} out of range 1..{H.dim}")
    basis, traces = [], []
    for i in range(k):
        phi0 = normalize(rng_for(seed, i).standard_normal(H.dim))
        trace = fspa_run(H, phi0, rounds)
        v = trace.states[-1]
        basis.append(v)
        traces.append(trace)
        H = deflate(H, v)
    return np.column_stack(basis), traces


def stratified_split(X: DataMatrix, test_fraction: float, seed) -> tuple[np.ndarray, np.ndarray]:
    if X.labels is None:
        raise ValueError("dataset has no labels")
    idx = np.arange(X.n_samples)
    train, test = train_test_split(
        idx, test_size=test_fraction, stratify=X.labels, random_state=int(seed) % 2**32
    )
    return np.sort(train), np.sort(test)


def nearest_centroid_predict(train_features, train_labels, test_features) -> np.ndarray:
    clf = NearestCentroid()
    clf.fit(train_features, train_labels)
    return clf.predict(test_features)
