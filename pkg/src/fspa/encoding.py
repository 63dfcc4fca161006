"""Classical data to density operators.

Covariances use the 1/n divisor so that the second-moment matrix S and the
centered covariance C obey ``S = C + mu mu^T`` exactly. Amplitude encoding maps
each row to its direction; weighting the ensemble by squared row norms makes
the density matrix equal ``S / trace(S)``, which on centered data is
``C / trace(C)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import DataFormatError, EncodingError, NonFiniteError, ZeroVarianceError
from .spectral import HermitianOperator, eigendecompose

INTERLACING_TOL = 1e-10
WEIGHTINGS = ("norm_weighted", "uniform")


@dataclass(frozen=True, eq=False)
class DataMatrix:
    values: np.ndarray
    labels: Optional[np.ndarray] = None
    feature_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        X = np.asarray(self.values, dtype=float)
        if X.ndim != 2:
            raise DataFormatError(f"data must be 2-d, got shape {X.shape}")
        if X.shape[0] < 2 or X.shape[1] < 1:
            raise DataFormatError(f"need at least 2 samples and 1 feature, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise NonFiniteError("data contains non-finite values")
        X = X.copy()
        X.setflags(write=False)
        object.__setattr__(self, "values", X)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (X.shape[0],):
                raise DataFormatError(f"{y.shape[0]} labels for {X.shape[0]} samples")
            y = y.astype(np.int64)
            y.setflags(write=False)
            object.__setattr__(self, "labels", y)
        if self.feature_names is None:
            object.__setattr__(self, "feature_names", tuple(f"x{j}" for j in range(X.shape[1])))
        elif len(self.feature_names) != X.shape[1]:
            raise DataFormatError("feature_names length does not match the number of features")
        else:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.values.mean(axis=0)

    def subset(self, rows) -> "DataMatrix":
        return DataMatrix(
            self.values[rows],
            None if self.labels is None else self.labels[rows],
            self.feature_names,
        )

    def scaled(self, c: float) -> "DataMatrix":
        return replace(self, values=c * self.values)


def _parse_number(text: str, row: int, column: str) -> float:
    s = text.strip()
    if s == "":
        raise DataFormatError(f"row {row}, column {column!r}: missing value")
    try:
        v = float(s)
    except ValueError:
        raise DataFormatError(f"row {row}, column {column!r}: non-numeric value {s!r}") from None
    if not math.isfinite(v):
        raise DataFormatError(f"row {row}, column {column!r}: non-finite value {s!r}")
    return v


def load_csv(path: Union[str, Path], label_column: Optional[str] = None) -> DataMatrix:
    """Read a header-first, comma-separated numeric table.

    Rows are numbered from 1 for the first data line in error messages. The
    optional label column must hold integers.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if label_column is not None and label_column not in header:
            raise DataFormatError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column) if label_column is not None else None
        feature_idx = [j for j in range(len(header)) if j != label_idx]
        rows, labels = [], []
        for i, rec in enumerate(reader, start=1):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DataFormatError(f"{path}: row {i} has {len(rec)} fields, header has {len(header)}")
            rows.append([_parse_number(rec[j], i, header[j]) for j in feature_idx])
            if label_idx is not None:
                v = _parse_number(rec[label_idx], i, header[label_idx])
                if v != int(v):
                    raise DataFormatError(f"row {i}, column {label_column!r}: label {v} is not an integer")
                labels.append(int(v))
    if len(rows) < 2:
        raise DataFormatError(f"{path}: need at least 2 data rows")
    return DataMatrix(
        np.array(rows, dtype=float),
        np.array(labels, dtype=np.int64) if label_idx is not None else None,
        tuple(header[j] for j in feature_idx),
    )


def save_csv(X: DataMatrix, path: Union[str, Path], label_column: str = "label") -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = list(X.feature_names)
        if X.labels is not None:
            header.append(label_column)
        w.writerow(header)
        for i in range(X.n_samples):
            row = [repr(float(v)) for v in X.values[i]]
            if X.labels is not None:
                row.append(str(int(X.labels[i])))
            w.writerow(row)


def standardize(X: DataMatrix) -> DataMatrix:
    """Zero mean, unit sample standard deviation (ddof=1) per feature."""
    V = X.values
    mu = V.mean(axis=0)
    sd = V.std(axis=0, ddof=1)
    scale = np.maximum(1.0, np.max(np.abs(V), axis=0))
    flat = np.flatnonzero(sd <= 1e-12 * scale)
    if flat.size:
        raise ZeroVarianceError(X.feature_names[flat[0]])
    return replace(X, values=(V - mu) / sd)


def covariance(X: DataMatrix, centered: bool = True) -> HermitianOperator:
    V = X.values
    if centered:
        V = V - V.mean(axis=0)
    return HermitianOperator(V.T @ V / X.n_samples)


def ensemble_density(X: DataMatrix, weighting: str = "norm_weighted") -> HermitianOperator:
    """``rho = sum_i p_i psi_i psi_i^T`` over amplitude-encoded rows ``psi_i = x_i/|x_i|``.

    ``uniform`` uses ``p_i = 1/n``; ``norm_weighted`` uses ``p_i ~ |x_i|^2``.
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}, got {weighting!r}")
    V = X.values
    norms = np.linalg.norm(V, axis=1)
    zero = np.flatnonzero(norms < 1e-300)
    if zero.size:
        raise EncodingError(int(zero[0]))
    psi = V / norms[:, None]
    if weighting == "uniform":
        p = np.full(X.n_samples, 1.0 / X.n_samples)
    else:
        sq = norms**2
        p = sq / sq.sum()
    return HermitianOperator((psi.T * p) @ psi)


@dataclass(frozen=True, eq=False)
class InterlacingReport:
    centered: np.ndarray
    uncentered: np.ndarray
    upper_slack: np.ndarray  # nu_j - mu_j
    lower_slack: np.ndarray  # mu_j - nu_{j+1}
    mean_norm_sq: float  # trace(S) - trace(C) = |mu|^2
    tolerance: float = INTERLACING_TOL
    passed: bool = field(init=False)

    def __post_init__(self):
        ok = bool(np.all(self.upper_slack >= -self.tolerance) and np.all(self.lower_slack >= -self.tolerance))
        object.__setattr__(self, "passed", ok)

    def lines(self) -> list[str]:
        out = [f"pass={'true' if self.passed else 'false'}", f"mean_norm_sq={self.mean_norm_sq:.12g}"]
        out.append("j,centered,uncentered,upper_slack,lower_slack")
        d = self.centered.size
        for j in range(d):
            lo = f"{self.lower_slack[j]:.12g}" if j < d - 1 else ""
            out.append(
                f"{j + 1},{self.centered[j]:.12g},{self.uncentered[j]:.12g},{self.upper_slack[j]:.12g},{lo}"
            )
        return out


def interlacing_check(X: DataMatrix, tol: float = INTERLACING_TOL) -> InterlacingReport:
    """Check ``nu_j >= mu_j >= nu_{j+1}`` between centered (mu) and uncentered (nu) spectra."""
    C = covariance(X, centered=True)
    S = covariance(X, centered=False)
    mu = eigendecompose(C).eigenvalues
    nu = eigendecompose(S).eigenvalues
    return InterlacingReport(
        centered=mu,
        uncentered=nu,
        upper_slack=nu - mu,
        lower_slack=mu[:-1] - nu[1:],
        mean_norm_sq=float(np.trace(S.matrix) - np.trace(C.matrix)),
        tolerance=tol,
    )
