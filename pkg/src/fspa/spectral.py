"""Dense real-symmetric linear algebra: operators, states, spectra, projectors
and the overlap metrics used throughout the package.

Everything here is immutable once built. Arrays held by the value types are
flagged read-only so they can be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFiniteError,
    NotSymmetricError,
    ZeroVectorError,
)

SYMMETRY_TOL = 1e-12
UNIT_NORM_TOL = 1e-12
ORTHONORMAL_TOL = 1e-10
ZERO_NORM = 1e-300
# components below this magnitude are ignored by the sign convention
SIGN_EPS = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _as_vector(v) -> np.ndarray:
    if isinstance(v, StateVector):
        return v.amplitudes
    return np.asarray(v, dtype=float)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Real symmetric ``dim x dim`` matrix.

    Construction rejects non-finite entries and matrices whose asymmetry exceeds
    ``symmetry_tol * max(1, max|A|)``; accepted matrices are symmetrized by
    averaging with their transpose, so ``entries[i, j] == entries[j, i]`` holds
    exactly afterwards.
    """

    matrix: np.ndarray
    symmetry_tol: float = SYMMETRY_TOL

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionMismatch(f"operator must be square with dim >= 1, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("operator has non-finite entries")
        asym = np.max(np.abs(a - a.T))
        scale = max(1.0, float(np.max(np.abs(a))))
        if asym > self.symmetry_tol * scale:
            raise NotSymmetricError(f"operator is not symmetric (max |A - A^T| = {asym:.3e})")
        object.__setattr__(self, "matrix", _frozen((a + a.T) / 2.0))

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "HermitianOperator":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def scaled(self, c: float) -> "HermitianOperator":
        return HermitianOperator(c * self.matrix)

    def apply(self, v) -> np.ndarray:
        v = _as_vector(v)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"vector of length {v.shape} applied to dim {self.dim} operator")
        return self.matrix @ v

    @cached_property
    def spectrum(self) -> "Spectrum":
        return eigendecompose(self)

    @property
    def spectral_norm(self) -> float:
        return float(np.max(np.abs(self.spectrum.eigenvalues)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm real vector (checked to ``UNIT_NORM_TOL``)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=float)
        if a.ndim != 1 or a.size < 1:
            raise DimensionMismatch(f"state must be a non-empty 1-d vector, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("state has non-finite amplitudes")
        n = np.linalg.norm(a)
        if abs(n - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"state is not unit norm (|v| = {n!r}); use normalize()")
        object.__setattr__(self, "amplitudes", _frozen(a))

    @classmethod
    def basis(cls, dim: int, j: int) -> "StateVector":
        e = np.zeros(dim)
        e[j] = 1.0
        return cls(e)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"StateVector({np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in descending order with column-matched orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        V = np.asarray(self.eigenvectors, dtype=float)
        if V.ndim != 2 or V.shape != (w.size, w.size):
            raise DimensionMismatch("eigenvector matrix must be dim x dim matching eigenvalues")
        if np.any(np.diff(w) > 0):
            raise ValueError("eigenvalues must be in descending order")
        err = np.max(np.abs(V.T @ V - np.eye(w.size)))
        if err > ORTHONORMAL_TOL:
            raise ValueError(f"eigenvectors not orthonormal (max error {err:.3e})")
        object.__setattr__(self, "eigenvalues", _frozen(w))
        object.__setattr__(self, "eigenvectors", _frozen(V))

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def vector(self, j: int) -> StateVector:
        return StateVector(self.eigenvectors[:, j])

    def coefficients(self, phi) -> np.ndarray:
        """Expansion coefficients ``a_j = <psi_j|phi>``."""
        return self.eigenvectors.T @ _as_vector(phi)

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T

    def scaled(self, c: float) -> "Spectrum":
        if c <= 0:
            raise ValueError("scale must be positive")
        return Spectrum(c * self.eigenvalues, self.eigenvectors)


@dataclass(frozen=True, eq=False)
class SubspaceProjector:
    """Orthogonal projector given by an orthonormal basis (columns of ``basis``)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if B.ndim != 2 or B.shape[1] < 1 or B.shape[1] > B.shape[0]:
            raise DimensionMismatch(f"basis must be dim x R with 1 <= R <= dim, got {B.shape}")
        err = np.max(np.abs(B.T @ B - np.eye(B.shape[1])))
        if err > ORTHONORMAL_TOL:
            raise ValueError(f"projector basis not orthonormal (max error {err:.3e})")
        object.__setattr__(self, "basis", _frozen(B))

    @classmethod
    def span(cls, *vectors) -> "SubspaceProjector":
        """Projector onto the span of arbitrary (linearly independent) vectors."""
        A = np.column_stack([_as_vector(v) for v in vectors])
        Q, R = np.linalg.qr(A)
        if np.min(np.abs(np.diag(R))) < 1e-12 * max(1.0, np.max(np.abs(R))):
            raise ValueError("vectors are linearly dependent")
        return cls(Q)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def matrix(self) -> np.ndarray:
        return _frozen(self.basis @ self.basis.T)

    def apply(self, v) -> np.ndarray:
        return self.basis @ (self.basis.T @ _as_vector(v))


OperatorLike = Union[HermitianOperator, np.ndarray, Sequence[Sequence[float]]]


def as_operator(H: OperatorLike) -> HermitianOperator:
    return H if isinstance(H, HermitianOperator) else HermitianOperator(H)


def eigendecompose(H: OperatorLike) -> Spectrum:
    """Descending eigendecomposition with a deterministic eigenvector convention.

    Each eigenvector is signed so its first component with magnitude above
    ``SIGN_EPS`` is positive. Vectors sharing an exactly equal eigenvalue are then
    ordered lexicographically by their components, largest first.
    """
    H = as_operator(H)
    w, V = np.linalg.eigh(H.matrix)
    w = w[::-1].copy()
    V = V[:, ::-1].copy()

    for j in range(V.shape[1]):
        v = V[:, j]
        idx = np.flatnonzero(np.abs(v) > SIGN_EPS)
        if idx.size and v[idx[0]] < 0:
            V[:, j] = -v

    start = 0
    n = w.size
    while start < n:
        stop = start + 1
        while stop < n and w[stop] == w[start]:
            stop += 1
        if stop - start > 1:
            block = V[:, start:stop]
            # lexsort sorts by last key first; negate for descending order
            order = np.lexsort(tuple(-block[i] for i in reversed(range(block.shape[0]))))
            V[:, start:stop] = block[:, order]
        start = stop

    return Spectrum(w, V)


def normalize(v) -> StateVector:
    """Return ``v / |v|``. Raises ZeroVectorError when ``|v| < 1e-300``."""
    v = _as_vector(v)
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("cannot normalize a non-finite vector")
    m = float(np.max(np.abs(v))) if v.size else 0.0
    if m == 0.0:
        raise ZeroVectorError("zero vector")
    # pre-scaling by the max entry avoids under/overflow in the sum of squares
    u = v / m
    nu = float(np.sqrt(np.dot(u, u)))
    if m * nu < ZERO_NORM:
        raise ZeroVectorError(f"vector norm {m * nu:.3e} below {ZERO_NORM:g}")
    return StateVector(u / nu)


def _check_dims(a: np.ndarray, b_dim: int):
    if a.shape != (b_dim,):
        raise DimensionMismatch(f"dimension mismatch: {a.shape[0]} vs {b_dim}")


def overlap_fidelity(phi, psi) -> float:
    """|<psi|phi>|^2."""
    a, b = _as_vector(phi), _as_vector(psi)
    _check_dims(a, b.shape[0])
    return min(1.0, float(np.dot(a, b)) ** 2)


def subspace_fidelity(phi, P: SubspaceProjector) -> float:
    """<phi|P|phi> computed as the summed squared overlaps with P's basis."""
    a = _as_vector(phi)
    _check_dims(a, P.dim)
    c = P.basis.T @ a
    return min(1.0, float(np.dot(c, c)))


def principal_projector(S: Spectrum, k: int) -> SubspaceProjector:
    if not 1 <= k <= S.dim:
        raise ValueError(f"k={k} out of range 1..{S.dim}")
    return SubspaceProjector(S.eigenvectors[:, :k])


def dominant_rank(S: Spectrum, rel_tol: float = 1e-10) -> int:
    """Number of eigenvalues tied with the largest, relative to ``|lambda_1|``."""
    w = S.eigenvalues
    top = w[0]
    if top == 0.0:
        return int(np.sum(w == 0.0))
    return int(np.sum(top - w <= rel_tol * abs(top)))


def dominant_projector(S: Spectrum, rel_tol: float = 1e-10) -> SubspaceProjector:
    return principal_projector(S, dominant_rank(S, rel_tol))


def eigenvector_rotation(S_a: Spectrum, S_b: Spectrum, j: int) -> float:
    """``1 - |<psi_j^a|psi_j^b>|^2`` for the j-th (0-based) eigenvector.

    Symmetric in its arguments and blind to eigenvector sign.
    """
    if S_a.dim != S_b.dim:
        raise DimensionMismatch(f"dimension mismatch: {S_a.dim} vs {S_b.dim}")
    if not 0 <= j < S_a.dim:
        raise IndexError(f"eigenvector index {j} out of range 0..{S_a.dim - 1}")
    va, vb = S_a.eigenvectors[:, j], S_b.eigenvectors[:, j]
    if np.array_equal(va, vb):
        return 0.0
    c = float(np.dot(va, vb))
    return min(1.0, max(0.0, 1.0 - c * c))


def subspace_distance(P_a: SubspaceProjector, P_b: SubspaceProjector) -> float:
    """``1 - trace(P_a P_b) / R``; zero iff the two rank-R subspaces coincide."""
    if P_a.dim != P_b.dim:
        raise DimensionMismatch(f"dimension mismatch: {P_a.dim} vs {P_b.dim}")
    if P_a.rank != P_b.rank:
        raise DimensionMismatch(f"rank mismatch: {P_a.rank} vs {P_b.rank}")
    if P_a.rank == P_a.dim or np.array_equal(P_a.basis, P_b.basis):
        return 0.0
    M = P_a.basis.T @ P_b.basis
    tr = float(np.sum(M * M))
    return min(1.0, max(0.0, 1.0 - tr / P_a.rank))
