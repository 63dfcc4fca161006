"""Filtered spectral projection (FSPA), the flat power-iteration baseline,
oracle accounting and the closed-form convergence calculators.

One oracle application is one product ``rho @ phi``. FSPA runs ``T`` rounds;
round ``t`` applies rho ``2**(t-1)`` times, renormalizing after every single
application. Fidelity to the target is recorded after each application, and a
run with a target stops at the first application reaching ``1 - eps``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import GapRequired, KernelAnnihilation, NormViolation, ZeroVectorError
from .spectral import (
    HermitianOperator,
    OperatorLike,
    Spectrum,
    StateVector,
    SubspaceProjector,
    as_operator,
    dominant_projector,
    normalize,
    overlap_fidelity,
    subspace_fidelity,
)

NORM_SLACK = 1e-9
DEFAULT_EPSILON = 1e-4  # 99.99% fidelity


class Termination(str, enum.Enum):
    SCHEDULE_EXHAUSTED = "schedule_exhausted"
    TOLERANCE_REACHED = "tolerance_reached"
    KERNEL_ANNIHILATION = "kernel_annihilation"


@dataclass(frozen=True)
class FilterSchedule:
    """Doubling schedule: ``beta_1 = 1``, ``beta_{t+1} = 2 beta_t``."""

    rounds: int

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")

    @property
    def applications(self) -> list[int]:
        return [2**t for t in range(self.rounds)]

    @property
    def total(self) -> int:
        return schedule_total(self.rounds)


def round_end_count(count: int) -> int:
    """Cumulative FSPA applications at the end of the round holding application ``count``."""
    if count <= 0:
        return 0
    return 2 ** int(count).bit_length() - 1


def schedule_total(T: int) -> int:
    if T < 0:
        raise ValueError("T must be >= 0")
    return 2**T - 1


@dataclass(frozen=True)
class ConvergenceTarget:
    """Stop once fidelity to ``reference`` reaches ``1 - tolerance``.

    A StateVector reference means single-eigenvector mode, a SubspaceProjector
    means subspace mode. A plain unit-norm array is taken as a StateVector.
    """

    reference: Union[StateVector, SubspaceProjector]
    tolerance: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not isinstance(self.reference, (StateVector, SubspaceProjector)):
            object.__setattr__(self, "reference", StateVector(self.reference))
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError("tolerance must lie in (0, 1)")

    @property
    def mode(self) -> str:
        return "subspace" if isinstance(self.reference, SubspaceProjector) else "eigenvector"

    def fidelity(self, phi) -> float:
        if isinstance(self.reference, SubspaceProjector):
            return subspace_fidelity(phi, self.reference)
        return overlap_fidelity(phi, self.reference)

    def reached(self, fidelity: float) -> bool:
        return fidelity >= 1.0 - self.tolerance


@dataclass
class RunTrace:
    """Per-application record of one run; row 0 is the initial state."""

    algorithm: str
    oracle_counts: np.ndarray
    rounds: np.ndarray
    fidelities: np.ndarray
    states: np.ndarray
    termination: Termination

    @property
    def final_state(self) -> StateVector:
        return StateVector(self.states[-1])

    @property
    def final_count(self) -> int:
        return int(self.oracle_counts[-1])

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelities[-1])

    @property
    def round_end_count(self) -> int:
        """Oracle calls if the round in progress at termination is run to completion."""
        if self.algorithm != "fspa":
            return self.final_count
        return round_end_count(self.final_count)

    def first_passage(self, epsilon: float) -> Optional[int]:
        hit = np.flatnonzero(self.fidelities >= 1.0 - epsilon)
        return int(self.oracle_counts[hit[0]]) if hit.size else None

    def at_count(self, count: int) -> int:
        """Row index of the record with the given cumulative oracle count."""
        idx = np.searchsorted(self.oracle_counts, count)
        if idx >= len(self.oracle_counts) or self.oracle_counts[idx] != count:
            raise KeyError(f"no record at oracle count {count}")
        return int(idx)

    def __len__(self):
        return len(self.oracle_counts)


def _measure(H: HermitianOperator, target: Optional[ConvergenceTarget]) -> Callable[[np.ndarray], float]:
    if target is not None:
        if target.reference.dim != H.dim:
            raise ValueError("target dimension does not match operator")
        return target.fidelity
    # no target given: track the dominant eigenspace of rho
    P = dominant_projector(H.spectrum)
    return lambda phi: subspace_fidelity(phi, P)


def _iterate(
    algorithm: str,
    H: HermitianOperator,
    phi0,
    blocks: Sequence[int],
    target: Optional[ConvergenceTarget],
) -> RunTrace:
    phi = normalize(phi0).amplitudes
    if phi.shape != (H.dim,):
        raise ValueError(f"initial state has dim {phi.shape[0]}, operator has dim {H.dim}")
    measure = _measure(H, target)
    A = H.matrix

    counts, rnds, fids, states = [0], [0], [measure(phi)], [phi]

    def build(reason):
        return RunTrace(
            algorithm=algorithm,
            oracle_counts=np.asarray(counts, dtype=np.int64),
            rounds=np.asarray(rnds, dtype=np.int64),
            fidelities=np.asarray(fids, dtype=float),
            states=np.vstack(states),
            termination=reason,
        )

    if target is not None and target.reached(fids[0]):
        return build(Termination.TOLERANCE_REACHED)

    n = 0
    for t, beta in enumerate(blocks, start=1):
        for _ in range(beta):
            try:
                phi = normalize(A @ phi).amplitudes
            except ZeroVectorError:
                raise KernelAnnihilation(
                    f"iterate annihilated by rho at oracle application {n + 1}",
                    trace=build(Termination.KERNEL_ANNIHILATION),
                ) from None
            n += 1
            f = measure(phi)
            counts.append(n)
            rnds.append(t)
            fids.append(f)
            states.append(phi)
            if target is not None and target.reached(f):
                return build(Termination.TOLERANCE_REACHED)
    return build(Termination.SCHEDULE_EXHAUSTED)


def check_norm(H: HermitianOperator, bound: float = 1.0) -> float:
    norm = H.spectral_norm
    if norm > bound + NORM_SLACK:
        raise NormViolation(norm, bound)
    return norm


def fspa_run(
    rho: OperatorLike,
    phi0,
    T: int,
    target: Optional[ConvergenceTarget] = None,
) -> RunTrace:
    """Run ``T`` FSPA rounds from ``phi0``.

    Raises NormViolation when ``|rho| > 1 + 1e-9`` and KernelAnnihilation when
    an iterate is mapped to zero.
    """
    H = as_operator(rho)
    check_norm(H)
    return _iterate("fspa", H, phi0, FilterSchedule(T).applications, target)


def power_iteration_run(
    rho: OperatorLike,
    phi0,
    max_applications: int,
    target: Optional[ConvergenceTarget] = None,
) -> RunTrace:
    """Normalized power iteration, one application per step. No norm bound."""
    if max_applications < 0:
        raise ValueError("max_applications must be >= 0")
    H = as_operator(rho)
    return _iterate("power", H, phi0, [1] * max_applications, target)


def theorem_bound(r: float, a1_sq: float, epsilon: float = DEFAULT_EPSILON) -> int:
    """Applications sufficient for fidelity ``>= 1 - epsilon`` in the worst case.

    ``ceil(log((1-eps)/eps * (1-a)/a) / (2 log(1/r)))`` with ``a = |a_1|^2`` and
    ``r = lambda_2 / lambda_1``; zero when the log argument is at most one.
    """
    if r >= 1.0:
        raise GapRequired(f"spectral ratio r={r} must be < 1 (lambda_1 > lambda_2)")
    if r < 0.0:
        raise ValueError("spectral ratio must be >= 0")
    if not 0.0 < a1_sq <= 1.0:
        raise ValueError("a1_sq must lie in (0, 1]")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if a1_sq == 1.0:
        return 0
    arg = (1.0 - epsilon) / epsilon * (1.0 - a1_sq) / a1_sq
    if arg <= 1.0:
        return 0
    if r == 0.0:
        return 1
    return math.ceil(math.log(arg) / (2.0 * math.log(1.0 / r)))


def analytic_fidelity(spectrum: Union[Spectrum, Sequence[float]], coefficients, k: int) -> float:
    """Closed-form fidelity with psi_1 after ``k`` normalized applications.

    ``F_k = a_1^2 / sum_j a_j^2 (lambda_j/lambda_1)^(2k)``. ``spectrum`` may be a
    Spectrum or a descending sequence of eigenvalues; ``coefficients`` are the
    expansion of the initial state in the matching eigenbasis.
    """
    lam = np.asarray(spectrum.eigenvalues if isinstance(spectrum, Spectrum) else spectrum, dtype=float)
    a = np.asarray(coefficients, dtype=float)
    if a.shape != lam.shape:
        raise ValueError("coefficients must match the spectrum length")
    if abs(np.dot(a, a) - 1.0) > 1e-10:
        raise ValueError("coefficients must have unit norm")
    if k < 0:
        raise ValueError("k must be >= 0")
    if lam[0] == 0.0:
        raise ValueError("degenerate spectrum: lambda_1 = 0 (all-zero operator)")
    ratios = np.abs(lam / lam[0])
    weights = a * a * ratios ** (2 * k)
    total = float(np.sum(weights))
    if total == 0.0:
        raise KernelAnnihilation("initial state is annihilated after k applications")
    return float(weights[0] / total)
