"""Filtered spectral projection toolkit."""

__version__ = "0.1.0"

from .engine import (
    ConvergenceTarget,
    FilterSchedule,
    RunTrace,
    Termination,
    analytic_fidelity,
    fspa_run,
    power_iteration_run,
    schedule_total,
    theorem_bound,
)
from .encoding import (
    DataMatrix,
    InterlacingReport,
    covariance,
    ensemble_density,
    interlacing_check,
    load_csv,
    standardize,
)
from .qpe import QpeConfig, QpeOutcome, qpe_estimate, qpe_success_over_scaling, resolution_floor
from .spectral import (
    HermitianOperator,
    Spectrum,
    StateVector,
    SubspaceProjector,
    eigendecompose,
    eigenvector_rotation,
    normalize,
    overlap_fidelity,
    principal_projector,
    subspace_distance,
    subspace_fidelity,
)
