"""Desk-scale simulator of quantum Tikhonov regularization parameter selection."""

from .linalg import (
    ExtendedMatrix,
    RegularizedProblem,
    SvdFactorization,
    TikhonovSolution,
    build_extended,
    compute_svd,
    condition_number_mu,
    gcv_lowrank,
    gcv_value,
    tikhonov_solve,
    tsvd_solve,
)
from .statevector import (
    CapacityError,
    StateVector,
    UnitaryOp,
    apply,
    controlled,
    hamiltonian_evolution,
    measure,
    phase_estimation,
    qft,
)
from .amplitude import (
    AmplitudeEstimate,
    FixedPointFormat,
    StatePrep,
    coherent_estimate,
    estimate_theta,
    grover_operator,
    parallel_estimate,
)
from .hhl import (
    HhlConfig,
    NormEstimates,
    SpectrumResolutionError,
    apply_A_state,
    estimate_norms,
    estimate_residual_norm,
    estimate_solution_norm,
    hhl_solution_state,
    prepare_b_state,
    residual_state,
)
from .search import (
    LCurvePoint,
    ParameterGrid,
    SelectionResult,
    classical_select,
    durr_hoyer_min,
    gcv_pipeline,
    lcurve_pipeline,
    principal_singular_values,
)
from .problems import generate_problem
from .mmio import MatrixMarketError, load_matrix, load_vector, save_matrix, save_vector

__version__ = "0.1.0"
