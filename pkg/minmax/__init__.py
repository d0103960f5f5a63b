"""Min-max approximation on spectra of normal matrices with optimality certificates."""

from .certificate import (
    Certificate,
    caratheodory_prune,
    extract_active_set,
    recover_weights,
    verify_certificate,
)
from .errors import (
    ConvergenceError,
    DecompositionMismatchError,
    InputValidationError,
    MinmaxError,
    NotOptimalError,
    RealnessError,
    SymmetryError,
)
from .matrix_bridge import (
    CommutingFamily,
    SpectralDecomposition,
    apply_function_table,
    best_vector_approx,
    build_commuting_problem,
    build_matrix_problem,
    minmax_matrix_value,
    sample_maxmin,
    validate_decomposition,
)
from .minimax import MinimaxSolution, SolverOptions, dual_lower_bound, solve_minimax
from .problem import (
    Chebyshev,
    Coefficients,
    Custom,
    EvaluationTable,
    Gmres,
    PointSet,
    build_basis_problem,
    from_spectrum,
    validate_conjugate_symmetry,
)
from .worstcase import (
    SymmetrizedCertificate,
    WorstCaseVector,
    complex_worst_vector,
    real_worst_vector,
    realize_polynomial,
    symmetrize_certificate,
)

__all__ = [
    "Certificate",
    "Chebyshev",
    "Coefficients",
    "CommutingFamily",
    "ConvergenceError",
    "Custom",
    "DecompositionMismatchError",
    "EvaluationTable",
    "Gmres",
    "InputValidationError",
    "MinimaxSolution",
    "MinmaxError",
    "NotOptimalError",
    "PointSet",
    "RealnessError",
    "SolverOptions",
    "SpectralDecomposition",
    "SymmetrizedCertificate",
    "SymmetryError",
    "WorstCaseVector",
    "apply_function_table",
    "best_vector_approx",
    "build_basis_problem",
    "build_commuting_problem",
    "build_matrix_problem",
    "caratheodory_prune",
    "complex_worst_vector",
    "dual_lower_bound",
    "extract_active_set",
    "from_spectrum",
    "minmax_matrix_value",
    "real_worst_vector",
    "realize_polynomial",
    "recover_weights",
    "sample_maxmin",
    "solve_minimax",
    "symmetrize_certificate",
    "validate_conjugate_symmetry",
    "validate_decomposition",
]
