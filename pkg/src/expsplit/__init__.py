"""Exponential dimension-splitting integrators for 2-D parabolic problems."""

from .discretization import (
    CoefficientField,
    Grid,
    GridFunction,
    LineOperatorFamily,
    apply_split_operator,
    assemble_full_operator,
    boundary_coupling_vector,
    build_line_operator,
)
from .estimator import SplittingSolver
from .harness import (
    ConvergenceReport,
    OperatorCache,
    StudyConfig,
    fit_order,
    run_convergence_study,
)
from .integrators import (
    TimeGrid,
    integrate,
    lie_step,
    reference_solve,
    strang_b_step,
    strang_step,
)
from .linalg import (
    DiscreteOperator,
    EigenDecomposition,
    SymTridiag,
    cg_solve,
    dense_sym_eigen,
    exp_action,
    phi_action,
    sym_tridiag_eigen,
)
from .norms import NormKind, discrete_l2, dual_norm, fractional_apply, smoothing_probe
from .problems import (
    ProblemSpec,
    SourceTerm,
    dirichlet_lift,
    homogenize,
    problem_by_label,
)

__version__ = "0.1.0"
