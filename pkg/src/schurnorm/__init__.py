"""Schur test upper bounds for integral operator norms via iterative nonlinear programming."""
from .baselines import (
    l2_kbar_closed,
    l2_norm,
    matrix_norm,
    nystrom_norm,
    truncation_kbar_analytic,
    truncation_matrix,
)
from .errors import (
    DegenerateDenominator,
    DomainError,
    NoConvergence,
    SchurNormError,
    SolverFailure,
)
from .kernel import (
    KernelParams,
    MackeyGlassParams,
    build_d0,
    denom,
    expm_d0,
    kernel_k,
    kernel_kbar,
    kernel_kbar_abs,
    mg_map,
    sample_k,
    sample_k_abs,
    sample_sides,
)
from .minimax import OptimizeOptions, OptState, carryover, collect_reference, optimize, step
from .model import SchurModel, SchurProblem, eval_n, eval_pq, objective_grad, ratios
from .quadrature import QuadGrid, integrate_1d, integrate_2d, make_grid, sample_kernel

__version__ = "0.1.0"
