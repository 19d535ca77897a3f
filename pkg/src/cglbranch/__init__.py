"""Bifurcation from multiple Dirichlet eigenvalues for ``lam u + Lap u = eta |u|^sigma u``.

Modules:

* :mod:`.spectral` -- boxes, exact eigenvalue groups, sine eigenfunctions
* :mod:`.coupling` -- quartic coupling integrals and nonlinear moments
* :mod:`.reduced` -- the reduced polynomial system and its roots
* :mod:`.lyapunov_schmidt` -- branch tracing on a sine-Galerkin truncation
* :mod:`.stability` -- Floquet multipliers and CGL simulation
* :mod:`.disk` -- the unit disk and its continuum of real roots
"""

__version__ = "0.1.0"

from .errors import (CGLBranchError, ConfigError, ContinuationError, ConvergenceError, DomainError,
                     HypothesisError, QuadratureGuardError, ResolventError)
from .spectral import BoxDomain, EigenGroup, enumerate_groups, eval_eigenfunction, group_for_modes, nth_group
from .coupling import check_hypothesis_H4, nonlinear_moment, quartic_product, quartic_table
from .reduced import (AlphaVector, GridSpec, ReducedSystem, SeedSolution, enumerate_branches, eval_P,
                      eval_real_jacobian, multistart_solve, solve_system)
from .galerkin import GalerkinSpace
from .lyapunov_schmidt import solve_reduced, solve_y, trace_branch, verify_branch_limit
from .stability import (CGLParams, instability_verdict, linear_spectrum_A, monodromy, params_from_branch,
                        simulate_cgl)
from .disk import bessel_j, bessel_zero, detect_continuum, disk_eval_P2

__all__ = [
    "AlphaVector", "BoxDomain", "CGLBranchError", "CGLParams", "ConfigError", "ContinuationError",
    "ConvergenceError", "DomainError", "EigenGroup", "GalerkinSpace", "GridSpec", "HypothesisError",
    "QuadratureGuardError", "ReducedSystem", "ResolventError", "SeedSolution", "bessel_j", "bessel_zero",
    "check_hypothesis_H4", "detect_continuum", "disk_eval_P2", "enumerate_branches", "enumerate_groups",
    "eval_P", "eval_eigenfunction", "eval_real_jacobian", "group_for_modes", "instability_verdict",
    "linear_spectrum_A", "monodromy", "multistart_solve", "nonlinear_moment", "nth_group",
    "params_from_branch", "quartic_product", "quartic_table", "simulate_cgl", "solve_reduced",
    "solve_system", "solve_y", "trace_branch", "verify_branch_limit",
]
