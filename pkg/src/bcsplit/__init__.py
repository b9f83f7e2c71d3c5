"""Boundary-corrected exponential Lie-Trotter and Strang splitting for
reaction-diffusion problems with non-homogeneous boundary conditions."""

from .discretize import BC, DIRICHLET, NEUMANN, build_1d, build_2d_5pt, build_2d_split
from .harness import ErrorReport, ExperimentPlan, emit_report, estimate_orders, run_global, run_local, run_plan
from .integrate import IntegratorConfig, integrate, make_context, step
from .matfun import KrylovConfig, PhiTable, expm_dense, krylov_phi_apply, phi_combination, phi_dense
from .problems import Problem, get_problem

__all__ = [
    "BC", "DIRICHLET", "NEUMANN", "build_1d", "build_2d_5pt", "build_2d_split",
    "ErrorReport", "ExperimentPlan", "emit_report", "estimate_orders", "run_global", "run_local", "run_plan",
    "IntegratorConfig", "integrate", "make_context", "step",
    "KrylovConfig", "PhiTable", "expm_dense", "krylov_phi_apply", "phi_combination", "phi_dense",
    "Problem", "get_problem",
]
__version__ = "0.1.0"
