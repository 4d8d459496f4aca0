"""Viscous and inviscid Burgers flow driven by a unit point source at x = 0.

The package has three computational layers:

* ``viscous``: exact heat-kernel representations of the viscous field (via
  Hopf-Cole), its boundary trace at the source, the seven-term integral
  split, and residual diagnostics.
* ``variational``: the three-branch minimization formulas whose minima give
  the vanishing-viscosity limit, plus interface and limit-velocity
  extraction.
* ``verify``: convergence studies, weak-form residuals and shock conditions
  connecting the two layers.
"""
from __future__ import annotations

from .errors import (
    AmbiguousMinimizer,
    ConfigError,
    DivisionUnstable,
    InfeasiblePoint,
    InvalidSign,
    NonConvergence,
    NotAShock,
    OutOfRange,
    SourcewaveError,
)
from .initial_data import InitialData, Viscosity, cumulative, log_theta0, theta0
from .quadrature import QuadratureSpec
from .specfun import Accuracy, SignedLog, besseli0_scaled, erfc, erfcx, log_sum_exp
from .variational import (
    Branch,
    DerivativeCheck,
    InterfacePair,
    LimitSolution,
    MinimizerPoint,
    MinimizerResult,
    SearchSpec,
    brute_force_minimum,
    finite_diff_check_U,
    functional_value,
    interfaces,
    limit_U,
    limit_velocity,
    minimize_branch,
)
from .verify import (
    ConvergenceReport,
    TestFunction,
    convergence_study,
    flux_jump_at_source,
    interface_entropy_measure,
    inviscid_weak_residual,
    limit_velocity_field,
    rankine_hugoniot_at_interface,
)
from .viscous import (
    BoundaryTrace,
    LogHeatValue,
    SplitTerms,
    boundary_g,
    build_trace,
    heat_left,
    heat_right,
    pde_residual_theta,
    source_kernel_f,
    split_terms_left,
    split_terms_right,
    velocity,
    viscous_weak_residual,
)

__version__ = "0.1.0"

__all__ = [
    "Accuracy",
    "AmbiguousMinimizer",
    "BoundaryTrace",
    "Branch",
    "ConfigError",
    "ConvergenceReport",
    "DerivativeCheck",
    "DivisionUnstable",
    "InitialData",
    "InfeasiblePoint",
    "InterfacePair",
    "InvalidSign",
    "LimitSolution",
    "LogHeatValue",
    "MinimizerPoint",
    "MinimizerResult",
    "NonConvergence",
    "NotAShock",
    "OutOfRange",
    "QuadratureSpec",
    "SearchSpec",
    "SignedLog",
    "SourcewaveError",
    "SplitTerms",
    "TestFunction",
    "Viscosity",
    "besseli0_scaled",
    "boundary_g",
    "brute_force_minimum",
    "build_trace",
    "convergence_study",
    "cumulative",
    "erfc",
    "erfcx",
    "finite_diff_check_U",
    "flux_jump_at_source",
    "functional_value",
    "heat_left",
    "heat_right",
    "interface_entropy_measure",
    "interfaces",
    "inviscid_weak_residual",
    "limit_U",
    "limit_velocity",
    "limit_velocity_field",
    "log_sum_exp",
    "log_theta0",
    "minimize_branch",
    "pde_residual_theta",
    "rankine_hugoniot_at_interface",
    "source_kernel_f",
    "split_terms_left",
    "split_terms_right",
    "theta0",
    "velocity",
    "viscous_weak_residual",
    "__version__",
]
