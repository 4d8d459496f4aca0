"""Heat-kernel representation of the viscous field and its diagnostics."""
from __future__ import annotations

from .trace import BoundaryTrace, boundary_g, build_trace, source_kernel_f
from .field import (
    LogHeatValue,
    heat_left,
    heat_right,
    pde_residual_theta,
    velocity,
    viscous_weak_residual,
)
from .splits import SplitTerms, split_terms_left, split_terms_right

__all__ = [
    "BoundaryTrace",
    "LogHeatValue",
    "SplitTerms",
    "boundary_g",
    "build_trace",
    "heat_left",
    "heat_right",
    "pde_residual_theta",
    "source_kernel_f",
    "split_terms_left",
    "split_terms_right",
    "velocity",
    "viscous_weak_residual",
]
