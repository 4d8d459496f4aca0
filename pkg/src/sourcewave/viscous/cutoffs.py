"""Truncation and split-point logic for the spatial heat integrals.

All xi-integrands here look like ``exp(-(xi - center)^2/(4 eps T) - V(s xi)/(2 eps))``
up to algebraic factors, with ``s = +1`` (right data) or ``-1`` (mirrored left
data).  On every linear piece of ``V`` the exponent is an exact downward
parabola, so the global peak is found by clamping each piece's vertex; the
integration window ends a fixed number of Gaussian widths past the outermost
candidate peak.
"""
from __future__ import annotations

import math

from ..initial_data import InitialData

__all__ = ["xi_breaks", "xi_upper", "xi_peak_candidates"]


def xi_breaks(data: InitialData, mirror: bool) -> tuple[float, ...]:
    """Kink locations of ``V(s xi)`` for ``xi >= 0`` (s = -1 when mirrored)."""
    if mirror:
        return tuple(sorted(-b for b in data.breakpoints if b < 0.0))
    return tuple(b for b in data.breakpoints if b > 0.0)


def xi_peak_candidates(
    data: InitialData, eps: float, t_width: float, center: float, mirror: bool
) -> list[float]:
    """Clamped per-piece vertices of the Gaussian-plus-linear exponent.

    ``t_width`` is the Gaussian time scale (the ``T`` in ``(xi-center)^2/4
    eps T``), not necessarily the physical time.
    """
    sgn = -1.0 if mirror else 1.0
    cands = [max(0.0, center)]
    for v in data.values:
        cands.append(max(0.0, center - sgn * v * t_width))
    cands.extend(xi_breaks(data, mirror))
    return cands


def xi_upper(
    data: InitialData,
    eps: float,
    t_width: float,
    center: float,
    mirror: bool,
    sigmas: float,
) -> float:
    """Upper truncation point for the xi-integral; tails beyond are O(e^-sigmas^2/2).

    The candidate list already contains every breakpoint, so the window always
    spans the support of the data's variation.
    """
    peak = max(xi_peak_candidates(data, eps, t_width, center, mirror))
    return peak + sigmas * math.sqrt(2.0 * eps * t_width)


def merged_splits(cut: float, *groups: tuple[float, ...] | list[float]) -> tuple[float, ...]:
    """Interior split points for an integral over [0, cut]."""
    pts = set()
    for g in groups:
        for p in g:
            if 0.0 < p < cut:
                pts.add(float(p))
    return tuple(sorted(pts))
