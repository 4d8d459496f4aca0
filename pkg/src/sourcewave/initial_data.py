"""Piecewise-constant initial velocity data and its exact antiderivative.

The initial datum ``u0`` is a bounded step function: finitely many
breakpoints, one constant value per interval, constant outside the outermost
breakpoints.  Its running integral ``V(x) = integral_0^x u0`` is therefore an
exactly representable piecewise-linear function with ``V(0) = 0``, and the
Hopf-Cole weight ``theta0(x) = exp(-V(x) / (2 eps))`` can be evaluated without
quadrature error.  Everything downstream (boundary trace, heat integrals,
variational functionals) leans on that exactness.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["InitialData", "Viscosity", "cumulative", "theta0", "log_theta0"]


@dataclass(frozen=True)
class InitialData:
    """Bounded piecewise-constant initial velocity.

    Parameters
    ----------
    breakpoints:
        Strictly increasing jump locations.  May be empty (constant data).
    values:
        Interval values, one more than there are breakpoints; ``values[i]``
        rules on ``(breakpoints[i-1], breakpoints[i])`` with the conventions
        that ``values[0]`` extends to ``-inf`` and ``values[-1]`` to ``+inf``.
        At a breakpoint the value is taken from the interval on its right.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]
    # Exact V at each breakpoint, anchored so V(0) = 0.  Derived state.
    _v_at_breaks: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __init__(self, breakpoints, values):
        bp = tuple(float(b) for b in breakpoints)
        vals = tuple(float(v) for v in values)
        if len(vals) != len(bp) + 1:
            raise ValueError(
                f"need exactly len(breakpoints)+1 values, got {len(vals)} "
                f"values for {len(bp)} breakpoints"
            )
        if any(not math.isfinite(b) for b in bp):
            raise ValueError("breakpoints must be finite")
        if any(not math.isfinite(v) for v in vals):
            raise ValueError("values must be finite")
        if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            raise ValueError(f"breakpoints must be strictly increasing: {bp}")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_v_at_breaks", self._integrate_to_breaks())

    def _integrate_to_breaks(self) -> tuple[float, ...]:
        bp, vals = self.breakpoints, self.values
        if not bp:
            return ()
        # Integrate outward from 0: right of 0 forward, left of 0 backward.
        j0 = bisect.bisect_right(bp, 0.0)
        v_at = [0.0] * len(bp)
        x, acc = 0.0, 0.0
        for i in range(j0, len(bp)):
            acc += vals[i] * (bp[i] - x)
            v_at[i] = acc
            x = bp[i]
        x, acc = 0.0, 0.0
        for i in range(j0 - 1, -1, -1):
            # Walking left: the interval (bp[i], x) carries vals[i+1].
            acc -= vals[i + 1] * (x - bp[i])
            v_at[i] = acc
            x = bp[i]
        return tuple(v_at)

    @property
    def bound(self) -> float:
        """Sup-norm bound on ``u0``, recomputed from the stored values."""
        return max(abs(v) for v in self.values)

    @property
    def support_radius(self) -> float:
        """Distance from the origin past which ``u0`` is constant."""
        if not self.breakpoints:
            return 0.0
        return max(abs(self.breakpoints[0]), abs(self.breakpoints[-1]))

    def velocity(self, x: float) -> float:
        """Pointwise ``u0(x)`` (right-interval convention at breakpoints)."""
        return self.values[bisect.bisect_right(self.breakpoints, x)]

    def cumulative(self, x: float) -> float:
        """Exact ``V(x) = integral_0^x u0(s) ds``."""
        bp, vals = self.breakpoints, self.values
        i = bisect.bisect_right(bp, x)
        if not bp:
            return vals[0] * x
        if i == 0:
            return self._v_at_breaks[0] + vals[0] * (x - bp[0])
        return self._v_at_breaks[i - 1] + vals[i] * (x - bp[i - 1])

    def cumulative_array(self, x: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`cumulative` for float arrays."""
        x = np.asarray(x, dtype=float)
        bp, vals = self.breakpoints, self.values
        if not bp:
            return vals[0] * x
        nodes = np.asarray(bp)
        vnode = np.asarray(self._v_at_breaks)
        slope = np.asarray(vals)
        idx = np.searchsorted(nodes, x, side="right")
        anchor_x = np.where(idx == 0, nodes[0], nodes[np.maximum(idx - 1, 0)])
        anchor_v = np.where(idx == 0, vnode[0], vnode[np.maximum(idx - 1, 0)])
        return anchor_v + slope[idx] * (x - anchor_x)


@dataclass(frozen=True)
class Viscosity:
    """Positive viscosity parameter.

    Any ``eps > 0`` is a valid parameter for the variational (inviscid-limit)
    machinery.  The viscous quadrature layer additionally enforces the
    practical floor :data:`QUADRATURE_FLOOR`: below it, the boundary trace and
    heat-kernel magnitudes (of order ``exp(c/eps)``) leave double range and
    the quadrature accuracy contract is void.
    """

    eps: float

    QUADRATURE_FLOOR = 1e-3

    def __post_init__(self) -> None:
        if not (self.eps > 0.0) or not math.isfinite(self.eps):
            raise ValueError(f"viscosity must be positive and finite, got {self.eps}")

    @property
    def below_quadrature_floor(self) -> bool:
        return self.eps < self.QUADRATURE_FLOOR


def as_viscosity(eps: "Viscosity | float") -> Viscosity:
    return eps if isinstance(eps, Viscosity) else Viscosity(float(eps))


def cumulative(data: InitialData, x: float) -> float:
    """Exact antiderivative ``V(x) = integral_0^x u0``; total in ``x``."""
    return data.cumulative(float(x))


def log_theta0(data: InitialData, eps: "Viscosity | float", x: float) -> float:
    """``log theta0(x) = -V(x) / (2 eps)``, always finite."""
    e = as_viscosity(eps).eps
    return -cumulative(data, x) / (2.0 * e)


def theta0(data: InitialData, eps: "Viscosity | float", x: float) -> float:
    """Hopf-Cole initial weight ``exp(-V(x) / (2 eps))``.

    Overflows to ``inf`` only when ``V(x)/(2 eps) < -709`` or so; callers that
    care operate on :func:`log_theta0` instead.
    """
    return math.exp(log_theta0(data, eps, x))
