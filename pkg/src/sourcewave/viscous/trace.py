"""Boundary trace of the reduced heat problem at the source location.

The half-plane representations need two scalar functions of time: the data
kernel ``f`` (explicit in the initial data) and the boundary value ``g``,
obtained from ``f`` by a weakly singular convolution plus a scaled-Bessel
term.  Both are tabulated once on a grid that is uniform in ``sqrt(t)``:
``f`` and ``g`` admit expansions in ``sqrt(t)`` near 0, so monotone cubic
interpolation in the ``sqrt(t)`` variable keeps full accuracy where a uniform
grid in ``t`` would lose four digits.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..errors import InvalidSign, OutOfRange
from ..initial_data import InitialData, Viscosity, as_viscosity
from ..quadrature import QuadratureSpec, log_quad, quad
from ..specfun import besseli0_scaled
from .cutoffs import merged_splits, xi_breaks, xi_peak_candidates, xi_upper

__all__ = ["BoundaryTrace", "source_kernel_f", "boundary_g", "build_trace"]

_SQRT_PI = math.sqrt(math.pi)


def _require_quadrature_eps(visc: Viscosity) -> float:
    if visc.below_quadrature_floor:
        raise OutOfRange(
            f"viscosity {visc.eps} is below the quadrature floor "
            f"{Viscosity.QUADRATURE_FLOOR}; heat-kernel magnitudes leave "
            "double range there and the accuracy contract is void"
        )
    return visc.eps


def _expm1_ratio(y: np.ndarray) -> np.ndarray:
    """(1 - exp(-y)) / y, stable for small y >= 0."""
    y = np.asarray(y, dtype=float)
    small = y < 1e-8
    safe = np.where(small, 1.0, y)
    out = np.where(small, 1.0 - 0.5 * y, -np.expm1(-safe) / safe)
    return out


def source_kernel_f(
    data: InitialData,
    eps: Viscosity | float,
    t: float,
    q: QuadratureSpec | None = None,
) -> float:
    """Data kernel driving the boundary condition at the source.

    For ``t > 0``::

        f(t) = (2 (eps t)^{3/2})^{-1} INT_0^inf (e^{-t/2eps} theta0(xi)
               + theta0(-xi)) xi e^{-xi^2/(4 eps t)} dxi
               - (e^{-t/2eps} + 1) / sqrt(eps t)

    and ``f(0)`` is the finite limit ``-sqrt(pi) (u0(0+) - u0(0-)) / (2 eps)``
    (the two unbounded pieces cancel at leading order).  The integral is done
    in log domain with the window from :func:`xi_upper`.
    """
    visc = as_viscosity(eps)
    e = _require_quadrature_eps(visc)
    q = q or QuadratureSpec()
    if t < 0.0:
        raise OutOfRange(f"f is defined for t >= 0, got {t}")
    if t == 0.0:
        # u0(0+) carries the right-interval convention; u0(0-) is the value of
        # the interval just left of the origin.
        u_left = data.values[bisect.bisect_left(data.breakpoints, 0.0)]
        u_right = data.velocity(0.0)
        return -_SQRT_PI * (u_right - u_left) / (2.0 * e)

    damp = -t / (2.0 * e)
    logs = []
    for mirror, extra in ((False, damp), (True, 0.0)):
        cut = xi_upper(data, e, t, 0.0, mirror, q.xi_cutoff_sigmas)
        splits = merged_splits(
            cut,
            xi_breaks(data, mirror),
            xi_peak_candidates(data, e, t, 0.0, mirror),
            (math.sqrt(2.0 * e * t),),
        )
        sgn = -1.0 if mirror else 1.0

        def log_f(xi: np.ndarray, _s=sgn, _x=extra) -> np.ndarray:
            v = data.cumulative_array(_s * xi)
            return np.log(xi) - xi * xi / (4.0 * e * t) - v / (2.0 * e) + _x

        lv, _ = log_quad(log_f, 0.0, cut, q, split_points=splits)
        logs.append(lv)

    front = 1.0 / (2.0 * (e * t) ** 1.5)
    total = front * (math.exp(logs[0]) + math.exp(logs[1]))
    if math.isinf(total):
        raise InvalidSign(f"f({t}) overflowed; eps={e} too small for this datum")
    return total - (math.exp(damp) + 1.0) / math.sqrt(e * t)


@dataclass(frozen=True)
class BoundaryTrace:
    """Tabulated source-boundary data for one (datum, viscosity) pair.

    ``t_grid`` starts at 0 and is strictly increasing; ``f_values`` holds the
    data kernel with the finite ``f(0)`` limit in slot 0; ``g_values`` holds
    the boundary value with ``g_values[0] == 1`` and every entry positive.
    Interpolation happens in the ``sqrt(t)`` variable (see module docstring).
    """

    data: InitialData
    eps: Viscosity
    t_grid: np.ndarray
    f_values: np.ndarray
    g_values: np.ndarray
    quadrature: QuadratureSpec
    _f_interp: PchipInterpolator = field(repr=False, compare=False)
    _g_interp: PchipInterpolator = field(repr=False, compare=False)

    @property
    def t_end(self) -> float:
        return float(self.t_grid[-1])

    @property
    def log_g_max(self) -> float:
        return float(np.log(np.max(self.g_values)))

    def f_at(self, tau: np.ndarray) -> np.ndarray:
        """Interpolated data kernel on [0, t_end]."""
        return self._f_interp(np.sqrt(np.asarray(tau, dtype=float)))

    def g_at(self, tau: np.ndarray) -> np.ndarray:
        """Interpolated boundary value on [0, t_end]."""
        return self._g_interp(np.sqrt(np.asarray(tau, dtype=float)))

    def log_g_at(self, tau: np.ndarray) -> np.ndarray:
        return np.log(self.g_at(tau))


def _conv_integral(
    f_of: Callable[[np.ndarray], np.ndarray],
    e: float,
    t: float,
    q: QuadratureSpec,
    abs_tol: float,
) -> float:
    """INT_0^t (1 - e^{-tau/2eps}) tau^{-3/2} f(t - tau) dtau via tau = s^2."""

    def integrand(s: np.ndarray) -> np.ndarray:
        w = s * s
        kernel = _expm1_ratio(w / (2.0 * e)) / (2.0 * e)
        return 2.0 * kernel * f_of(np.maximum(t - w, 0.0))

    val, _ = quad(
        integrand,
        0.0,
        math.sqrt(t),
        q,
        split_points=(math.sqrt(2.0 * e),) if 2.0 * e < t else (),
        abs_tol=abs_tol,
    )
    return val


def build_trace(
    data: InitialData,
    eps: Viscosity | float,
    t_end: float,
    q: QuadratureSpec | None = None,
) -> BoundaryTrace:
    """Tabulate ``f`` and ``g`` on ``[0, t_end]`` and wrap the interpolants.

    Raises :class:`InvalidSign` if the computed boundary value fails to stay
    positive (it must, for every admissible datum).
    """
    visc = as_viscosity(eps)
    e = _require_quadrature_eps(visc)
    q = q or QuadratureSpec()
    if t_end <= 0.0:
        raise OutOfRange(f"t_end must be positive, got {t_end}")

    n = max(8, math.ceil(q.time_nodes_per_unit * t_end))
    s_grid = np.linspace(0.0, math.sqrt(t_end), n + 1)
    t_grid = s_grid**2

    f_values = np.empty_like(t_grid)
    f_values[0] = source_kernel_f(data, visc, 0.0, q)
    for i in range(1, len(t_grid)):
        f_values[i] = source_kernel_f(data, visc, float(t_grid[i]), q)
    f_interp = PchipInterpolator(s_grid, f_values, extrapolate=False)

    f_of = lambda tau: f_interp(np.sqrt(tau))
    g_values = np.empty_like(t_grid)
    g_values[0] = 1.0
    scale = e**1.5 / math.pi
    for i in range(1, len(t_grid)):
        t = float(t_grid[i])
        bessel = besseli0_scaled(t / (4.0 * e))
        conv_abs_tol = q.rel_tol * max(1.0, bessel) / scale
        g_values[i] = bessel + scale * _conv_integral(f_of, e, t, q, conv_abs_tol)
    if np.any(g_values <= 0.0) or not np.all(np.isfinite(g_values)):
        raise InvalidSign("boundary value must stay positive on the grid")
    g_interp = PchipInterpolator(s_grid, g_values, extrapolate=False)

    return BoundaryTrace(
        data=data,
        eps=visc,
        t_grid=t_grid,
        f_values=f_values,
        g_values=g_values,
        quadrature=q,
        _f_interp=f_interp,
        _g_interp=g_interp,
    )


def boundary_g(trace: BoundaryTrace, t: float) -> float:
    """Boundary value at time ``t``, recomputed from the interpolated kernel.

    Unlike :meth:`BoundaryTrace.g_at` (which interpolates the tabulated
    values), this evaluates the scaled-Bessel term exactly at ``t`` and redoes
    the convolution quadrature, so it is also a consistency check on the
    table.  Raises :class:`OutOfRange` outside ``[0, t_end]``.
    """
    if t < 0.0 or t > trace.t_end:
        raise OutOfRange(f"t={t} outside the trace grid [0, {trace.t_end}]")
    if t == 0.0:
        return 1.0
    e = trace.eps.eps
    q = trace.quadrature
    bessel = besseli0_scaled(t / (4.0 * e))
    scale = e**1.5 / math.pi
    conv_abs_tol = q.rel_tol * max(1.0, bessel) / scale
    val = bessel + scale * _conv_integral(trace.f_at, e, t, q, conv_abs_tol)
    if val <= 0.0:
        raise InvalidSign(f"boundary value came out nonpositive at t={t}")
    return val
