"""Half-plane heat fields, the velocity quotient, and residual diagnostics.

Representations (positive side; the negative side mirrors with the data
reflected and without exponential damping)::

    R(x,t) = e^{-t/2eps} [ A(x,t) + B(x,t) ]
    A = (2 sqrt(pi eps t))^{-1} INT_0^inf (e^{-(x-xi)^2/4eps t}
        - e^{-(x+xi)^2/4eps t}) theta0(xi) dxi
    B = (x / 2 sqrt(pi eps)) INT_0^t g(tau) (t-tau)^{-3/2}
        e^{-(1/2eps)(x^2/(2(t-tau)) - tau)} dtau

The boundary integral is always evaluated after the substitution
``tau = t - x^2/(4 eps v^2)``, which turns it into a Gaussian-weighted
integral over ``v`` on ``[x/(2 sqrt(eps t)), inf)``; that form stays accurate
uniformly down to ``x -> 0`` (where it reproduces ``g(t)`` exactly) and the
boundary function enters undifferentiated.  The velocity is the log-domain
quotient ``u = -2 eps d_x theta / theta`` with the damping factor cancelled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DivisionUnstable, InvalidSign, OutOfRange
from ..initial_data import InitialData, Viscosity, as_viscosity
from ..quadrature import (
    QuadratureSpec,
    SignedPiece,
    log_fixed_composite,
    log_quad,
    signed_quad,
)
from ..specfun import SignedLog, log_sum_exp
from .cutoffs import merged_splits, xi_breaks, xi_peak_candidates, xi_upper
from .trace import BoundaryTrace

__all__ = [
    "LogHeatValue",
    "heat_right",
    "heat_left",
    "velocity",
    "pde_residual_theta",
    "viscous_weak_residual",
]

_LOG_2_SQRT_PI = math.log(2.0 / math.sqrt(math.pi))
_NEG_INF = float("-inf")


@dataclass(frozen=True)
class LogHeatValue:
    """A heat-field value stored as sign and log magnitude.

    ``sign`` must be +1 for a physically meaningful field; -1 signals a
    quadrature failure upstream.  ``scaled_log`` is the quantity the
    vanishing-viscosity machinery compares against the variational minimum.
    """

    sign: int
    log_magnitude: float
    eps: float

    @property
    def value(self) -> float:
        return self.sign * math.exp(self.log_magnitude)

    def scaled_log(self) -> float:
        """``-2 eps log |theta|``, defined only for positive values."""
        if self.sign != 1:
            raise InvalidSign("scaled log requested for a nonpositive field value")
        return -2.0 * self.eps * self.log_magnitude


def _check_common(
    data: InitialData, visc: Viscosity, trace: BoundaryTrace, t: float
) -> float:
    if visc.below_quadrature_floor:
        raise OutOfRange(
            f"viscosity {visc.eps} below quadrature floor {Viscosity.QUADRATURE_FLOOR}"
        )
    if trace.eps != visc:
        raise ValueError(f"trace built for eps={trace.eps.eps}, asked for {visc.eps}")
    if trace.data != data:
        raise ValueError("trace built for a different initial datum")
    if not (0.0 < t <= trace.t_end * (1.0 + 1e-12)):
        raise OutOfRange(f"t={t} outside the trace coverage (0, {trace.t_end}]")
    return visc.eps


# ---------------------------------------------------------------------------
# data-kernel (image) integral and its x-derivative pieces
# ---------------------------------------------------------------------------

def _image_layout(data: InitialData, e: float, x: float, t: float, q: QuadratureSpec):
    mirror = x < 0.0
    ax = abs(x)
    cut = xi_upper(data, e, t, ax, mirror, q.xi_cutoff_sigmas)
    splits = merged_splits(
        cut,
        xi_breaks(data, mirror),
        xi_peak_candidates(data, e, t, ax, mirror),
        (ax, ax + math.sqrt(2.0 * e * t), max(0.0, ax - math.sqrt(2.0 * e * t))),
    )
    return mirror, ax, cut, splits


def _log_image_kernel(data: InitialData, e: float, x: float, t: float):
    """log of (e1 - e2) theta0 for x > 0, or -(e1 - e2) theta0(-xi) for x < 0."""
    mirror = x < 0.0
    ax = abs(x)
    sgn = -1.0 if mirror else 1.0

    def log_f(xi: np.ndarray) -> np.ndarray:
        v = data.cumulative_array(sgn * xi)
        near = -((ax - xi) ** 2) / (4.0 * e * t)
        gap = ax * xi / (e * t)
        # e^{near} - e^{near - gap}, positive; log via expm1 for small gaps.
        with np.errstate(divide="ignore"):
            diff = np.log(-np.expm1(-gap))
        return near + diff - v / (2.0 * e)

    return log_f


def _log_A(
    data: InitialData, e: float, x: float, t: float, q: QuadratureSpec
) -> float:
    _, _, cut, splits = _image_layout(data, e, x, t, q)
    lv, _ = log_quad(_log_image_kernel(data, e, x, t), 0.0, cut, q, split_points=splits)
    return lv - math.log(2.0 * math.sqrt(math.pi * e * t))


# ---------------------------------------------------------------------------
# boundary integral in the Gaussian v-variable
# ---------------------------------------------------------------------------

def _v_domain(trace: BoundaryTrace, e: float, x: float, t: float, damped: bool):
    ax = abs(x)
    v0 = ax / (2.0 * math.sqrt(e * t))
    grow = t / (2.0 * e) if damped else 0.0
    vmax = v0 + math.sqrt(grow + max(0.0, trace.log_g_max) + 90.0) + 3.0
    splits = []
    if damped:
        vstar = math.sqrt(ax / (2.0 * math.sqrt(2.0) * e)) if ax > 0 else 0.0
        if v0 < vstar < vmax:
            splits.append(vstar)
    return v0, vmax, tuple(splits)


def _log_boundary_integrand(trace: BoundaryTrace, e: float, x: float, t: float,
                            damped: bool):
    xx = x * x

    def log_f(v: np.ndarray) -> np.ndarray:
        tau = np.clip(t - xx / (4.0 * e * v * v), 0.0, t)
        phi = trace.log_g_at(tau) - v * v
        if damped:
            phi = phi + tau / (2.0 * e)
        return phi + _LOG_2_SQRT_PI

    return log_f


def _log_B(
    trace: BoundaryTrace, e: float, x: float, t: float, damped: bool,
    q: QuadratureSpec,
) -> float:
    v0, vmax, splits = _v_domain(trace, e, x, t, damped)
    lv, _ = log_quad(
        _log_boundary_integrand(trace, e, x, t, damped), v0, vmax, q,
        split_points=splits,
    )
    return lv


# ---------------------------------------------------------------------------
# field values
# ---------------------------------------------------------------------------

def heat_right(
    data: InitialData,
    eps: Viscosity | float,
    trace: BoundaryTrace,
    x: float,
    t: float,
    q: QuadratureSpec | None = None,
) -> LogHeatValue:
    """Heat-kernel field on the source's right half-plane (``x >= 0``)."""
    visc = as_viscosity(eps)
    q = q or trace.quadrature
    e = _check_common(data, visc, trace, t)
    if x < 0.0:
        raise OutOfRange(f"heat_right needs x >= 0, got {x}")
    if x == 0.0:
        return LogHeatValue(1, float(trace.log_g_at(t)), e)
    log_a = _log_A(data, e, x, t, q)
    log_b = _log_B(trace, e, x, t, True, q)
    total = log_sum_exp([(1, log_a), (1, log_b)])
    if total.sign != 1:
        raise InvalidSign(f"heat_right({x}, {t}) lost positivity")
    return LogHeatValue(1, total.log - t / (2.0 * e), e)


def heat_left(
    data: InitialData,
    eps: Viscosity | float,
    trace: BoundaryTrace,
    x: float,
    t: float,
    q: QuadratureSpec | None = None,
) -> LogHeatValue:
    """Heat-kernel field on the source's left half-plane (``x <= 0``)."""
    visc = as_viscosity(eps)
    q = q or trace.quadrature
    e = _check_common(data, visc, trace, t)
    if x > 0.0:
        raise OutOfRange(f"heat_left needs x <= 0, got {x}")
    if x == 0.0:
        return LogHeatValue(1, float(trace.log_g_at(t)), e)
    log_a = _log_A(data, e, x, t, q)
    log_b = _log_B(trace, e, x, t, False, q)
    total = log_sum_exp([(1, log_a), (1, log_b)])
    if total.sign != 1:
        raise InvalidSign(f"heat_left({x}, {t}) lost positivity")
    return LogHeatValue(1, total.log, e)


# ---------------------------------------------------------------------------
# velocity quotient
# ---------------------------------------------------------------------------

def _numerator_pieces(
    data: InitialData,
    trace: BoundaryTrace,
    e: float,
    x: float,
    t: float,
    q: QuadratureSpec,
) -> list[SignedPiece]:
    """Single-signed pieces of -2 eps d_x(A + B), damping cancelled."""
    mirror, ax, cut, splits = _image_layout(data, e, x, t, q)
    sgn = -1.0 if mirror else 1.0
    c_log = -math.log(2.0 * math.sqrt(math.pi * e * t)) - math.log(t)

    def make_image(kind: str):
        # kind "near": (xi - ax) e^{-(ax-xi)^2/4et}; "far": (xi + ax) e^{-(ax+xi)^2/4et}
        def log_f(xi: np.ndarray) -> np.ndarray:
            v = data.cumulative_array(sgn * xi)
            if kind == "near":
                amp = np.abs(xi - ax)
                expo = -((ax - xi) ** 2) / (4.0 * e * t)
            else:
                amp = xi + ax
                expo = -((ax + xi) ** 2) / (4.0 * e * t)
            with np.errstate(divide="ignore"):
                la = np.log(amp)
            return la + expo - v / (2.0 * e) + c_log

        return log_f

    inner = tuple(s for s in splits if s < ax) + tuple(s for s in splits if s > ax)
    pieces: list[SignedPiece] = []
    if not mirror:
        # -2e d_x A = c (INT (x-xi) e1 th0 - INT (x+xi) e2 th0)
        pieces.append(SignedPiece(1, make_image("near"), 0.0, min(ax, cut),
                                  tuple(s for s in splits if s < ax)))
        if cut > ax:
            pieces.append(SignedPiece(-1, make_image("near"), ax, cut,
                                      tuple(s for s in splits if s > ax)))
        pieces.append(SignedPiece(-1, make_image("far"), 0.0, cut, splits))
    else:
        # -2e d_x A_L = c (INT (xi-x) e1 th0m + INT (x+xi) e2 th0m), x < 0
        def log_near_plus(xi: np.ndarray) -> np.ndarray:
            v = data.cumulative_array(sgn * xi)
            return (np.log(xi + ax) - ((ax + xi) ** 2) / (4.0 * e * t)
                    - v / (2.0 * e) + c_log)

        def log_far_signed(xi: np.ndarray) -> np.ndarray:
            v = data.cumulative_array(sgn * xi)
            with np.errstate(divide="ignore"):
                la = np.log(np.abs(xi - ax))
            return la - ((ax - xi) ** 2) / (4.0 * e * t) - v / (2.0 * e) + c_log

        # In mirrored coordinates e1 has center -x = ax: (xi - x) = xi + ax,
        # e2 has center x: (xi + x) = xi - ax changes sign at xi = ax.
        pieces.append(SignedPiece(1, log_near_plus, 0.0, cut, splits))
        pieces.append(SignedPiece(-1, log_far_signed, 0.0, min(ax, cut),
                                  tuple(s for s in splits if s < ax)))
        if cut > ax:
            pieces.append(SignedPiece(1, log_far_signed, ax, cut,
                                      tuple(s for s in splits if s > ax)))

    # Boundary part: -2e d_x B = (4e/(|x| sqrt(pi))) INT g [e^{tau/2e}] (2v^2-1) e^{-v^2} dv
    damped = not mirror
    v0, vmax, vsplits = _v_domain(trace, e, x, t, damped)
    b_log = math.log(4.0 * e / (ax * math.sqrt(math.pi)))
    xx = x * x

    def log_bnd(kind: int):
        def log_f(v: np.ndarray) -> np.ndarray:
            tau = np.clip(t - xx / (4.0 * e * v * v), 0.0, t)
            phi = trace.log_g_at(tau) - v * v + b_log
            if damped:
                phi = phi + tau / (2.0 * e)
            with np.errstate(divide="ignore", invalid="ignore"):
                amp = np.log(np.abs(2.0 * v * v - 1.0))
            return phi + amp

        return log_f

    vc = 1.0 / math.sqrt(2.0)
    outer_sign = 1 if damped else -1
    if v0 < vc:
        hi = min(vc, vmax)
        pieces.append(SignedPiece(-outer_sign, log_bnd(0), v0, hi,
                                  tuple(s for s in vsplits if v0 < s < hi)))
    if vmax > vc:
        lo = max(v0, vc)
        pieces.append(SignedPiece(outer_sign, log_bnd(1), lo, vmax,
                                  tuple(s for s in vsplits if lo < s < vmax)))
    return pieces


def velocity(
    data: InitialData,
    eps: Viscosity | float,
    trace: BoundaryTrace,
    x: float,
    t: float,
    q: QuadratureSpec | None = None,
) -> float:
    """Viscous velocity ``u = -2 eps theta_x / theta`` at ``(x, t)``, ``x != 0``.

    Numerator and denominator are assembled in log domain and share the
    damping factor, which therefore cancels exactly.  Raises
    :class:`DivisionUnstable` when the quotient cannot be normalized.
    """
    visc = as_viscosity(eps)
    q = q or trace.quadrature
    e = _check_common(data, visc, trace, t)
    if x == 0.0:
        raise OutOfRange("velocity is a 0/0 quotient exactly at the source")
    log_a = _log_A(data, e, x, t, q)
    log_b = _log_B(trace, e, x, t, x > 0.0, q)
    denom = log_sum_exp([(1, log_a), (1, log_b)])
    if denom.sign != 1 or denom.log == _NEG_INF:
        raise DivisionUnstable(f"field value vanished at ({x}, {t})")
    numer = signed_quad(_numerator_pieces(data, trace, e, x, t, q), q)
    if numer.log == _NEG_INF:
        return 0.0
    ratio = numer.log - denom.log
    if ratio > 700.0 or math.isnan(ratio):
        raise DivisionUnstable(f"velocity quotient overflow at ({x}, {t})")
    return numer.sign * math.exp(ratio)


# ---------------------------------------------------------------------------
# strong-form residual on the reduced equation
# ---------------------------------------------------------------------------

def _log_theta_fixed(
    data: InitialData,
    trace: BoundaryTrace,
    e: float,
    x: float,
    t: float,
    q: QuadratureSpec,
    n_panels: int = 96,
) -> float:
    """log theta on a frozen normalized mesh (errors smooth in (x, t)).

    Both integrals are mapped onto [0, 1] and evaluated with a fixed
    composite rule, so stencil differences see correlated quadrature errors
    that cancel to the order of the stencil instead of adding up.
    """
    mirror = x < 0.0
    ax = abs(x)
    cut = xi_upper(data, e, t, ax, mirror, q.xi_cutoff_sigmas)
    kernel = _log_image_kernel(data, e, x, t)
    # Segment the window at the kinks of V(+-xi) so every piece is analytic;
    # each piece gets its own frozen mesh via xi = a + s*(b - a).
    edges = [0.0]
    edges += [b for b in xi_breaks(data, mirror) if 0.0 < b < cut]
    edges.append(cut)
    parts = []
    for a, b in zip(edges[:-1], edges[1:]):
        w = b - a
        lv = log_fixed_composite(
            lambda s, a=a, w=w: kernel(a + s * w), 0.0, 1.0, n_panels
        )
        parts.append((1, lv + math.log(w)))
    log_a = log_sum_exp(parts).log - math.log(2.0 * math.sqrt(math.pi * e * t))
    damped = not mirror
    v0, vmax, _ = _v_domain(trace, e, x, t, damped)
    bnd = _log_boundary_integrand(trace, e, x, t, damped)
    # The trace has a sqrt(tau) expansion, so the raw integrand has a
    # square-root kink at v0; v = v0 + w^2 makes it smooth on the mesh.
    w_max = math.sqrt(vmax - v0)
    log_b = log_fixed_composite(
        lambda w: bnd(v0 + w * w) + np.log(2.0 * w), 0.0, w_max, n_panels
    )
    total = log_sum_exp([(1, log_a), (1, log_b)]).log
    if damped:
        total -= t / (2.0 * e)
    return total


def pde_residual_theta(
    data: InitialData,
    eps: Viscosity | float,
    trace: BoundaryTrace,
    x: float,
    t: float,
    h_x: float,
    h_t: float,
    q: QuadratureSpec | None = None,
) -> float:
    """Normalized strong residual of ``theta_t = eps theta_xx - H(x) theta/(2 eps)``.

    Second-order central stencils on a shared quadrature mesh; the result is
    divided by ``theta(x,t) * max(1, 1/(2 eps))`` so the bound is meaningful
    across viscosities.  The stencil must not straddle the source line or the
    initial time.
    """
    visc = as_viscosity(eps)
    q = q or trace.quadrature
    e = _check_common(data, visc, trace, t)
    if h_x <= 0.0 or h_t <= 0.0:
        raise OutOfRange("stencil steps must be positive")
    if abs(x) <= h_x:
        raise OutOfRange(f"stencil at |x|={abs(x)} straddles the source (h_x={h_x})")
    if t - h_t <= 0.0 or t + h_t > trace.t_end * (1.0 + 1e-12):
        raise OutOfRange("stencil leaves the trace's time coverage")

    ref = _log_theta_fixed(data, trace, e, x, t, q)
    th = {
        (dx, dt): math.exp(
            _log_theta_fixed(data, trace, e, x + dx * h_x, t + dt * h_t, q) - ref
        )
        for (dx, dt) in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1))
    }
    theta_t = (th[(0, 1)] - th[(0, -1)]) / (2.0 * h_t)
    theta_xx = (th[(1, 0)] - 2.0 * th[(0, 0)] + th[(-1, 0)]) / (h_x * h_x)
    source = (th[(0, 0)] / (2.0 * e)) if x > 0.0 else 0.0
    residual = theta_t - e * theta_xx + source
    return residual / max(1.0, 1.0 / (2.0 * e))


# ---------------------------------------------------------------------------
# weak-form residual of the conservation law with source
# ---------------------------------------------------------------------------

def viscous_weak_residual(
    data: InitialData,
    eps: Viscosity | float,
    trace: BoundaryTrace,
    test_fn,
    q: QuadratureSpec | None = None,
    n_t: int = 20,
    n_x: int = 28,
    fd_step: float = 5e-4,
) -> float:
    """Weak residual of ``u_t + (u^2/2)_x = eps u_xx + delta_0`` against a bump.

    Computes ``INT INT [u phi_t + (u^2/2 - eps u_x) phi_x] dx dt
    + INT phi(0, t) dt + INT u0(x) phi(x, 0) dx`` with Gauss-Legendre rules on
    the bump's support box; ``u_x`` is a central difference of the velocity
    quotient with step ``fd_step``.  Vanishes for the exact field.
    """
    visc = as_viscosity(eps)
    q = q or trace.quadrature
    e = visc.eps
    a, b, t0, t1 = test_fn.box
    t1 = min(t1, trace.t_end)
    gl_t, gw_t = np.polynomial.legendre.leggauss(n_t)
    gl_x, gw_x = np.polynomial.legendre.leggauss(n_x)
    t_nodes = 0.5 * (t1 + t0) + 0.5 * (t1 - t0) * gl_t
    t_w = 0.5 * (t1 - t0) * gw_t
    x_nodes = 0.5 * (b + a) + 0.5 * (b - a) * gl_x
    x_w = 0.5 * (b - a) * gw_x
    # Keep evaluation points safely off the source line.
    x_nodes = np.where(np.abs(x_nodes) < 1e-6, 1e-6, x_nodes)

    def u_at(xv: float, tv: float) -> float:
        return velocity(data, visc, trace, xv, tv, q)

    inner = 0.0
    for tv, tw in zip(t_nodes, t_w):
        for xv, xw in zip(x_nodes, x_w):
            u = u_at(float(xv), float(tv))
            up = u_at(float(xv) + fd_step, float(tv))
            um = u_at(float(xv) - fd_step, float(tv))
            ux = (up - um) / (2.0 * fd_step)
            flux = 0.5 * u * u - e * ux
            inner += tw * xw * (u * test_fn.dt(float(xv), float(tv))
                                + flux * test_fn.dx(float(xv), float(tv)))

    source_line = float(np.sum(t_w * np.array([test_fn(0.0, float(tv))
                                               for tv in t_nodes])))
    initial = 0.0
    if t0 == 0.0:
        edges = sorted({a, b, 0.0, *data.breakpoints})
        edges = [v for v in edges if a <= v <= b]
        for lo, hi in zip(edges, edges[1:]):
            xs = 0.5 * (hi + lo) + 0.5 * (hi - lo) * gl_x
            ws = 0.5 * (hi - lo) * gw_x
            vals = np.array([data.velocity(float(xv)) * test_fn(float(xv), 0.0)
                             for xv in xs])
            initial += float(np.sum(ws * vals))
    return inner + source_line + initial
