"""Cross-validation of the viscous fields against their inviscid limit.

The two halves of the package make claims about the same object from
opposite directions: the viscous layer computes the regularized field
exactly, the variational layer computes the candidate limit.  This module
holds the glue that checks them against each other: vanishing-viscosity
convergence studies, the weak form of the sourced inviscid law tested
against smooth bumps, the flux jump the point source forces across x = 0,
Rankine-Hugoniot speeds at the branch interfaces, and the one-sided entropy
diagnostic used in the literature on discontinuous-flux limits.

Quadrature here is deliberately plain: fixed Gauss-Legendre panels on cells
that never straddle the source line or an interface curve, so every
integrand piece is smooth and the cheap rule is accurate to far below the
tolerances being asserted.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousMinimizer, NonConvergence, NotAShock, OutOfRange
from .initial_data import InitialData, Viscosity, as_viscosity
from .quadrature import QuadratureSpec
from .variational import SearchSpec, interfaces, limit_U, limit_velocity
from .viscous.field import heat_left, heat_right
from .viscous.trace import build_trace

__all__ = [
    "TestFunction",
    "ConvergenceReport",
    "convergence_study",
    "inviscid_weak_residual",
    "limit_velocity_field",
    "flux_jump_at_source",
    "rankine_hugoniot_at_interface",
    "interface_entropy_measure",
]

_TRACE_OFFSET = 1e-5  # one-sided limits are read this far from a curve


def _profile(z: float) -> float:
    """(1 - z^2)^3 on |z| < 1, 0 outside; peaks at 1.

    Polynomial rather than an exponential mollifier: the weak form only
    needs C^1 test functions, and a degree-6 profile is integrated exactly
    by the Gauss rules downstream, so quadrature error comes from the field
    alone.  An essential-singularity bump would cost two orders there.
    """
    w = 1.0 - z * z
    if w <= 0.0:
        return 0.0
    return w * w * w


def _profile_dz(z: float) -> float:
    w = 1.0 - z * z
    if w <= 0.0:
        return 0.0
    return -6.0 * z * w * w


@dataclass(frozen=True)
class TestFunction:
    """C^2 product bump ``amplitude * X(x) * T(t)`` on a support box.

    ``X`` is a polynomial bump profile vanishing to second order at ``x_lo``
    and ``x_hi``.  ``T`` does the same at ``t_hi``; at ``t_lo`` it either
    vanishes likewise (``t_lo > 0``) or, when ``t_lo == 0``, switches to the
    right half of a bump so the function is nonzero at ``t = 0`` with zero
    slope there.  That half-bump form is what makes the initial term of the
    weak formulation testable: admissible test functions on the closed
    half-plane ``t >= 0`` need not vanish on the initial line.
    """

    # Not a pytest case despite the Test prefix.
    __test__ = False

    x_lo: float
    x_hi: float
    t_lo: float
    t_hi: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not self.x_lo < self.x_hi:
            raise ValueError(f"need x_lo < x_hi, got [{self.x_lo}, {self.x_hi}]")
        if not 0.0 <= self.t_lo < self.t_hi:
            raise ValueError(f"need 0 <= t_lo < t_hi, got [{self.t_lo}, {self.t_hi}]")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")

    @property
    def box(self) -> tuple[float, float, float, float]:
        return (self.x_lo, self.x_hi, self.t_lo, self.t_hi)

    def _zx(self, x: float) -> tuple[float, float]:
        # map to [-1, 1] with the chain-rule factor
        return ((2.0 * x - self.x_lo - self.x_hi) / (self.x_hi - self.x_lo),
                2.0 / (self.x_hi - self.x_lo))

    def _zt(self, t: float) -> tuple[float, float]:
        if self.t_lo == 0.0:
            return (t / self.t_hi, 1.0 / self.t_hi)
        return ((2.0 * t - self.t_lo - self.t_hi) / (self.t_hi - self.t_lo),
                2.0 / (self.t_hi - self.t_lo))

    def _t_ok(self, t: float) -> bool:
        # the half-bump is one-sided: negative times are outside the domain
        return t >= 0.0

    def __call__(self, x: float, t: float) -> float:
        if not self._t_ok(t):
            return 0.0
        zx, _ = self._zx(x)
        zt, _ = self._zt(t)
        return self.amplitude * _profile(zx) * _profile(zt)

    def dx(self, x: float, t: float) -> float:
        if not self._t_ok(t):
            return 0.0
        zx, cx = self._zx(x)
        zt, _ = self._zt(t)
        return self.amplitude * _profile_dz(zx) * cx * _profile(zt)

    def dt(self, x: float, t: float) -> float:
        if not self._t_ok(t):
            return 0.0
        zx, _ = self._zx(x)
        zt, ct = self._zt(t)
        return self.amplitude * _profile(zx) * _profile_dz(zt) * ct


# ---------------------------------------------------------------------------
# vanishing-viscosity convergence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceReport:
    """Gap between ``-2 eps log theta`` and the variational limit at a point.

    ``monotone_decreasing`` is None for a single-entry ladder: one gap
    supports no verdict.
    """

    point: tuple[float, float]
    eps_list: tuple[float, ...]
    viscous_values: tuple[float, ...]
    limit_value: float
    gaps: tuple[float, ...]
    monotone_decreasing: bool | None
    final_gap: float

    def __post_init__(self) -> None:
        if any(e1 >= e0 for e0, e1 in zip(self.eps_list, self.eps_list[1:])):
            raise OutOfRange(f"eps_list must be strictly decreasing: {self.eps_list}")
        if not all(math.isfinite(g) for g in self.gaps):
            raise NonConvergence(f"non-finite convergence gaps: {self.gaps}")

    def to_jsonable(self) -> dict:
        return {
            "point": list(self.point),
            "eps_list": list(self.eps_list),
            "viscous_values": list(self.viscous_values),
            "limit_value": self.limit_value,
            "gaps": list(self.gaps),
            "monotone_decreasing": self.monotone_decreasing,
            "final_gap": self.final_gap,
        }


def convergence_study(
    data: InitialData,
    point: tuple[float, float],
    eps_list,
    q: QuadratureSpec | None = None,
    search: SearchSpec | None = None,
) -> ConvergenceReport:
    """Compare ``-2 eps log theta`` against the limit U along an eps ladder.

    One boundary trace is built per viscosity; the limit value comes from
    the variational minimization once.  The report records the gap per eps,
    whether the gaps decrease monotonically (None for a single entry), and
    the final gap.
    """
    x, t = float(point[0]), float(point[1])
    if x == 0.0:
        raise OutOfRange("convergence study needs an off-axis point")
    if t <= 0.0:
        raise OutOfRange(f"t must be positive, got {t}")
    eps_list = tuple(float(e) for e in eps_list)
    if not eps_list:
        raise OutOfRange("eps_list must be nonempty")
    if any(e1 >= e0 for e0, e1 in zip(eps_list, eps_list[1:])):
        raise OutOfRange(f"eps_list must be strictly decreasing: {eps_list}")

    side = "R" if x > 0.0 else "L"
    limit = limit_U(side, data, x, t, search).U
    values = []
    for e in eps_list:
        trace = build_trace(data, e, t_end=t * 1.02 + 0.01, q=q)
        field = heat_right if x > 0.0 else heat_left
        values.append(field(data, e, trace, x, t, q).scaled_log())
    gaps = tuple(abs(v - limit) for v in values)
    monotone = None
    if len(gaps) > 1:
        monotone = all(g1 < g0 for g0, g1 in zip(gaps, gaps[1:]))
    return ConvergenceReport(
        point=(x, t), eps_list=eps_list, viscous_values=tuple(values),
        limit_value=limit, gaps=gaps, monotone_decreasing=monotone,
        final_gap=gaps[-1],
    )


# ---------------------------------------------------------------------------
# weak form of the sourced inviscid law
# ---------------------------------------------------------------------------

def limit_velocity_field(data: InitialData, search: SearchSpec | None = None):
    """The limit velocity as a plain ``(x, t) -> u`` evaluator.

    Points on the source line itself are nudged right by the trace offset;
    weak-form quadrature never lands there because cells split at x = 0.
    """

    def u(x: float, t: float) -> float:
        if x == 0.0:
            x = _TRACE_OFFSET
        side = "R" if x > 0.0 else "L"
        return limit_velocity(side, data, x, t, search)

    return u


_CURVE_CACHE: dict = {}
_CURVE_CACHE_LIMIT = 4096


def _curves_at(side: str, data: InitialData, t: float, search: SearchSpec):
    """Non-degenerate interface abscissas at time t, cached per (side, datum).

    Degenerate switches sit within tie tolerance of the source line; the
    cell split at x = 0 already covers them, and splitting again would
    create sliver cells inside the tie zone.
    """
    key = (side, data, round(t, 12), search)
    hit = _CURVE_CACHE.get(key)
    if hit is None:
        pair = interfaces(side, data, t, search)
        hit = tuple(
            v for v, bad in ((pair.inner, pair.inner_degenerate),
                             (pair.outer, pair.outer_degenerate))
            if not bad
        )
        if len(_CURVE_CACHE) >= _CURVE_CACHE_LIMIT:
            _CURVE_CACHE.pop(next(iter(_CURVE_CACHE)))
        _CURVE_CACHE[key] = hit
    return hit


_FEATURE_CACHE: dict = {}
_FEATURE_CACHE_LIMIT = 4096
_FEATURE_SCAN_NODES = 64
_FEATURE_SNAP = 1e-5
_FEATURE_FLOOR = 1e-3
_SHOCK_JUMP_TOL = 0.1
_SHOCK_LOCATE_TOL = 1e-9


def _piece_code(bp, c: float, snap: float) -> int:
    """Interval-point code of coordinate c against sorted breakpoints.

    Even codes are open intervals, odd codes are breakpoints; anything
    within snap of a breakpoint counts as sitting on it, so a minimizer
    pinned at a datum kink gets a stable code despite refinement noise.
    """
    i = bisect.bisect_right(bp, c)
    if i > 0 and c - bp[i - 1] <= snap:
        return 2 * i - 1
    if i < len(bp) and bp[i] - c <= snap:
        return 2 * i + 1
    return 2 * i


def _argmin_code(side: str, data: InitialData, x: float, t: float,
                 search: SearchSpec) -> tuple:
    """Discrete smoothness class of the minimizer at one point.

    The limit field is analytic wherever the active branch, the datum piece
    under the argmin, and the set of active rectangle faces all stay fixed;
    each entry here changes exactly when one of those switches, so equal
    codes at two abscissas certify (up to scan pitch) one smooth formula
    between them.
    """
    sol = limit_U(side, data, x, t, search)
    br = sol.active_branch
    p = sol.results[br.index - 1].argmin
    snap_x = _FEATURE_SNAP * (1.0 + t)
    snap_t = _FEATURE_SNAP * t
    bits = 1 if p.xi <= snap_x else 0
    if br.index == 3:
        coord = p.xi if side == "R" else -p.xi
    elif br.index == 2:
        coord = -p.xi
        if p.tau <= snap_t:
            bits |= 2
        if t - p.tau <= snap_t:
            bits |= 4
    else:
        coord = p.xi
        if p.tau <= snap_t:
            bits |= 2
        if t - p.tau <= snap_t:
            bits |= 4
        s = p.u / p.tau if p.tau > snap_t else 0.0
        if s <= _FEATURE_SNAP:
            bits |= 8
        if s >= 1.0 - _FEATURE_SNAP:
            bits |= 16
    return br.index, _piece_code(data.breakpoints, coord, snap_x), bits


def _features_at(side: str, data: InitialData, t: float, search: SearchSpec):
    """(shocks, kinks) abscissas on one side at time t, cached like curves.

    Interfaces separate source cells from classical cells, but the field
    keeps structure inside the classical cells too: jumps born from the
    datum, rarefaction edges, and boundaries where the minimizer slides
    onto a different datum piece or rectangle face.  Every one of those
    changes the argmin code, so scan the reachable range for code changes
    and pin each one down to _SHOCK_LOCATE_TOL by bisection on the code.
    A velocity jump above _SHOCK_JUMP_TOL across the located point makes
    it a shock; anything milder is a kink.  Distinct features closer
    together than the scan pitch may be resolved as one.
    """
    if not data.breakpoints:
        # a constant datum has one global piece and the minimizer's face
        # set only switches across interfaces, already in the split set
        return (), ()
    key = (side, data, round(t, 12), search)
    hit = _FEATURE_CACHE.get(key)
    if hit is not None:
        return hit
    reach = (data.bound + 1.0) * t + 1.0
    if side == "R":
        lo = _TRACE_OFFSET
        hi = max(data.breakpoints[-1], 0.0) + reach
    else:
        lo = min(data.breakpoints[0], 0.0) - reach
        hi = -_TRACE_OFFSET

    def probe_u(x: float) -> float:
        for shift in (0.0, 1e-7, -1e-7):
            try:
                return limit_velocity(side, data, x + shift, t, search)
            except AmbiguousMinimizer:
                continue
        return math.nan

    curves = _curves_at(side, data, t, search)
    xs = np.linspace(lo, hi, _FEATURE_SCAN_NODES)
    codes = [_argmin_code(side, data, float(x), t, search) for x in xs]
    shocks, kinks = [], []
    for x0, x1, c0, c1 in zip(xs[:-1], xs[1:], codes[:-1], codes[1:]):
        if c0 == c1:
            continue
        if any(x0 <= c <= x1 for c in curves):
            continue  # the switch at an interface is already split there
        a_, b_ = float(x0), float(x1)
        while b_ - a_ > _SHOCK_LOCATE_TOL:
            m = 0.5 * (a_ + b_)
            if _argmin_code(side, data, m, t, search) == c0:
                a_ = m
            else:
                b_ = m
        pos = 0.5 * (a_ + b_)
        if abs(pos) <= _FEATURE_FLOOR:
            # edge of the branch-tie band around the source line, not field
            # structure; splitting there would put quadrature nodes inside
            # the band, where pointwise velocity is genuinely ambiguous
            continue
        ua, ub = probe_u(pos - 1e-7), probe_u(pos + 1e-7)
        if math.isfinite(ua) and math.isfinite(ub) and abs(ub - ua) > _SHOCK_JUMP_TOL:
            shocks.append(pos)
        else:
            kinks.append(pos)
    hit = (tuple(shocks), tuple(kinks))
    if len(_FEATURE_CACHE) >= _FEATURE_CACHE_LIMIT:
        _FEATURE_CACHE.pop(next(iter(_FEATURE_CACHE)))
    _FEATURE_CACHE[key] = hit
    return hit


def _shocks_at(side: str, data: InitialData, t: float, search: SearchSpec):
    """Data-driven shock abscissas on one side at time t."""
    return _features_at(side, data, t, search)[0]


def _x_segments(data, a, b, t, search):
    """Edges of x-integration cells at time t: box ends, source line, curves."""
    edges = [a, b]
    if a < 0.0 < b:
        edges.append(0.0)
    if b > 0.0:
        edges.extend(v for v in _curves_at("R", data, t, search) if a < v < b)
        shocks, kinks = _features_at("R", data, t, search)
        edges.extend(v for v in shocks + kinks if a < v < b)
    if a < 0.0:
        edges.extend(v for v in _curves_at("L", data, t, search) if a < v < b)
        shocks, kinks = _features_at("L", data, t, search)
        edges.extend(v for v in shocks + kinks if a < v < b)
    edges = sorted(edges)
    # merge slivers thinner than the interface bisection tolerance
    kept = [edges[0]]
    for v in edges[1:]:
        if v - kept[-1] > 1e-6:
            kept.append(v)
    kept[-1] = b
    return kept


def inviscid_weak_residual(
    data: InitialData,
    u_field,
    test_fn: TestFunction,
    q: QuadratureSpec | None = None,
    search: SearchSpec | None = None,
    t_panels: int = 6,
    t_nodes: int = 8,
    x_nodes: int = 10,
) -> float:
    """Weak residual of ``u_t + (u^2/2)_x = delta_0`` against one bump.

    Returns ``INT INT [u phi_t + (u^2/2) phi_x] dx dt + INT phi(0, t) dt
    + INT u0(x) phi(x, 0) dx`` (zero for an exact weak solution).  The inner
    x-quadrature splits its cells at the source line, at both sides'
    interface curves, and at the data-driven shocks and kinks located by
    the argmin-code scan, so a discontinuous limit field is integrated
    piecewise-smoothly; curve locations are cached per (side, datum, time).
    """
    search = search or SearchSpec()
    a, b, t0, t1 = test_fn.box
    gl_t, gw_t = np.polynomial.legendre.leggauss(t_nodes)
    gl_x, gw_x = np.polynomial.legendre.leggauss(x_nodes)

    total = 0.0
    t_edges = np.linspace(t0, t1, t_panels + 1)
    for p_lo, p_hi in zip(t_edges[:-1], t_edges[1:]):
        mid, half = 0.5 * (p_hi + p_lo), 0.5 * (p_hi - p_lo)
        for zt, wt in zip(gl_t, gw_t):
            tv = float(mid + half * zt)
            if tv <= 0.0:
                continue
            row = 0.0
            seg = _x_segments(data, a, b, tv, search)
            for s_lo, s_hi in zip(seg[:-1], seg[1:]):
                smid, shalf = 0.5 * (s_hi + s_lo), 0.5 * (s_hi - s_lo)
                for zx, wx in zip(gl_x, gw_x):
                    xv = float(smid + shalf * zx)
                    u = u_field(xv, tv)
                    row += shalf * wx * (
                        u * test_fn.dt(xv, tv)
                        + 0.5 * u * u * test_fn.dx(xv, tv)
                    )
            # the source line contributes phi(0, t) whenever it is in the box
            if a < 0.0 < b:
                row += test_fn(0.0, tv)
            total += half * wt * row

    if t0 == 0.0:
        edges = sorted({a, b, 0.0, *data.breakpoints})
        edges = [v for v in edges if a <= v <= b]
        for lo, hi in zip(edges, edges[1:]):
            mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
            for zx, wx in zip(gl_x, gw_x):
                xv = float(mid + half * zx)
                total += half * wx * data.velocity(xv) * test_fn(xv, 0.0)
    return total


# ---------------------------------------------------------------------------
# jump conditions at the source and at the interfaces
# ---------------------------------------------------------------------------

def flux_jump_at_source(
    data: InitialData,
    t: float,
    search: SearchSpec | None = None,
) -> float:
    """``u(0+)^2/2 - u(0-)^2/2`` from one-sided limits; the source pins it at 1."""
    if t <= 0.0:
        raise OutOfRange(f"t must be positive, got {t}")
    u_r = limit_velocity("R", data, _TRACE_OFFSET, t, search)
    u_l = limit_velocity("L", data, -_TRACE_OFFSET, t, search)
    return 0.5 * u_r * u_r - 0.5 * u_l * u_l


def _onsided_probes(side: str, xs: float) -> tuple[float, float]:
    """Probe abscissas just inside and outside of an interface at xs.

    Probes never get closer to the source line than the trace offset: the
    velocity's argmin sensitivity blows up like 1/|x| there.  An interface
    collapsed onto the line therefore probes the same point twice, reads a
    zero jump, and is reported as not a shock, which is what it is.
    """
    off = _TRACE_OFFSET
    if side == "R":
        return max(xs - off, off), max(xs + off, off)
    return min(xs - off, -off), min(xs + off, -off)


def rankine_hugoniot_at_interface(
    data: InitialData,
    t: float,
    side: str,
    which: str,
    dt: float,
    search: SearchSpec | None = None,
) -> tuple[float, float]:
    """Interface speed two ways: curve finite difference vs. jump mean.

    ``speed_fd`` differentiates the located interface curve centrally with
    step ``dt``; ``speed_rh`` is the Rankine-Hugoniot mean of the one-sided
    velocities at time ``t``.  A genuine shock must make them agree.

    Raises :class:`NotAShock` when the one-sided values differ by 1e-3 or
    less (a continuous branch switch, e.g. a degenerate inner interface).
    """
    search = search or SearchSpec()
    if which not in ("inner", "outer"):
        raise OutOfRange(f"which must be 'inner' or 'outer', got {which!r}")
    if dt <= 0.0 or t - dt <= 0.0:
        raise OutOfRange(f"need 0 < dt < t, got dt={dt}, t={t}")
    sel = (lambda p: p.inner) if which == "inner" else (lambda p: p.outer)
    xs = sel(interfaces(side, data, t, search))
    lo_x, hi_x = _onsided_probes(side, xs)
    u_lo = limit_velocity(side, data, lo_x, t, search)
    u_hi = limit_velocity(side, data, hi_x, t, search)
    if abs(u_lo - u_hi) <= 1e-3:
        raise NotAShock(
            f"{which} interface on side {side!r} at t={t} carries no jump "
            f"(one-sided values {u_lo:.6f}, {u_hi:.6f})"
        )
    speed_rh = 0.5 * (u_lo + u_hi)
    x_minus = sel(interfaces(side, data, t - dt, search))
    x_plus = sel(interfaces(side, data, t + dt, search))
    speed_fd = (x_plus - x_minus) / (2.0 * dt)
    return speed_fd, speed_rh


def interface_entropy_measure(
    data: InitialData,
    t_grid,
    search: SearchSpec | None = None,
) -> float:
    """Fraction of grid times with ``u(0+) > 0`` and ``u(0-) < 0`` at once.

    This is the diagnostic the discontinuous-flux literature uses to sort
    competing limits; it is reported, never asserted.  An empty grid gives 0.
    The sign tests carry a 1e-4 dead zone: one-sided velocities read at the
    trace offset are exact only to the argmin noise, and a vanishing
    one-sided state must not count as inflow.
    """
    ts = [float(v) for v in t_grid]
    if any(t1 <= t0 for t0, t1 in zip(ts, ts[1:])):
        raise OutOfRange("t_grid must be increasing")
    if any(t <= 0.0 for t in ts):
        raise OutOfRange("t_grid entries must be positive")
    if not ts:
        return 0.0
    noise = 1e-4
    hits = 0
    for t in ts:
        u_r = limit_velocity("R", data, _TRACE_OFFSET, t, search)
        u_l = limit_velocity("L", data, -_TRACE_OFFSET, t, search)
        if u_r > noise and u_l < -noise:
            hits += 1
    return hits / len(ts)
