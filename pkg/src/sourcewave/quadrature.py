"""Adaptive Gauss-Kronrod quadrature, in linear and in log domain.

The heat-kernel integrands in this package span hundreds of orders of
magnitude (their logarithms scale like ``1/eps``), so the central integrator
works on ``log f`` directly: each 15-point Kronrod panel factors out its
maximum log before exponentiating, and panel totals are combined with a
signed log-sum-exp.  Library integrators cannot be used this way, hence the
in-repo implementation.  The (15,7) pair, worst-panel-first refinement and
subdivision cap mirror standard practice.

Everything is deterministic: the refinement order is a heap keyed by panel
error with an insertion-counter tiebreak, and integrand evaluations are pure.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import NonConvergence
from .specfun import SignedLog, log_sum_exp

__all__ = [
    "QuadratureSpec",
    "log_quad",
    "log_fixed_composite",
    "quad",
    "signed_quad",
    "SignedPiece",
]

# 15-point Kronrod abscissae (positive half) with the embedded 7-point Gauss
# rule on the odd-indexed nodes.  QUADPACK dqk15 constants.
_XGK_HALF = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)

_NODES = np.array([-x for x in _XGK_HALF] + [0.0] + list(reversed(_XGK_HALF)))
_WEIGHTS_K = np.array(list(_WGK[:7]) + [_WGK[7]] + list(reversed(_WGK[:7])))
_weights_g = np.zeros(15)
for _i, _w in enumerate(_WG):
    _weights_g[2 * _i + 1] = _w
    _weights_g[13 - 2 * _i] = _w
_weights_g[7] = _WG[3]
_WEIGHTS_G = _weights_g
del _weights_g

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budgets for the viscous quadrature layer.

    ``rel_tol`` bounds the relative error of every 1-D integral;
    ``max_subdivisions`` caps adaptive bisections per integral;
    ``xi_cutoff_sigmas`` sets where spatial Gaussian tails are truncated
    (in units of the kernel width ``sqrt(2 eps t)``, measured from the peak);
    ``time_nodes_per_unit`` fixes the boundary-trace grid resolution.
    """

    rel_tol: float = 1e-8
    max_subdivisions: int = 50
    xi_cutoff_sigmas: float = 12.0
    time_nodes_per_unit: int = 400

    def __post_init__(self) -> None:
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")
        if self.xi_cutoff_sigmas < 4.0:
            raise ValueError("xi_cutoff_sigmas below 4 would bias the tails")
        if self.time_nodes_per_unit < 16:
            raise ValueError("time_nodes_per_unit must be at least 16")


def _initial_edges(a: float, b: float, split_points: Sequence[float]) -> list[float]:
    edges = [a, b]
    for s in split_points:
        if a < s < b:
            edges.append(float(s))
    return sorted(set(edges))


class _LogPanel(NamedTuple):
    log_value: float  # log of the Kronrod estimate of the panel integral
    log_error: float  # log of |K15 - G7| on the panel
    lo: float
    hi: float


def _log_panel(log_f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> _LogPanel:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    g = np.asarray(log_f(mid + half * _NODES), dtype=float)
    m = float(np.max(g))
    if m == _NEG_INF or math.isnan(m):
        return _LogPanel(_NEG_INF, _NEG_INF, lo, hi)
    w = np.exp(g - m)
    k15 = float(np.dot(_WEIGHTS_K, w))
    g7 = float(np.dot(_WEIGHTS_G, w))
    err = abs(k15 - g7)
    log_half = math.log(half) if half > 0 else _NEG_INF
    log_value = m + math.log(k15) + log_half if k15 > 0 else _NEG_INF
    log_error = m + math.log(err) + log_half if err > 0 else _NEG_INF
    return _LogPanel(log_value, log_error, lo, hi)


def _log_total(panels: Sequence[_LogPanel]) -> tuple[float, float]:
    vals = [p.log_value for p in panels if p.log_value > _NEG_INF]
    errs = [p.log_error for p in panels if p.log_error > _NEG_INF]
    tot_v = log_sum_exp([(1, v) for v in vals]).log if vals else _NEG_INF
    tot_e = log_sum_exp([(1, e) for e in errs]).log if errs else _NEG_INF
    return tot_v, tot_e


def log_quad(
    log_f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec,
    split_points: Sequence[float] = (),
    log_abs_tol: float = _NEG_INF,
) -> tuple[float, float]:
    """Integrate ``exp(log_f)`` over ``[a, b]``; returns ``(log I, log err)``.

    The integrand must be nonnegative (supplied as its log; ``-inf`` marks
    zeros).  Convergence when the accumulated error satisfies
    ``err <= rel_tol * I`` or ``log err <= log_abs_tol``; otherwise the
    subdivision budget is spent and :class:`NonConvergence` is raised.
    ``split_points`` seed panel edges at known kinks or peaks.
    """
    if not (b >= a):
        raise ValueError(f"bad interval [{a}, {b}]")
    if b == a:
        return _NEG_INF, _NEG_INF
    edges = _initial_edges(a, b, split_points)
    panels = [_log_panel(log_f, lo, hi) for lo, hi in zip(edges, edges[1:])]
    log_rel = math.log(spec.rel_tol)

    heap: list[tuple[float, int, _LogPanel]] = []
    counter = 0
    for p in panels:
        heapq.heappush(heap, (-p.log_error, counter, p))
        counter += 1

    alive = {id(p): p for p in panels}
    for _ in range(spec.max_subdivisions):
        tot_v, tot_e = _log_total(list(alive.values()))
        if tot_e <= max(log_rel + tot_v, log_abs_tol):
            return tot_v, tot_e
        while heap and id(heap[0][2]) not in alive:
            heapq.heappop(heap)
        if not heap:
            return tot_v, tot_e
        _, _, worst = heapq.heappop(heap)
        del alive[id(worst)]
        mid = 0.5 * (worst.lo + worst.hi)
        for lo, hi in ((worst.lo, mid), (mid, worst.hi)):
            child = _log_panel(log_f, lo, hi)
            alive[id(child)] = child
            heapq.heappush(heap, (-child.log_error, counter, child))
            counter += 1

    tot_v, tot_e = _log_total(list(alive.values()))
    if tot_e <= max(log_rel + tot_v, log_abs_tol):
        return tot_v, tot_e
    raise NonConvergence(
        f"log-domain quadrature on [{a}, {b}] stalled: log_value={tot_v:.6g}, "
        f"log_error={tot_e:.6g} after {spec.max_subdivisions} subdivisions"
    )


def log_fixed_composite(
    log_f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    n_panels: int,
) -> float:
    """Non-adaptive composite Kronrod rule in log domain; returns ``log I``.

    Used where several related integrals must share the exact same mesh so
    their quadrature errors cancel in differences (finite-difference stencils
    on top of quadrature results).  One integrand call evaluates every node.
    """
    if b <= a:
        return _NEG_INF
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    pts = (mids[:, None] + half * _NODES[None, :]).ravel()
    g = np.asarray(log_f(pts), dtype=float).reshape(n_panels, 15)
    m = float(np.max(g))
    if m == _NEG_INF or math.isnan(m):
        return _NEG_INF
    total = float(np.sum(np.exp(g - m) @ _WEIGHTS_K))
    if total <= 0.0:
        return _NEG_INF
    return m + math.log(total) + math.log(half)


class SignedPiece(NamedTuple):
    """One single-signed component of a signed integral."""

    sign: int
    log_f: Callable[[np.ndarray], np.ndarray]
    lo: float
    hi: float
    split_points: tuple[float, ...] = ()


def signed_quad(pieces: Sequence[SignedPiece], spec: QuadratureSpec) -> SignedLog:
    """Sum of single-signed log-domain integrals, cancellation-aware.

    Each piece is integrated to ``rel_tol`` on its own; if the combined value
    shows heavy cancellation against the largest piece, the pieces are
    re-integrated with an absolute target tied to the combined magnitude so
    the final relative error still holds.
    """
    results = []
    for p in pieces:
        v, _ = log_quad(p.log_f, p.lo, p.hi, spec, p.split_points)
        results.append((p.sign, v))
    total = log_sum_exp(results)
    peak = max((v for _, v in results), default=_NEG_INF)
    if total.log == _NEG_INF or peak == _NEG_INF:
        return total
    if peak - total.log < math.log(20.0):
        return total
    # Cancellation beyond a factor ~20: redo with an absolute error target
    # below the combined magnitude.
    log_abs = total.log + math.log(spec.rel_tol)
    tight = QuadratureSpec(
        rel_tol=spec.rel_tol,
        max_subdivisions=4 * spec.max_subdivisions,
        xi_cutoff_sigmas=spec.xi_cutoff_sigmas,
        time_nodes_per_unit=spec.time_nodes_per_unit,
    )
    results = []
    for p in pieces:
        v, _ = log_quad(p.log_f, p.lo, p.hi, tight, p.split_points, log_abs_tol=log_abs)
        results.append((p.sign, v))
    return log_sum_exp(results)


class _Panel(NamedTuple):
    value: float
    error: float
    lo: float
    hi: float


def _panel(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> _Panel:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    y = np.asarray(f(mid + half * _NODES), dtype=float)
    k15 = half * float(np.dot(_WEIGHTS_K, y))
    g7 = half * float(np.dot(_WEIGHTS_G, y))
    return _Panel(k15, abs(k15 - g7), lo, hi)


def quad(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec,
    split_points: Sequence[float] = (),
    abs_tol: float = 0.0,
) -> tuple[float, float]:
    """Linear-domain adaptive Gauss-Kronrod; returns ``(value, error)``.

    For integrands of moderate dynamic range (the boundary trace).  Converges
    when ``err <= max(rel_tol * |value|, abs_tol)``.
    """
    if not (b >= a):
        raise ValueError(f"bad interval [{a}, {b}]")
    if b == a:
        return 0.0, 0.0
    edges = _initial_edges(a, b, split_points)
    alive: dict[int, _Panel] = {}
    heap: list[tuple[float, int, _Panel]] = []
    counter = 0
    for lo, hi in zip(edges, edges[1:]):
        p = _panel(f, lo, hi)
        alive[id(p)] = p
        heapq.heappush(heap, (-p.error, counter, p))
        counter += 1

    for _ in range(spec.max_subdivisions):
        value = math.fsum(p.value for p in alive.values())
        error = math.fsum(p.error for p in alive.values())
        if error <= max(spec.rel_tol * abs(value), abs_tol):
            return value, error
        while heap and id(heap[0][2]) not in alive:
            heapq.heappop(heap)
        if not heap:
            return value, error
        _, _, worst = heapq.heappop(heap)
        del alive[id(worst)]
        mid = 0.5 * (worst.lo + worst.hi)
        for lo, hi in ((worst.lo, mid), (mid, worst.hi)):
            child = _panel(f, lo, hi)
            alive[id(child)] = child
            heapq.heappush(heap, (-child.error, counter, child))
            counter += 1

    value = math.fsum(p.value for p in alive.values())
    error = math.fsum(p.error for p in alive.values())
    if error <= max(spec.rel_tol * abs(value), abs_tol):
        return value, error
    raise NonConvergence(
        f"quadrature on [{a}, {b}] stalled: value={value:.6g}, error={error:.6g} "
        f"after {spec.max_subdivisions} subdivisions"
    )
