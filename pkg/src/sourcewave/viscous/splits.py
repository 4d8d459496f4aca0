"""Seven-term split of each half-plane field into signed heat integrals.

Each side of the source decomposes into: two image-kernel integrals over the
initial data (1, 2), one scaled-Bessel boundary term (3), two three-fold
integrals coupling the source to the data (4, 5), and two two-fold pure
source terms (6, 7).  Only the value ``g(0) = 1`` of the boundary trace
enters, so this module needs no :class:`BoundaryTrace`.

Recombination identities (checked in tests against the direct field)::

    R = e^{-t/2eps} (T1 - T2 + T3 + T4 + T5 - T6 - T7)      (x > 0)
    L = -T1 + T2 + T3 + T4 + T5 - T6 - T7                   (x < 0)

with the companion positivity facts ``T1 - T2 >= 0`` (``-T1 + T2`` on the
left) and ``T3 - T6 - T7 >= 0``.

All time-like integrals are evaluated after the Gaussian substitution
``tau = t - x^2/(4 eps v^2)``; inner parameter integrals use ``u = p^2`` and
``u = tau - q^2`` splits (or ``u = tau sin^2 alpha``) to flatten the
inverse-square-root endpoints.  The innermost spatial moment

    P(d) = INT_0^inf xi exp(-(xi^2/(2d) + V(s xi)) / (2 eps)) dxi

is tabulated once per datum as ``W(sqrt(d)) = log P - log d`` and
interpolated; ``W`` extends continuously to ``W(0) = log(2 eps)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..errors import OutOfRange
from ..initial_data import InitialData, Viscosity, as_viscosity
from ..quadrature import QuadratureSpec, log_quad
from ..specfun import SignedLog, besseli0_scaled, log_sum_exp
from .cutoffs import merged_splits, xi_breaks, xi_peak_candidates, xi_upper
from .field import LogHeatValue
from .trace import _require_quadrature_eps

__all__ = ["SplitTerms", "split_terms_right", "split_terms_left"]

_LOG_2_SQRT_PI = math.log(2.0 / math.sqrt(math.pi))
_NEG_INF = float("-inf")

_SIGNATURE_RIGHT = (1, -1, 1, 1, 1, -1, -1)
_SIGNATURE_LEFT = (-1, 1, 1, 1, 1, -1, -1)


@dataclass(frozen=True)
class SplitTerms:
    """The seven positive split terms of one half-plane field value."""

    side: str  # "right" or "left"
    eps: float
    x: float
    t: float
    terms: tuple[SignedLog, ...]

    def __post_init__(self) -> None:
        if self.side not in ("right", "left"):
            raise ValueError(f"side must be 'right' or 'left', got {self.side!r}")
        if len(self.terms) != 7:
            raise ValueError("exactly seven terms required")

    @property
    def _signature(self) -> tuple[int, ...]:
        return _SIGNATURE_RIGHT if self.side == "right" else _SIGNATURE_LEFT

    def recombined(self) -> LogHeatValue:
        """Signed sum of the terms, with the right side's damping restored."""
        total = log_sum_exp(
            [(sgn * term.sign, term.log) for sgn, term in zip(self._signature, self.terms)]
        )
        shift = -self.t / (2.0 * self.eps) if self.side == "right" else 0.0
        return LogHeatValue(total.sign, total.log + shift, self.eps)

    def data_pair(self) -> SignedLog:
        """Signed combination of the two image terms; nonnegative in exact math."""
        s = self._signature
        return log_sum_exp([(s[0] * self.terms[0].sign, self.terms[0].log),
                            (s[1] * self.terms[1].sign, self.terms[1].log)])

    def source_pair(self) -> SignedLog:
        """Bessel term minus the two pure source terms; nonnegative in exact math."""
        s = self._signature
        return log_sum_exp([(s[2] * self.terms[2].sign, self.terms[2].log),
                            (s[5] * self.terms[5].sign, self.terms[5].log),
                            (s[6] * self.terms[6].sign, self.terms[6].log)])


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _log_k(y: np.ndarray) -> np.ndarray:
    """log[(1 - e^{-y})/y], stable down to y = 0."""
    y = np.asarray(y, dtype=float)
    small = y < 1e-8
    safe = np.where(small, 1.0, y)
    big = np.log(-np.expm1(-safe)) - np.log(safe)
    return np.where(small, np.log1p(-0.5 * np.where(small, y, 0.0)), big)


_i0_scaled_vec = np.vectorize(besseli0_scaled, otypes=[float])


_MOMENT_CACHE: dict[tuple, PchipInterpolator] = {}


def _moment_table(
    data: InitialData, e: float, mirror: bool, s_max: float, q: QuadratureSpec
) -> PchipInterpolator:
    """Interpolant of W(s) = log P(s^2) - 2 log s on [0, s_max]."""
    key = (data, e, mirror, math.ceil(s_max * 4.0) / 4.0, q.rel_tol)
    hit = _MOMENT_CACHE.get(key)
    if hit is not None:
        return hit
    s_hi = key[3]
    n = max(200, int(300 * s_hi))
    s_nodes = np.linspace(0.0, s_hi, n + 1)
    w = np.empty_like(s_nodes)
    w[0] = math.log(2.0 * e)
    sgn = -1.0 if mirror else 1.0
    for i in range(1, len(s_nodes)):
        d = float(s_nodes[i]) ** 2
        cut = xi_upper(data, e, d, 0.0, mirror, q.xi_cutoff_sigmas)
        splits = merged_splits(cut, xi_breaks(data, mirror),
                               xi_peak_candidates(data, e, d, 0.0, mirror))

        def log_f(xi: np.ndarray) -> np.ndarray:
            v = data.cumulative_array(sgn * xi)
            return np.log(xi) - xi * xi / (4.0 * e * d) - v / (2.0 * e)

        lv, _ = log_quad(log_f, 0.0, cut, q, split_points=splits)
        w[i] = lv - 2.0 * math.log(float(s_nodes[i]))
    interp = PchipInterpolator(s_nodes, w, extrapolate=False)
    _MOMENT_CACHE[key] = interp
    return interp


def _log_inner_m(
    tau: float,
    e: float,
    grow: bool,
    w_interp: PchipInterpolator,
    q: QuadratureSpec,
) -> float:
    """log M(tau) for the three-fold terms.

    M(tau) = INT_0^tau c(u) u^{-1/2} (tau-u)^{-1/2} e^{W(sqrt(tau-u))} du with
    c(u) = e^{u/2eps} k(u/2eps) when ``grow`` (front factor (e^{u/2eps}-1))
    and c(u) = k(u/2eps) otherwise (front factor (1-e^{-u/2eps})).
    """
    if tau <= 0.0:
        return _NEG_INF
    half = math.sqrt(0.5 * tau)

    def piece_lo(p: np.ndarray) -> np.ndarray:  # u = p^2
        u = p * p
        y = u / (2.0 * e)
        base = math.log(2.0) + _log_k(y) - 0.5 * np.log(tau - u) \
            + w_interp(np.sqrt(tau - u))
        return base + (y if grow else 0.0)

    def piece_hi(qv: np.ndarray) -> np.ndarray:  # u = tau - q^2
        u = tau - qv * qv
        y = u / (2.0 * e)
        base = math.log(2.0) + _log_k(y) - 0.5 * np.log(u) + w_interp(np.abs(qv))
        return base + (y if grow else 0.0)

    lo, _ = log_quad(piece_lo, 0.0, half, q)
    hi, _ = log_quad(piece_hi, 0.0, half, q)
    return log_sum_exp([(1, lo), (1, hi)]).log


def _log_inner_k(tau: float, e: float, grow: bool, q: QuadratureSpec) -> float:
    """log K(tau) = log INT_0^{pi/2} 2 [e^y] k(y) d alpha, y = tau sin^2(a)/2eps."""
    if tau <= 0.0:
        return _NEG_INF

    def integrand(alpha: np.ndarray) -> np.ndarray:
        y = tau * np.sin(alpha) ** 2 / (2.0 * e)
        base = math.log(2.0) + _log_k(y)
        return base + (y if grow else 0.0)

    lv, _ = log_quad(integrand, 0.0, 0.5 * math.pi, q)
    return lv


def _outer_gauss(
    e: float,
    x: float,
    t: float,
    q: QuadratureSpec,
    bound: float,
    tau_log_factor: Callable[[np.ndarray], np.ndarray],
    tau_weight: Callable[[float], float] | None = None,
) -> float:
    """log of (2/sqrt(pi)) INT F(tau(v)) e^{-v^2} dv over the Gaussian window.

    ``tau_log_factor`` maps an array of tau values to the log of any smooth
    vectorizable factor; ``tau_weight`` (scalar, optional) adds the log of a
    per-node factor that itself needs inner quadrature.
    """
    ax = abs(x)
    v0 = ax / (2.0 * math.sqrt(e * t))
    vmax = v0 + math.sqrt((1.0 + bound * bound) * t / e + 90.0) + 3.0
    vstar = math.sqrt(ax / (2.0 * math.sqrt(2.0) * e))
    splits = tuple(s for s in (vstar,) if v0 < s < vmax)
    xx = x * x

    def log_f(v: np.ndarray) -> np.ndarray:
        tau = np.clip(t - xx / (4.0 * e * v * v), 0.0, t)
        out = tau_log_factor(tau) - v * v
        if tau_weight is not None:
            extra = np.array([tau_weight(float(tv)) for tv in tau])
            out = out + extra
        return out + _LOG_2_SQRT_PI

    lv, _ = log_quad(log_f, v0, vmax, q, split_points=splits)
    return lv


# ---------------------------------------------------------------------------
# the seven terms
# ---------------------------------------------------------------------------

def _image_term(
    data: InitialData, e: float, x: float, t: float, q: QuadratureSpec,
    mirror_data: bool, far: bool,
) -> float:
    """Terms 1 and 2: plain image-kernel integrals against theta0(+-xi)."""
    ax = abs(x)
    center = -ax if far else ax
    sgn = -1.0 if mirror_data else 1.0
    cut = xi_upper(data, e, t, max(0.0, center), mirror_data, q.xi_cutoff_sigmas)
    splits = merged_splits(cut, xi_breaks(data, mirror_data),
                           xi_peak_candidates(data, e, t, max(0.0, center), mirror_data),
                           (ax,))

    def log_f(xi: np.ndarray) -> np.ndarray:
        v = data.cumulative_array(sgn * xi)
        return -((xi - center) ** 2) / (4.0 * e * t) - v / (2.0 * e)

    lv, _ = log_quad(log_f, 0.0, cut, q, split_points=splits)
    return lv - math.log(2.0 * math.sqrt(math.pi * e * t))


def _split_terms(data: InitialData, eps: Viscosity | float, x: float, t: float,
                 q: QuadratureSpec | None, side: str) -> SplitTerms:
    visc = as_viscosity(eps)
    e = _require_quadrature_eps(visc)
    q = q or QuadratureSpec()
    if t <= 0.0:
        raise OutOfRange(f"t must be positive, got {t}")
    mirror = side == "left"
    bound = data.bound
    s_max = math.sqrt(t)
    w_right = _moment_table(data, e, False, s_max, q)
    w_left = _moment_table(data, e, True, s_max, q)

    # Terms 1-2.  On the right the near image carries theta0(xi); on the left
    # the data is mirrored and the (x - xi)^2 kernel is the far one.
    t1 = _image_term(data, e, x, t, q, mirror, far=mirror)
    t2 = _image_term(data, e, x, t, q, mirror, far=not mirror)

    half = 0.5 / e

    # Term 3: scaled-Bessel boundary term.
    if side == "right":
        t3 = _outer_gauss(e, x, t, q, bound,
                          lambda tau: np.log(_i0_scaled_vec(tau / (4.0 * e))) + tau * half)
    else:
        t3 = _outer_gauss(e, x, t, q, bound,
                          lambda tau: np.log(_i0_scaled_vec(tau / (4.0 * e))))

    # Terms 4-5: three-fold source-data coupling.
    zero = lambda tau: np.zeros_like(tau)
    grow_half = lambda tau: tau * half
    damp_half = lambda tau: -tau * half
    if side == "right":
        t4 = _outer_gauss(e, x, t, q, bound, zero,
                          lambda tv: _log_inner_m(tv, e, True, w_right, q))
        t5 = _outer_gauss(e, x, t, q, bound, grow_half,
                          lambda tv: _log_inner_m(tv, e, False, w_left, q))
    else:
        t4 = _outer_gauss(e, x, t, q, bound, damp_half,
                          lambda tv: _log_inner_m(tv, e, True, w_right, q))
        t5 = _outer_gauss(e, x, t, q, bound, zero,
                          lambda tv: _log_inner_m(tv, e, False, w_left, q))
    t4 -= math.log(4.0 * math.pi * e)
    t5 -= math.log(4.0 * math.pi * e)

    # Terms 6-7: two-fold pure source terms.
    if side == "right":
        t6 = _outer_gauss(e, x, t, q, bound, zero,
                          lambda tv: _log_inner_k(tv, e, True, q))
        t7 = _outer_gauss(e, x, t, q, bound, grow_half,
                          lambda tv: _log_inner_k(tv, e, False, q))
    else:
        t6 = _outer_gauss(e, x, t, q, bound, damp_half,
                          lambda tv: _log_inner_k(tv, e, True, q))
        t7 = _outer_gauss(e, x, t, q, bound, zero,
                          lambda tv: _log_inner_k(tv, e, False, q))
    t6 -= math.log(2.0 * math.pi)
    t7 -= math.log(2.0 * math.pi)

    terms = tuple(SignedLog(1, v) for v in (t1, t2, t3, t4, t5, t6, t7))
    return SplitTerms(side=side, eps=e, x=x, t=t, terms=terms)


def split_terms_right(
    data: InitialData,
    eps: Viscosity | float,
    x: float,
    t: float,
    q: QuadratureSpec | None = None,
) -> SplitTerms:
    """Seven-term split of the right-side field at ``(x, t)``, ``x > 0``."""
    if x <= 0.0:
        raise OutOfRange(f"split_terms_right needs x > 0, got {x}")
    return _split_terms(data, eps, x, t, q, "right")


def split_terms_left(
    data: InitialData,
    eps: Viscosity | float,
    x: float,
    t: float,
    q: QuadratureSpec | None = None,
) -> SplitTerms:
    """Seven-term split of the left-side field at ``(x, t)``, ``x < 0``."""
    if x >= 0.0:
        raise OutOfRange(f"split_terms_left needs x < 0, got {x}")
    return _split_terms(data, eps, x, t, q, "left")
