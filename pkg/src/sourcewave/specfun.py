"""Scalar special functions used by the heat-kernel integrals.

Everything here is implemented from scratch on purpose: the quadrature layers
need erfc/erfcx and the scaled Bessel function with known switch points and
failure modes, so the package does not lean on an external special-function
library for them.  Switch points:

* ``erfc``: Maclaurin series for ``erf`` on ``|z| < 1.5``, Lentz-evaluated
  continued fraction on ``z >= 1.5``.  (At ``z = 2`` the ``1 - erf``
  cancellation already costs ~2e-12 relative, hence the 1.5 cutoff.)
* ``besseli0_scaled``: power series on ``|z| < 15``, asymptotic series with
  optimal truncation on ``|z| >= 15``.  Below 15 the asymptotic series
  bottoms out near 1e-8 and cannot certify the default tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import NonConvergence, OutOfRange

__all__ = [
    "Accuracy",
    "SignedLog",
    "erfc",
    "erfcx",
    "besseli0_scaled",
    "log_sum_exp",
]

_SQRT_PI = math.sqrt(math.pi)

# Series/continued-fraction switch for erfc and erfcx.
_ERFC_SWITCH = 1.5
# Power-series/asymptotic switch for the scaled Bessel function.
_I0_SWITCH = 15.0


@dataclass(frozen=True)
class Accuracy:
    """Accuracy request for the scalar special functions.

    ``rel_tol`` is the target relative error; implementations stop once the
    running term falls below it (and raise :class:`NonConvergence` when the
    method in the active regime cannot certify it).  ``abs_floor`` is the
    magnitude below which results are reported as 0 without complaint.
    """

    rel_tol: float = 1e-12
    abs_floor: float = 1e-300

    def __post_init__(self) -> None:
        if not (0.0 < self.rel_tol < 1e-3):
            raise ValueError(f"rel_tol must lie in (0, 1e-3), got {self.rel_tol}")
        if self.abs_floor <= 0.0:
            raise ValueError("abs_floor must be positive")


_DEFAULT_ACCURACY = Accuracy()


class SignedLog(NamedTuple):
    """A real number stored as (sign, log of absolute value)."""

    sign: int
    log: float

    def value(self) -> float:
        return self.sign * math.exp(self.log)


def _erf_series(z: float, rel_tol: float) -> float:
    # erf(z) = (2/sqrt(pi)) * sum_n (-1)^n z^(2n+1) / (n! (2n+1)),
    # decent for |z| < 1.5 where the alternating terms never exceed ~1.3.
    zz = z * z
    term = z
    total = z
    n = 0
    while True:
        n += 1
        term *= -zz / n
        contrib = term / (2 * n + 1)
        total += contrib
        if abs(contrib) <= 0.25 * rel_tol * abs(total):
            return (2.0 / _SQRT_PI) * total
        if n > 200:
            raise NonConvergence(f"erf series stalled at z={z}")


def _erfc_cf(z: float, rel_tol: float) -> float:
    # Continued fraction F(z) = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))),
    # with erfc(z) = exp(-z^2) F(z) / sqrt(pi).  Modified Lentz iteration.
    tiny = 1e-300
    f = tiny
    c = f
    d = 0.0
    n = 0
    while n < 600:
        n += 1
        a = 1.0 if n == 1 else 0.5 * (n - 1)
        b = z
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 0.25 * rel_tol:
            return f
    raise NonConvergence(f"erfc continued fraction stalled at z={z}")


def erfc(z: float, accuracy: Accuracy | None = None) -> float:
    """Complementary error function.

    Accurate to ``accuracy.rel_tol`` (default 1e-12) for ``|z| <= 26``; for
    larger positive ``z`` the result underflows gracefully through subnormals.
    Negative arguments use the reflection ``erfc(-z) = 2 - erfc(z)``.
    """
    acc = accuracy or _DEFAULT_ACCURACY
    z = float(z)
    if math.isnan(z):
        return math.nan
    if z < 0.0:
        return 2.0 - erfc(-z, acc)
    if z < _ERFC_SWITCH:
        return 1.0 - _erf_series(z, acc.rel_tol)
    # exp(-z^2) with z up to ~26.6 stays above the subnormal range; past
    # that the product underflows to 0, which the contract allows.
    scale = math.exp(-z * z)
    if scale == 0.0:
        return 0.0
    val = scale * _erfc_cf(z, acc.rel_tol) / _SQRT_PI
    return 0.0 if abs(val) < acc.abs_floor else val


def erfcx(z: float, accuracy: Accuracy | None = None) -> float:
    """Scaled complementary error function ``exp(z^2) erfc(z)`` for ``z >= 0``.

    Rejects negative arguments: ``exp(z^2) erfc(z)`` overflows there and no
    caller in this package wants it.
    """
    acc = accuracy or _DEFAULT_ACCURACY
    z = float(z)
    if math.isnan(z):
        return math.nan
    if z < 0.0:
        raise OutOfRange(f"erfcx requires z >= 0, got {z}")
    if z < _ERFC_SWITCH:
        return math.exp(z * z) * (1.0 - _erf_series(z, acc.rel_tol))
    return _erfc_cf(z, acc.rel_tol) / _SQRT_PI


def _i0_scaled_series(z: float, rel_tol: float) -> float:
    # exp(-z) * sum_k (z^2/4)^k / (k!)^2.  The sum tops out near exp(z), so
    # for z < 15 everything stays comfortably inside double range.
    q = 0.25 * z * z
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if term <= 0.25 * rel_tol * total:
            return math.exp(-z) * total
        if k > 400:
            raise NonConvergence(f"I0 power series stalled at z={z}")


def _i0_scaled_asymptotic(z: float, rel_tol: float) -> float:
    # exp(-z) I0(z) ~ (2 pi z)^(-1/2) * sum_k a_k z^(-k),
    # a_0 = 1, a_{k+1} = a_k (2k+1)^2 / (8 (k+1)).  Divergent; truncate at
    # the smallest term and certify against the requested tolerance.
    term = 1.0
    total = 1.0
    k = 0
    while True:
        nxt = term * (2 * k + 1) ** 2 / (8.0 * (k + 1) * z)
        if abs(nxt) >= abs(term):
            # Smallest term reached; its size bounds the truncation error.
            if abs(term) > rel_tol * abs(total):
                raise NonConvergence(
                    f"I0 asymptotic series cannot reach rel_tol={rel_tol} at z={z}"
                )
            break
        term = nxt
        total += term
        k += 1
        if abs(term) <= 0.1 * rel_tol * abs(total):
            break
        if k > 60:
            break
    return total / math.sqrt(2.0 * math.pi * z)


def besseli0_scaled(z: float, accuracy: Accuracy | None = None) -> float:
    """Exponentially scaled modified Bessel function ``exp(-|z|) I0(z)``.

    Even in ``z``; the value always lies in ``(0, 1]`` with the maximum 1
    attained at ``z = 0``.
    """
    acc = accuracy or _DEFAULT_ACCURACY
    z = abs(float(z))
    if math.isnan(z):
        return math.nan
    if z < _I0_SWITCH:
        return _i0_scaled_series(z, acc.rel_tol)
    return _i0_scaled_asymptotic(z, acc.rel_tol)


def log_sum_exp(terms: Iterable[tuple[int, float] | SignedLog]) -> SignedLog:
    """Signed log-domain sum of ``(sign, log_magnitude)`` terms.

    Returns ``SignedLog(sign, log)`` with ``sign * exp(log)`` equal to
    ``sum_i sign_i * exp(log_i)``.  The shifted exponentials are accumulated
    with :func:`math.fsum`, so the result is exactly invariant under
    permutation of the terms.  Exact cancellation (including an empty input)
    yields ``SignedLog(+1, -inf)``.
    """
    pairs: Sequence[tuple[int, float]] = [(int(s), float(l)) for s, l in terms]
    for s, _ in pairs:
        if s not in (-1, 1):
            raise ValueError(f"term signs must be +1 or -1, got {s}")
    finite_logs = [l for _, l in pairs if l > float("-inf")]
    if not finite_logs:
        return SignedLog(1, float("-inf"))
    m = max(finite_logs)
    if math.isinf(m):
        # +inf magnitudes: meaningful only if they all pull the same way.
        inf_signs = {s for s, l in pairs if math.isinf(l) and l > 0}
        if len(inf_signs) != 1:
            raise ValueError("conflicting infinite magnitudes in log_sum_exp")
        return SignedLog(inf_signs.pop(), math.inf)
    acc = math.fsum(s * math.exp(l - m) for s, l in pairs if l > float("-inf"))
    if acc == 0.0:
        return SignedLog(1, float("-inf"))
    return SignedLog(1 if acc > 0 else -1, m + math.log(abs(acc)))
