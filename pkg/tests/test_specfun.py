"""Special-function checks against high-precision reference tables.

The tables were produced offline with a 40-digit arbitrary-precision
evaluation and frozen here so the test run needs nothing beyond the
package's own dependencies.
"""
import math

import pytest
from hypothesis import given, strategies as st

from sourcewave import (
    Accuracy,
    OutOfRange,
    SignedLog,
    besseli0_scaled,
    erfc,
    erfcx,
    log_sum_exp,
)

_ERFC_TABLE = [
    (-6.0, 2.0),
    (-2.5, 1.999593047982555),
    (-1.0, 1.8427007929497148),
    (-0.3, 1.3286267594591274),
    (0.0, 1.0),
    (1e-08, 0.9999999887162083),
    (0.25, 0.7236736098317631),
    (0.5, 0.4795001221869535),
    (1.0, 0.15729920705028513),
    (2.0, 0.004677734981047266),
    (3.5, 7.430983723414128e-07),
    (5.0, 1.537459794428035e-12),
    (8.0, 1.1224297172982926e-29),
    (12.0, 1.3562611692059042e-64),
    (20.0, 5.395865611607901e-176),
    (25.0, 8.300172571196523e-274),
]

_ERFCX_TABLE = [
    (0.0, 1.0),
    (1e-10, 0.999999999887162),
    (0.1, 0.8964569799691267),
    (0.5, 0.6156903441929259),
    (1.0, 0.427583576155807),
    (2.0, 0.25539567631050575),
    (5.0, 0.11070463773306863),
    (10.0, 0.05614099274382259),
    (26.0, 0.021683584850562907),
    (50.0, 0.011281536265323773),
    (200.0, 0.0028209126572120466),
    (10000.0, 5.641895807268084e-05),
    (100000000.0, 5.641895835477562e-09),
]

_I0S_TABLE = [
    (0.0, 1.0),
    (1e-06, 0.99999900000075),
    (0.5, 0.6450352704491501),
    (1.0, 0.46575960759364043),
    (3.0, 0.2430003541618254),
    (7.5, 0.14831583007739552),
    (14.9, 0.10425387282429126),
    (15.1, 0.10354878120576969),
    (40.0, 0.06327827987523534),
    (100.0, 0.03994437929909668),
    (700.0, 0.015081295651531358),
    (10000.0, 0.003989472674604732),
]


@pytest.mark.parametrize("z,ref", _ERFC_TABLE)
def test_erfc_reference(z, ref):
    assert erfc(z) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("z,ref", _ERFCX_TABLE)
def test_erfcx_reference(z, ref):
    assert erfcx(z) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("z,ref", _I0S_TABLE)
def test_besseli0_scaled_reference(z, ref):
    assert besseli0_scaled(z) == pytest.approx(ref, rel=1e-12)


def test_erfc_extreme_tail_underflows_to_zero():
    assert erfc(40.0) == 0.0


@given(st.floats(min_value=-10.0, max_value=10.0, allow_nan=False))
def test_erfc_reflection(z):
    assert erfc(z) + erfc(-z) == pytest.approx(2.0, rel=0, abs=1e-14)


@given(st.floats(min_value=0.0, max_value=8.0), st.floats(min_value=1e-6, max_value=2.0))
def test_erfc_monotone_decreasing(z, dz):
    assert erfc(z + dz) < erfc(z)


@given(st.floats(min_value=0.0, max_value=20.0))
def test_erfcx_consistent_with_erfc(z):
    # exp(-z^2) never underflows on this range, so the identity is testable.
    assert erfcx(z) * math.exp(-z * z) == pytest.approx(erfc(z), rel=1e-11)


def test_erfcx_rejects_negative():
    with pytest.raises(OutOfRange):
        erfcx(-0.5)


def test_erfcx_asymptotic_tail():
    # 1/(z sqrt(pi)) to leading order; ratio -> 1 like 1/z^2.
    for z in (1e3, 1e6):
        assert erfcx(z) * z * math.sqrt(math.pi) == pytest.approx(1.0, abs=1e-5)


@given(st.floats(min_value=-50.0, max_value=50.0))
def test_besseli0_scaled_even_and_bounded(z):
    v = besseli0_scaled(z)
    assert v == besseli0_scaled(-z)
    assert 0.0 < v <= 1.0


def test_besseli0_scaled_regime_switch_is_smooth():
    # Series and asymptotic regimes meet near 15.  A mismatch would show up
    # as a kink: the midpoint would leave the chord of its tight neighbors.
    lo, mid, hi = (besseli0_scaled(z) for z in (14.999999, 15.0, 15.000001))
    assert mid == pytest.approx(0.5 * (lo + hi), abs=1e-12)


def test_accuracy_validation():
    with pytest.raises(ValueError):
        Accuracy(rel_tol=0.5)
    with pytest.raises(ValueError):
        Accuracy(abs_floor=0.0)


def test_signed_log_value_round_trip():
    s = SignedLog(-1, math.log(2.5))
    assert s.value() == pytest.approx(-2.5, rel=1e-15)


def test_log_sum_exp_empty_and_cancellation():
    assert log_sum_exp([]) == SignedLog(1, -math.inf)
    assert log_sum_exp([(1, 0.3), (-1, 0.3)]) == SignedLog(1, -math.inf)


def test_log_sum_exp_matches_direct_sum():
    terms = [(1, 0.0), (-1, -1.0), (1, 2.0), (-1, -30.0)]
    direct = sum(s * math.exp(l) for s, l in terms)
    got = log_sum_exp(terms)
    assert got.sign * math.exp(got.log) == pytest.approx(direct, rel=1e-13)


def test_log_sum_exp_rejects_bad_sign_and_inf_conflict():
    with pytest.raises(ValueError):
        log_sum_exp([(0, 1.0)])
    with pytest.raises(ValueError):
        log_sum_exp([(1, math.inf), (-1, math.inf)])


def test_log_sum_exp_single_infinite():
    assert log_sum_exp([(-1, math.inf), (1, 3.0)]) == SignedLog(-1, math.inf)


@given(st.lists(st.tuples(st.sampled_from((-1, 1)),
                          st.floats(min_value=-700.0, max_value=700.0)),
                min_size=1, max_size=12),
       st.randoms(use_true_random=False))
def test_log_sum_exp_permutation_invariant(terms, rng):
    # fsum accumulation makes the result exactly permutation invariant.
    baseline = log_sum_exp(terms)
    shuffled = list(terms)
    rng.shuffle(shuffled)
    assert log_sum_exp(shuffled) == baseline
