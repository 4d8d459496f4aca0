"""Half-plane field checks: trapezoid oracles, boundary matching, residuals."""
import math

import numpy as np
import pytest

from sourcewave import (
    InitialData,
    OutOfRange,
    QuadratureSpec,
    Viscosity,
    besseli0_scaled,
)
from sourcewave.viscous import (
    build_trace,
    heat_left,
    heat_right,
    pde_residual_theta,
    velocity,
    viscous_weak_residual,
)
from sourcewave.verify import TestFunction


def _g_zero(tau: np.ndarray, eps: float) -> np.ndarray:
    z = np.atleast_1d(np.asarray(tau, dtype=float)) / (4.0 * eps)
    return np.array([besseli0_scaled(v) for v in z])


def _oracle_right(data, eps, x, t, g_of, n=400_001):
    """Dense trapezoid for the damped right field: odd-image bulk plus
    boundary convolution, straight off the half-plane representation."""
    hi = x + 12.0 * math.sqrt(2.0 * eps * t) + data.support_radius + 1.0
    xi = np.linspace(0.0, hi, n)
    th = np.exp(-data.cumulative_array(xi) / (2.0 * eps))
    kern = (np.exp(-(x - xi) ** 2 / (4 * eps * t))
            - np.exp(-(x + xi) ** 2 / (4 * eps * t)))
    bulk = np.trapezoid(th * kern, xi) / math.sqrt(4 * math.pi * eps * t)
    tau = np.linspace(0.0, t, n)[:-1]
    expo = -(x * x / (2.0 * (t - tau)) - tau) / (2.0 * eps)
    profile = g_of(tau, eps) * (t - tau) ** -1.5 * np.exp(expo)
    bdry = x / (2.0 * math.sqrt(math.pi * eps)) * np.trapezoid(
        np.append(profile, 0.0), np.append(tau, t))
    return math.exp(-t / (2 * eps)) * (bulk + bdry)


def _oracle_left(data, eps, x, t, g_of, n=400_001):
    hi = abs(x) + 12.0 * math.sqrt(2.0 * eps * t) + data.support_radius + 1.0
    xi = np.linspace(0.0, hi, n)
    th = np.exp(-data.cumulative_array(-xi) / (2.0 * eps))
    kern = (np.exp(-(x + xi) ** 2 / (4 * eps * t))
            - np.exp(-(x - xi) ** 2 / (4 * eps * t)))
    bulk = np.trapezoid(th * kern, xi) / math.sqrt(4 * math.pi * eps * t)
    tau = np.linspace(0.0, t, n)[:-1]
    expo = -x * x / (4.0 * eps * (t - tau))
    profile = g_of(tau, eps) * (t - tau) ** -1.5 * np.exp(expo)
    bdry = -x / (2.0 * math.sqrt(math.pi * eps)) * np.trapezoid(
        np.append(profile, 0.0), np.append(tau, t))
    return bulk + bdry


@pytest.fixture(scope="module")
def mixed():
    return InitialData((-1.0, 0.0, 1.0), (0.5, -1.0, 1.0, 0.0))


class TestFieldOracle:
    def test_right_zero_datum(self, zero_datum, quad):
        tr = build_trace(zero_datum, Viscosity(1.0), 1.5, quad)
        got = math.exp(
            heat_right(zero_datum, Viscosity(1.0), tr, 1.0, 1.0, quad).log_magnitude)
        ref = _oracle_right(zero_datum, 1.0, 1.0, 1.0, _g_zero)
        assert got == pytest.approx(ref, rel=1e-6)

    def test_left_zero_datum(self, zero_datum, quad):
        tr = build_trace(zero_datum, Viscosity(1.0), 1.5, quad)
        got = math.exp(
            heat_left(zero_datum, Viscosity(1.0), tr, -1.0, 1.0, quad).log_magnitude)
        ref = _oracle_left(zero_datum, 1.0, -1.0, 1.0, _g_zero)
        assert got == pytest.approx(ref, rel=1e-6)

    def test_riemann_both_sides(self, riemann_up, quad):
        tr = build_trace(riemann_up, Viscosity(0.5), 1.5, quad)

        def g_tr(tau, eps):
            return np.asarray(tr.g_at(np.asarray(tau)), dtype=float)

        got_r = math.exp(
            heat_right(riemann_up, Viscosity(0.5), tr, 0.7, 1.2, quad).log_magnitude)
        assert got_r == pytest.approx(
            _oracle_right(riemann_up, 0.5, 0.7, 1.2, g_tr), rel=1e-6)
        got_l = math.exp(
            heat_left(riemann_up, Viscosity(0.5), tr, -0.7, 1.2, quad).log_magnitude)
        assert got_l == pytest.approx(
            _oracle_left(riemann_up, 0.5, -0.7, 1.2, g_tr), rel=1e-6)


class TestBoundaryBehaviour:
    def test_both_sides_meet_the_trace(self, riemann_up, mixed, quad):
        for data in (riemann_up, mixed):
            tr = build_trace(data, Viscosity(0.5), 2.2, quad)
            for t in (0.5, 1.0, 2.0):
                g = float(tr.g_at(t))
                r = math.exp(heat_right(data, Viscosity(0.5), tr, 1e-6, t,
                                        quad).log_magnitude)
                l = math.exp(heat_left(data, Viscosity(0.5), tr, -1e-6, t,
                                       quad).log_magnitude)
                assert abs(r - g) / g <= 1e-4
                assert abs(l - g) / g <= 1e-4

    def test_flux_matching_across_source(self, mixed, quad):
        # The derivation of g rests on matched one-sided x-derivatives.
        tr = build_trace(mixed, Viscosity(0.5), 1.6, quad)
        h = 1e-4
        for t in (0.5, 1.5):
            g = float(tr.g_at(t))
            r = math.exp(heat_right(mixed, Viscosity(0.5), tr, h, t,
                                    quad).log_magnitude)
            l = math.exp(heat_left(mixed, Viscosity(0.5), tr, -h, t,
                                   quad).log_magnitude)
            r_x = (r - g) / h
            l_x = (g - l) / h
            assert abs(r_x - l_x) / g <= 1e-3

    def test_positivity(self, mixed, riemann_up, quad):
        for data in (mixed, riemann_up):
            tr = build_trace(data, Viscosity(0.5), 2.1, quad)
            for x, t in ((0.3, 0.4), (2.5, 2.0), (-1.2, 1.0), (-4.0, 0.3)):
                side = heat_right if x > 0 else heat_left
                assert side(data, Viscosity(0.5), tr, x, t, quad).sign == 1

    def test_domain_validation(self, zero_datum, quad):
        tr = build_trace(zero_datum, Viscosity(0.5), 1.0, quad)
        with pytest.raises(OutOfRange):
            heat_right(zero_datum, Viscosity(0.5), tr, -1.0, 0.5, quad)
        with pytest.raises(OutOfRange):
            heat_left(zero_datum, Viscosity(0.5), tr, 1.0, 0.5, quad)


class TestFarField:
    def test_left_field_forgets_the_source(self, zero_datum, quad):
        tr = build_trace(zero_datum, Viscosity(1.0), 1.5, quad)
        val = heat_left(zero_datum, Viscosity(1.0), tr, -20.0, 1.0, quad)
        assert abs(math.exp(val.log_magnitude) - 1.0) <= 1e-6

    def test_velocity_tends_to_datum(self, const_pos, quad):
        tr = build_trace(const_pos, Viscosity(0.5), 1.0, quad)
        u = velocity(const_pos, Viscosity(0.5), tr, 20.0, 0.5, quad)
        assert abs(u - 1.0) <= 1e-3


class TestVelocity:
    def test_source_pushes_rightward(self, zero_datum, quad):
        tr = build_trace(zero_datum, Viscosity(0.5), 1.2, quad)
        for x in (0.2, 0.5, 0.9):
            assert velocity(zero_datum, Viscosity(0.5), tr, x, 1.0, quad) > 0.0

    def test_matches_log_derivative(self, mixed, riemann_up, quad):
        h = 1e-4
        for data, pts in ((mixed, [(0.3, 0.5), (1.2, 1.7), (-0.4, 0.8)]),
                          (riemann_up, [(0.5, 0.5), (-1.0, 1.5)])):
            tr = build_trace(data, Viscosity(0.5), 2.0, quad)
            for x, t in pts:
                side = heat_right if x > 0 else heat_left
                lp = side(data, Viscosity(0.5), tr, x + h, t, quad).log_magnitude
                lm = side(data, Viscosity(0.5), tr, x - h, t, quad).log_magnitude
                fd = -2.0 * 0.5 * (lp - lm) / (2 * h)
                u = velocity(data, Viscosity(0.5), tr, x, t, quad)
                assert u == pytest.approx(fd, rel=1e-4, abs=1e-4)


class TestPdeResidual:
    def test_small_on_both_sides(self, zero_datum, quad):
        tr = build_trace(zero_datum, Viscosity(1.0), 1.5, quad)
        for x in (1.0, -1.0):
            r = pde_residual_theta(zero_datum, Viscosity(1.0), tr, x, 1.0,
                                   1e-3, 1e-3, quad)
            assert abs(r) <= 1e-4

    def test_second_order_in_step(self, riemann_up, quad):
        # Steps large enough that the h^2 truncation term dominates the
        # quadrature noise floor (~4e-6 at this point).
        tr = build_trace(riemann_up, Viscosity(0.5), 1.5, quad)
        r1 = pde_residual_theta(riemann_up, Viscosity(0.5), tr, 0.8, 1.0,
                                3.2e-2, 3.2e-2, quad)
        r2 = pde_residual_theta(riemann_up, Viscosity(0.5), tr, 0.8, 1.0,
                                1.6e-2, 1.6e-2, quad)
        assert 3.0 <= abs(r1) / abs(r2) <= 5.0

    def test_stencil_must_not_straddle_source(self, zero_datum, quad):
        tr = build_trace(zero_datum, Viscosity(0.5), 1.0, quad)
        with pytest.raises(OutOfRange):
            pde_residual_theta(zero_datum, Viscosity(0.5), tr, 5e-4, 0.5,
                               1e-3, 1e-3, quad)


class TestViscousWeakResidual:
    def test_linearity_in_amplitude(self, zero_datum, quad):
        tr = build_trace(zero_datum, Viscosity(1.0), 1.6, quad)
        base = TestFunction(-1.5, 1.5, 0.2, 1.4, amplitude=1.0)
        double = TestFunction(-1.5, 1.5, 0.2, 1.4, amplitude=2.0)
        r1 = viscous_weak_residual(zero_datum, Viscosity(1.0), tr, base, quad,
                                   n_t=10, n_x=14)
        r2 = viscous_weak_residual(zero_datum, Viscosity(1.0), tr, double, quad,
                                   n_t=10, n_x=14)
        assert r2 == pytest.approx(2.0 * r1, rel=1e-10)

    def test_small_for_bump_straddling_source(self, zero_datum, quad):
        tr = build_trace(zero_datum, Viscosity(1.0), 1.6, quad)
        fn = TestFunction(-2.0, 2.0, 0.2, 1.5)
        r = viscous_weak_residual(zero_datum, Viscosity(1.0), tr, fn, quad)
        assert abs(r) <= 5e-3

    def test_small_for_bump_away_from_source(self, riemann_up, quad):
        tr = build_trace(riemann_up, Viscosity(1.0), 1.6, quad)
        fn = TestFunction(0.7, 2.4, 0.3, 1.4)
        r = viscous_weak_residual(riemann_up, Viscosity(1.0), tr, fn, quad)
        assert abs(r) <= 5e-3
