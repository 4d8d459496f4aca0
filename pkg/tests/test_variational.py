"""Tests for the variational limit solver.

The main oracle here is a semi-analytic reduction: the inner minimization
over xi (a quadratic plus a piecewise-linear antiderivative) is solved
exactly piece by piece, leaving a dense 1-D scan over the remaining time
variable.  That shares no code with the two-phase grid search it checks.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sourcewave.errors import AmbiguousMinimizer, InfeasiblePoint, OutOfRange
from sourcewave.initial_data import InitialData
from sourcewave.variational import (
    Branch,
    MinimizerPoint,
    SearchSpec,
    brute_force_minimum,
    finite_diff_check_U,
    functional_value,
    interfaces,
    limit_U,
    limit_velocity,
    minimize_branch,
)

SQRT2 = math.sqrt(2.0)


# ----------------------------------------------------------------------
# Independent oracle: exact inner minimization + dense outer scan.


def _pieces(data, sigma):
    """Pieces of W(xi) = V(sigma*xi) on xi >= 0 as (start, slope, W(start))."""
    ks = sorted(sigma * b for b in data.breakpoints if sigma * b > 0.0)
    edges = [0.0] + ks
    pieces = []
    w = 0.0
    for j, e in enumerate(edges):
        mid = sigma * (e + (edges[j + 1] - e) / 2 if j + 1 < len(edges) else e + 1.0)
        slope = sigma * data.velocity(mid)
        pieces.append((e, slope, w))
        if j + 1 < len(edges):
            w += slope * (edges[j + 1] - e)
    return pieces, edges


def _exact_inner_min(data, sigma, d):
    """m_sigma(d) = min over xi >= 0 of xi^2/(2d) + V(sigma*xi), vectorized."""
    d = np.asarray(d, dtype=float)
    pieces, edges = _pieces(data, sigma)
    best = np.full(d.shape, np.inf)
    for j, (e, s, w) in enumerate(pieces):
        hi = edges[j + 1] if j + 1 < len(edges) else np.inf
        with np.errstate(invalid="ignore"):
            xi = np.clip(-s * d, e, hi)
        val = np.where(
            d > 0.0,
            xi * xi / (2.0 * np.where(d > 0, d, 1.0)) + w + s * (xi - e),
            np.inf,
        )
        best = np.minimum(best, val)
    # d = 0 pins xi to the closed-set corner xi = 0, where the value is 0.
    return np.where(d > 0.0, best, 0.0)


def _semi_analytic(branch, data, x, t, n=2_000_001):
    spec = SearchSpec()
    xi_hi = spec.xi_max(data, x, t)
    if branch.index == 3:
        sigma = 1.0 if branch.side == "R" else -1.0
        kinks = [sigma * b for b in data.breakpoints if 0.0 < sigma * b < xi_hi]
        xi = np.unique(np.concatenate([np.linspace(0.0, xi_hi, n), np.array(kinks)]))
        v = data.cumulative_array(sigma * xi)
        return float(np.min((x - sigma * xi) ** 2 / (2.0 * t) + v))
    if branch.index == 2:
        tau = np.linspace(0.0, t, n + 1)[:-1]
        m = _exact_inner_min(data, -1.0, tau)
        vals = x * x / (2.0 * (t - tau)) + m
        if branch.side == "R":
            vals = vals - tau
        return float(np.min(vals))
    # Index 1 reduces over d = tau - u with the exact inner min over xi.
    d = np.linspace(0.0, t, n + 1)[:-1]
    m = _exact_inner_min(data, 1.0, d)
    if branch.side == "L":
        return float(np.min(x * x / (2.0 * (t - d)) + d + m))
    # Right side: for each d the optimal tau is clamp(t - x/sqrt(2), [d, t)).
    tau_star = t - abs(x) / SQRT2
    tau = np.clip(tau_star, d, np.nextafter(t, 0.0))
    g = x * x / (2.0 * (t - tau)) - tau
    return float(np.min(g + d + m))


ZERO = InitialData((), (0.0,))
CPOS = InitialData((), (1.0,))
CNEG = InitialData((), (-1.0,))
RIEM = InitialData((0.0,), (-1.0, 1.0))
RZN = InitialData((0.0,), (0.0, -1.0))
RECT = InitialData((-1.0, 1.0), (0.0, 1.0, 0.0))

CASES = [
    ("R", 1, ZERO, 1.0, 2.0),
    ("R", 2, ZERO, 1.0, 2.0),
    ("R", 3, ZERO, 1.0, 2.0),
    ("L", 1, ZERO, -1.0, 2.0),
    ("L", 2, ZERO, -1.0, 2.0),
    ("L", 3, ZERO, -1.5, 1.0),
    ("R", 1, CPOS, 0.8, 1.5),
    ("R", 2, CNEG, 0.8, 1.5),
    ("R", 3, CPOS, 2.0, 1.0),
    ("L", 3, CNEG, -2.0, 1.0),
    ("R", 1, RIEM, 0.8, 1.5),
    ("R", 2, RIEM, 0.8, 1.5),
    ("R", 3, RIEM, 2.5, 1.5),
    ("L", 1, RIEM, -0.6, 1.5),
    ("L", 2, RIEM, -0.6, 1.5),
    ("L", 3, RIEM, -2.0, 1.5),
    ("R", 2, RZN, 0.5, 1.0),
    ("L", 1, RZN, -0.7, 2.0),
    ("R", 3, RECT, 1.2, 0.8),
    ("L", 2, RECT, -0.9, 1.25),
]

_IDS = [f"{s}{i}-x{x:+g}-t{t:g}" for s, i, _, x, t in CASES]


@pytest.mark.parametrize("side,index,data,x,t", CASES, ids=_IDS)
def test_search_matches_semi_analytic(side, index, data, x, t, search):
    result = minimize_branch(Branch(side, index), data, x, t, search)
    reference = _semi_analytic(Branch(side, index), data, x, t)
    assert result.value == pytest.approx(reference, abs=1e-8)


# Closed-form minima worked out by hand (stationarity of each reduced
# functional; see the matching oracle reductions above).
_CLOSED_FORMS = [
    ("R", 1, ZERO, 1.0, 2.0, SQRT2 - 2.0),
    ("R", 2, ZERO, 1.0, 2.0, SQRT2 - 2.0),
    ("R", 3, ZERO, 1.0, 2.0, 0.0),
    ("L", 1, ZERO, -1.0, 2.0, 0.25),
    ("L", 2, ZERO, -1.0, 2.0, 0.25),
    ("L", 3, ZERO, -1.5, 1.0, 0.0),
    ("R", 1, CPOS, 0.8, 1.5, SQRT2 * 0.8 - 1.5),
    ("R", 2, CNEG, 0.8, 1.5, SQRT2 * 0.8 - 1.5),
    ("R", 3, CPOS, 2.0, 1.0, 1.5),
    ("L", 3, CNEG, -2.0, 1.0, 1.5),
    ("R", 3, RIEM, 2.5, 1.5, 1.75),
    ("L", 1, RIEM, -0.6, 1.5, 0.12),
    ("L", 2, RIEM, -0.6, 1.5, 0.12),
    ("L", 3, RIEM, -2.0, 1.5, 1.25),
    ("R", 2, RZN, 0.5, 1.0, SQRT2 * 0.5 - 1.0),
    ("L", 1, RZN, -0.7, 2.0, 0.1225),
    ("R", 3, RECT, 1.2, 0.8, 0.8),
    ("L", 2, RECT, -0.9, 1.25, 0.275),
]


@pytest.mark.parametrize(
    "side,index,data,x,t,expected",
    _CLOSED_FORMS,
    ids=[f"{s}{i}-x{x:+g}" for s, i, _, x, t, _v in _CLOSED_FORMS],
)
def test_closed_form_minima(side, index, data, x, t, expected, search):
    result = minimize_branch(Branch(side, index), data, x, t, search)
    assert result.value == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize(
    "side,index,data,x,t",
    [
        ("R", 2, ZERO, 1.0, 2.0),
        ("L", 2, RIEM, -0.6, 1.5),
        ("R", 3, RECT, 1.2, 0.8),
        ("L", 1, RZN, -0.7, 2.0),
    ],
)
def test_brute_force_certifies_search(side, index, data, x, t, search):
    branch = Branch(side, index)
    value = minimize_branch(branch, data, x, t, search).value
    oracle = brute_force_minimum(branch, data, x, t, search)
    # The coarse scan can only sit above the true minimum, never far below
    # the refined search value.
    assert value <= oracle + 1e-12
    assert oracle - value <= 1e-4


def test_oracle_gap_field(search):
    result = minimize_branch(Branch("R", 2), ZERO, 1.0, 2.0, search, with_oracle_gap=True)
    assert result.oracle_gap is not None
    assert -1e-4 <= result.oracle_gap <= 1e-12
    plain = minimize_branch(Branch("R", 2), ZERO, 1.0, 2.0, search)
    assert plain.oracle_gap is None


# ----------------------------------------------------------------------
# Branch and functional plumbing.


def test_branch_rejects_unknown_side_and_index():
    with pytest.raises(ValueError):
        Branch("X", 1)
    with pytest.raises(ValueError):
        Branch("R", 4)
    with pytest.raises(ValueError):
        Branch("R", 0)


def test_branch_is_hashable_and_comparable():
    assert Branch("R", 2) == Branch("R", 2)
    assert Branch("R", 2) != Branch("L", 2)
    assert len({Branch(s, i) for s in "RL" for i in (1, 2, 3)}) == 6


def test_functional_rejects_nonpositive_time():
    with pytest.raises(OutOfRange):
        functional_value(Branch("R", 1), ZERO, 1.0, 0.0, MinimizerPoint())
    with pytest.raises(OutOfRange):
        functional_value(Branch("R", 1), ZERO, 1.0, -1.0, MinimizerPoint())


def test_functional_rejects_infeasible_ordering():
    # u must not exceed tau on branch 1.
    with pytest.raises(InfeasiblePoint):
        functional_value(
            Branch("R", 1), ZERO, 1.0, 1.0, MinimizerPoint(tau=0.5, u=0.7, xi=0.1)
        )
    with pytest.raises(InfeasiblePoint):
        functional_value(
            Branch("R", 2), ZERO, 1.0, 1.0, MinimizerPoint(tau=1.5, u=0.0, xi=0.0)
        )


def test_functional_closure_corner_values():
    # With u = tau and xi = 0 the path degenerates to a single free segment:
    # the value collapses to x^2 / (2(t - tau)) - tau.
    val = functional_value(
        Branch("R", 1), ZERO, 1.0, 1.0, MinimizerPoint(tau=0.5, u=0.5, xi=0.0)
    )
    assert val == pytest.approx(1.0 / (2.0 * 0.5) - 0.5, rel=1e-14)
    # xi > 0 with a zero-length inner segment costs infinitely much.
    assert functional_value(
        Branch("R", 1), ZERO, 1.0, 1.0, MinimizerPoint(tau=0.5, u=0.5, xi=0.3)
    ) == math.inf


def test_functional_stationary_point_of_zero_datum():
    # tau = u = t - x/sqrt(2), xi = 0 is the stationary point of the first
    # branch for the zero datum; its value is sqrt(2) x - t.
    x, t = 1.0, 2.0
    tau = t - x / SQRT2
    val = functional_value(Branch("R", 1), ZERO, x, t, MinimizerPoint(tau=tau, u=tau, xi=0.0))
    assert val == pytest.approx(SQRT2 * x - t, rel=1e-12)


def test_functional_third_branch_matches_direct_formula():
    # Branch 3 ignores tau and u entirely: (x - xi)^2/(2t) + V(xi) on the right.
    val = functional_value(Branch("R", 3), RIEM, 2.5, 1.5, MinimizerPoint(xi=1.0))
    assert val == pytest.approx((2.5 - 1.0) ** 2 / 3.0 + 1.0, rel=1e-14)
    zero_val = functional_value(Branch("R", 3), ZERO, 1.0, 2.0, MinimizerPoint(xi=1.0))
    assert zero_val == pytest.approx(0.0, abs=1e-15)


# ----------------------------------------------------------------------
# Assembled one-sided limits.


def test_limit_U_zero_datum_inside_source_region(search):
    sol = limit_U("R", ZERO, 1.0, 2.0, search)
    # Source branches win inside |x| < t/sqrt(2); branches 1 and 2 tie there.
    assert sol.U == pytest.approx(SQRT2, abs=1e-9)
    assert sol.active_branch.index in (1, 2)
    assert sol.tie
    values = {r.branch.index: r.value for r in sol.results}
    assert values[1] == pytest.approx(values[2], abs=1e-9)
    assert values[3] == pytest.approx(0.0, abs=1e-12)


def test_limit_U_zero_datum_beyond_interface(search):
    sol = limit_U("R", ZERO, 1.8, 2.0, search)
    assert sol.active_branch == Branch("R", 3)
    assert not sol.tie
    # U = min + t on the right; the classical branch min is 0 here.
    assert sol.U == pytest.approx(2.0, abs=1e-10)


def test_limit_U_left_zero_datum(search):
    sol = limit_U("L", ZERO, -1.0, 2.0, search)
    # No damping on the left: U is the bare minimum, and the classical
    # branch reaches 0 at xi = |x| while the source branches pay x^2/(2t).
    assert sol.active_branch == Branch("L", 3)
    assert sol.U == pytest.approx(0.0, abs=1e-10)
    values = {r.branch.index: r.value for r in sol.results}
    assert values[1] == pytest.approx(0.25, abs=1e-9)
    assert values[2] == pytest.approx(0.25, abs=1e-9)


def test_limit_U_rejects_wrong_half_line(search):
    with pytest.raises(OutOfRange):
        limit_U("R", ZERO, -1.0, 2.0, search)
    with pytest.raises(OutOfRange):
        limit_U("L", ZERO, 1.0, 2.0, search)
    with pytest.raises(OutOfRange):
        limit_U("R", ZERO, 1.0, 0.0, search)


def test_limit_U_scales_with_zero_datum(search):
    # The zero-datum functional is homogeneous: scaling (x, t) by lam scales
    # every path cost, hence U(lam x, lam t) = lam U(x, t).
    for x, t in [(0.6, 1.0), (1.4, 1.3), (-0.8, 1.1)]:
        side = "R" if x > 0 else "L"
        base = limit_U(side, ZERO, x, t, search).U
        doubled = limit_U(side, ZERO, 2.0 * x, 2.0 * t, search).U
        assert doubled == pytest.approx(2.0 * base, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(
    x=st.floats(0.1, 3.0),
    t=st.floats(0.5, 3.0),
    lam=st.floats(0.5, 2.0),
)
def test_limit_U_zero_datum_scaling_property(x, t, lam):
    search = SearchSpec()
    base = limit_U("R", ZERO, x, t, search).U
    scaled = limit_U("R", ZERO, lam * x, lam * t, search).U
    assert scaled == pytest.approx(lam * base, rel=1e-6, abs=1e-7)


def test_limit_velocity_zero_datum_plateaus(search):
    # Inside the source region the slope of U = sqrt(2) x is constant.
    assert limit_velocity("R", ZERO, 0.5, 1.0, search) == pytest.approx(SQRT2, abs=1e-5)
    assert limit_velocity("R", ZERO, 2.0, 1.0, search) == pytest.approx(0.0, abs=1e-5)
    assert limit_velocity("L", ZERO, -1.0, 2.0, search) == pytest.approx(0.0, abs=1e-5)


def test_limit_velocity_riemann_far_field(search):
    # Far to the right the data's own characteristic speed survives.
    assert limit_velocity("R", RIEM, 2.5, 1.5, search) == pytest.approx(1.0, abs=1e-4)


def test_limit_velocity_ambiguous_at_interface(search):
    t = 1.0
    with pytest.raises(AmbiguousMinimizer):
        limit_velocity("R", ZERO, t / SQRT2, t, search)


def test_finite_diff_check_agrees_off_interface(search):
    fd = finite_diff_check_U("R", RIEM, 2.5, 1.5, 1e-4, search)
    assert not fd.skipped
    assert fd.value == pytest.approx(
        limit_velocity("R", RIEM, 2.5, 1.5, search), abs=1e-3
    )


def test_finite_diff_check_skips_at_interface(search):
    fd = finite_diff_check_U("R", ZERO, 1.0 / SQRT2, 1.0, 1e-4, search)
    assert fd.skipped
    assert fd.value is None
    assert fd.reason


def test_finite_diff_check_rejects_bad_step(search):
    with pytest.raises(OutOfRange):
        finite_diff_check_U("R", RIEM, 2.5, 1.5, 0.0, search)


# ----------------------------------------------------------------------
# Interfaces.


@pytest.mark.parametrize("t", [1.0, 2.0, 4.0])
def test_interface_zero_datum_outer_position(t, search):
    pair = interfaces("R", ZERO, t, search)
    assert pair.outer == pytest.approx(t / SQRT2, abs=1e-4)
    assert not pair.outer_degenerate
    # The inner interface collapses to the origin for the zero datum.
    assert pair.inner_degenerate
    assert abs(pair.inner) <= 1e-3


def test_interface_left_zero_datum_degenerate(search):
    pair = interfaces("L", ZERO, 1.0, search)
    # Both left interfaces sit at the origin: the classical branch wins
    # everywhere on x < 0 for the zero datum.
    assert pair.inner_degenerate and pair.outer_degenerate
    assert abs(pair.inner) <= 1e-3 and abs(pair.outer) <= 1e-3


def test_interface_pair_iterates_inner_then_outer(search):
    pair = interfaces("R", ZERO, 1.0, search)
    inner, outer = pair
    assert (inner, outer) == (pair.inner, pair.outer)
    assert pair.side == "R" and pair.t == 1.0


def test_interfaces_reject_bad_arguments(search):
    with pytest.raises(OutOfRange):
        interfaces("R", ZERO, 0.0, search)
    with pytest.raises(OutOfRange):
        interfaces("up", ZERO, 1.0, search)


# ----------------------------------------------------------------------
# Determinism.


def test_limit_U_is_deterministic(search):
    a = limit_U("R", RIEM, 0.8, 1.5, search)
    b = limit_U("R", RIEM, 0.8, 1.5, search)
    assert a.U == b.U
    assert [r.value for r in a.results] == [r.value for r in b.results]


def test_search_spec_validation():
    with pytest.raises(ValueError):
        SearchSpec(grid_nodes=1)
    with pytest.raises(ValueError):
        SearchSpec(tie_tol=-1.0)
    with pytest.raises(ValueError):
        SearchSpec(oracle_nodes=0)
