"""Limit functionals of the sourced conservation law and their minimizers.

Each half-plane has three action branches: paths that visit the source and
wait there (index 1), paths that leave it immediately (index 2), and paths
that never touch it (index 3, the classical one).  The inviscid potential is
the pointwise minimum of the three (plus ``t`` on the right, where waiting at
the source is free energy), and the inviscid velocity follows from the
argmin by the characteristic formulas.

Minimization is a two-phase search: a dense tensor grid over the feasible
simplex brackets the global minimum, then a projected Nelder-Mead simplex
polishes it until the value stops improving.  The feasible set is closed
using the convention ``xi^2/(2d) = 0`` when ``d = 0`` and ``xi = 0`` (and
``+inf`` when ``xi > 0``), which attains the infima of the open-set
formulations, e.g. at ``u = tau``.

Only the travel term ``x^2/(2(t - tau))`` depends on ``x`` in the index-1
and index-2 actions, so the inner minimization over the remaining variables
is shared by every ``x`` at a fixed ``t``.  :func:`limit_U` exploits this
with a per-(branch, t) profile cache, which makes dense x-sweeps (interface
bisection, weak-form quadrature) hundreds of times cheaper than independent
full searches while returning the same two-phase results.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousMinimizer, InfeasiblePoint, NonConvergence, OutOfRange
from .initial_data import InitialData

__all__ = [
    "Branch",
    "MinimizerPoint",
    "MinimizerResult",
    "LimitSolution",
    "InterfacePair",
    "DerivativeCheck",
    "SearchSpec",
    "functional_value",
    "minimize_branch",
    "brute_force_minimum",
    "limit_U",
    "limit_velocity",
    "interfaces",
    "finite_diff_check_U",
]

_INF = float("inf")


@dataclass(frozen=True)
class Branch:
    """One of the six action branches: side 'L' or 'R', index 1, 2, or 3."""

    side: str
    index: int

    def __post_init__(self) -> None:
        if self.side not in ("L", "R"):
            raise ValueError(f"side must be 'L' or 'R', got {self.side!r}")
        if self.index not in (1, 2, 3):
            raise ValueError(f"index must be 1, 2, or 3, got {self.index!r}")

    def __str__(self) -> str:
        return f"{self.side}{self.index}"


@dataclass(frozen=True)
class MinimizerPoint:
    """A point of the closed feasible set.

    ``tau`` is the time the path leaves the source, ``u`` the time it
    arrives there (``0 <= u <= tau < t``), ``xi`` the starting position's
    distance from the origin.  Index-3 branches use only ``xi``; index-2
    branches have ``u = 0`` identically.
    """

    tau: float = 0.0
    u: float = 0.0
    xi: float = 0.0


@dataclass(frozen=True)
class MinimizerResult:
    branch: Branch
    value: float
    argmin: MinimizerPoint
    tie: bool = False
    oracle_gap: float | None = None


@dataclass(frozen=True)
class InterfacePair:
    """Interface pair for one side at one time; iterates as (inner, outer).

    ``inner`` is the switch closest to the source line, ``outer`` the switch
    to the classical branch.  A degenerate inner region (the axis-adjacent
    branch never strictly wins) collapses to 0 with ``inner_degenerate``
    set; ``outer_degenerate`` marks an outer switch that collapsed toward
    the source line as well.  Left-side values are negative abscissas with
    ``inner >= outer``.
    """

    side: str
    t: float
    inner: float
    outer: float
    inner_degenerate: bool = False
    outer_degenerate: bool = False

    def __iter__(self):
        yield self.inner
        yield self.outer


@dataclass(frozen=True)
class LimitSolution:
    """Inviscid potential and velocity at one point, with branch diagnostics."""

    side: str
    x: float
    t: float
    U: float
    u: float
    active_branch: Branch
    tie: bool
    results: tuple[MinimizerResult, MinimizerResult, MinimizerResult]
    interfaces: InterfacePair | None = None


@dataclass(frozen=True)
class DerivativeCheck:
    """Centered difference of U, or a skip marker when the stencil hits a kink."""

    value: float | None
    skipped: bool
    reason: str = ""


@dataclass(frozen=True)
class SearchSpec:
    """Knobs of the two-phase search and its brute-force oracle."""

    grid_nodes: int = 64
    tie_tol: float = 1e-9
    # Velocity reads the argmin, whose resolution is sqrt(refine_tol) times
    # a curvature factor that peaks near the source line; 1e-13 keeps the
    # induced speed noise comfortably under the 1e-3 ambiguity threshold.
    refine_tol: float = 1e-13
    max_refine_iter: int = 400
    oracle_nodes: int = 200
    seed: int = 0
    xi_margin: float = 1.0

    def __post_init__(self) -> None:
        if self.grid_nodes < 8:
            raise ValueError("grid_nodes must be at least 8")
        if self.oracle_nodes < 8:
            raise ValueError("oracle_nodes must be at least 8")
        if not 0.0 < self.tie_tol < 1.0:
            raise ValueError("tie_tol must be in (0, 1)")
        if not 0.0 < self.refine_tol < 1.0:
            raise ValueError("refine_tol must be in (0, 1)")
        if self.max_refine_iter < 10:
            raise ValueError("max_refine_iter must be at least 10")
        if self.xi_margin < 0.0:
            raise ValueError("xi_margin must be nonnegative")

    def xi_max(self, data: InitialData, x: float, t: float) -> float:
        # Characteristic speeds are at most max|u0|, plus the source boost;
        # anything starting farther than this cannot reach x by time t.
        return abs(x) + (1.0 + data.bound) * t + self.xi_margin


# ---------------------------------------------------------------------------
# functional evaluation
# ---------------------------------------------------------------------------

def _ratio(xi: float, d: float) -> float:
    """xi^2/(2d) on the closed set: 0 at (0, 0), +inf for xi > 0, d = 0."""
    if d > 0.0:
        return xi * xi / (2.0 * d)
    return 0.0 if xi == 0.0 else _INF


def functional_value(
    branch: Branch, data: InitialData, x: float, t: float, p: MinimizerPoint
) -> float:
    """Value of the branch action at a feasible point.

    Raises :class:`InfeasiblePoint` for hard violations (``tau >= t``,
    negative durations, ``xi < 0``, nonzero ``u`` on an index-2 branch);
    boundary points of the closed set evaluate via the 0/inf ratio
    convention and may legitimately return ``inf``.
    """
    if t <= 0.0:
        raise OutOfRange(f"t must be positive, got {t}")
    if p.xi < 0.0:
        raise InfeasiblePoint(f"xi must be nonnegative, got {p.xi}")
    if branch.index == 3:
        # Only xi is meaningful here.
        if branch.side == "R":
            return (x - p.xi) ** 2 / (2.0 * t) + data.cumulative(p.xi)
        return (x + p.xi) ** 2 / (2.0 * t) + data.cumulative(-p.xi)

    if not 0.0 <= p.tau < t:
        raise InfeasiblePoint(f"tau must lie in [0, t), got {p.tau}")
    travel = x * x / (2.0 * (t - p.tau))
    if branch.index == 2:
        if p.u != 0.0:
            raise InfeasiblePoint("index-2 branches have u = 0 identically")
        body = _ratio(p.xi, p.tau) + data.cumulative(-p.xi)
        return travel + body + (-p.tau if branch.side == "R" else 0.0)

    if not 0.0 <= p.u <= p.tau:
        raise InfeasiblePoint(f"u must lie in [0, tau], got {p.u}")
    d = p.tau - p.u
    body = _ratio(p.xi, d) + data.cumulative(p.xi)
    if branch.side == "R":
        return travel + body - p.u
    return travel + body + d


def _mirrored(branch: Branch) -> bool:
    """Whether the branch integrates the datum from the mirrored side."""
    return branch.index == 2 or (branch.side == "L" and branch.index == 3)


def _ratio_grid(xi: np.ndarray, d: np.ndarray) -> np.ndarray:
    safe = np.where(d > 0.0, d, 1.0)
    smooth = xi * xi / (2.0 * safe)
    corner = np.where(xi > 0.0, _INF, 0.0)
    return np.where(d > 0.0, smooth, corner)


def _grid_values(
    branch: Branch,
    data: InitialData,
    x: float,
    t: float,
    tau: np.ndarray,
    s: np.ndarray,
    xi: np.ndarray,
) -> np.ndarray:
    """Vectorized branch values on a (tau, s, xi) rectangular grid.

    Index-1 branches use all three axes with ``u = s*tau``; index-2 uses
    (tau, xi); index-3 uses xi alone.
    """
    sgn = 1.0 if branch.side == "R" else -1.0
    if branch.index == 3:
        v = data.cumulative_array(sgn * xi)
        return (x - sgn * xi) ** 2 / (2.0 * t) + v
    travel = x * x / (2.0 * (t - tau))
    if branch.index == 2:
        v = data.cumulative_array(-xi)
        body = _ratio_grid(xi[None, :], tau[:, None]) + v[None, :]
        shift = -tau if branch.side == "R" else np.zeros_like(tau)
        return travel[:, None] + body + shift[:, None]
    v = data.cumulative_array(xi)
    d = tau[:, None, None] * (1.0 - s[None, :, None])
    u = tau[:, None, None] * s[None, :, None]
    body = _ratio_grid(xi[None, None, :], d) + v[None, None, :]
    if branch.side == "R":
        return travel[:, None, None] + body - u
    return travel[:, None, None] + body + d


def _closed_eval(branch: Branch, data: InitialData, x: float, t: float, z) -> float:
    """Exception-free scalar evaluation on clamped rectangular coordinates."""
    sgn = 1.0 if branch.side == "R" else -1.0
    if branch.index == 3:
        xi = z[0]
        return (x - sgn * xi) ** 2 / (2.0 * t) + data.cumulative(sgn * xi)
    tau = z[0]
    if tau >= t:
        return _INF
    travel = x * x / (2.0 * (t - tau))
    if branch.index == 2:
        xi = z[1]
        body = _ratio(xi, tau) + data.cumulative(-xi)
        return travel + body + (-tau if branch.side == "R" else 0.0)
    s, xi = z[1], z[2]
    d = tau * (1.0 - s)
    body = _ratio(xi, d) + data.cumulative(xi)
    if branch.side == "R":
        return travel + body - tau * s
    return travel + body + d


# ---------------------------------------------------------------------------
# two-phase search
# ---------------------------------------------------------------------------

def _axes(branch: Branch, data: InitialData, t: float, xi_hi: float, n: int):
    """Grid axes, per-axis refinement steps, and clamp bounds for a branch.

    The xi axis carries the kink positions of the antiderivative the branch
    integrates, so piecewise-linear minima are sampled exactly rather than
    to within half a cell.
    """
    tau = np.linspace(0.0, t, n + 1)[:-1]
    s = np.linspace(0.0, 1.0, n)
    if branch.index == 3:
        sgn = 1.0 if branch.side == "R" else -1.0
    else:
        sgn = -1.0 if branch.index == 2 else 1.0
    kinks = [sgn * b for b in data.breakpoints if 0.0 < sgn * b < xi_hi]
    xi = np.unique(np.concatenate([np.linspace(0.0, xi_hi, n), np.array(kinks)]))
    if branch.index == 3:
        steps = np.array([xi_hi / n])
        bounds = np.array([[0.0, xi_hi]])
    elif branch.index == 2:
        steps = np.array([t / n, xi_hi / n])
        bounds = np.array([[0.0, t], [0.0, xi_hi]])
    else:
        steps = np.array([t / n, 1.0 / n, xi_hi / n])
        bounds = np.array([[0.0, t], [0.0, 1.0], [0.0, xi_hi]])
    return tau, s, xi, steps, bounds


_GRID_STARTS = 4  # polish at most this many separated coarse cells
_PROFILE_ROWS = 2  # candidate tau rows per profile-path search
# Extra starts matter only when another basin's coarse value could undercut
# the best cell once both are polished.  With kink positions on the xi axis
# the remaining sampling bias is curvature-driven and far below this band.
_START_BAND = 0.05


def _grid_phase(branch, data, x, t, search):
    """Dense-grid bracket: separated candidate cells, steps, and bounds.

    Near a crossing of two local basins the single best coarse cell can
    belong to the wrong one (the coarse values differ by less than the
    cell-size bias), and a single local polish would stay there.  Returning
    the best few pairwise non-adjacent cells within _START_BAND of the best
    lets the caller polish each candidate basin and take the true minimum.
    """
    n = search.grid_nodes
    xi_hi = search.xi_max(data, x, t)
    tau, s, xi, steps, bounds = _axes(branch, data, t, xi_hi, n)
    vals = _grid_values(branch, data, x, t, tau, s, xi)
    order = np.argsort(vals, axis=None, kind="stable")
    cutoff = float(vals.flat[order[0]]) + _START_BAND
    taken: list[tuple] = []
    starts = []
    for flat in order:
        if float(vals.flat[flat]) > cutoff:
            break
        idx = np.unravel_index(int(flat), vals.shape)
        if any(max(abs(a - b) for a, b in zip(idx, seen)) <= 1 for seen in taken):
            continue
        taken.append(idx)
        if branch.index == 3:
            starts.append(np.array([xi[idx[0]]]))
        elif branch.index == 2:
            starts.append(np.array([tau[idx[0]], xi[idx[1]]]))
        else:
            starts.append(np.array([tau[idx[0]], s[idx[1]], xi[idx[2]]]))
        if len(starts) == _GRID_STARTS:
            break
    return starts, steps, bounds


def _nelder_mead(f, z0, steps, bounds, tol, max_iter):
    """Projected Nelder-Mead; stops when the simplex value spread is < tol.

    Shrink steps contract the simplex geometrically, so the spread criterion
    terminates; infinite values (closed-set corners) sort to the worst
    vertex and are reflected away on the next step.  Scalar tuples
    throughout: the simplex has at most 4 vertices of dimension at most 3,
    where array overhead dominates arithmetic.
    """
    b = np.asarray(bounds, dtype=float)
    lo, hi = b[:, 0].tolist(), b[:, 1].tolist()
    st = [float(v) for v in steps]
    k = len(lo)
    rng_k = range(k)

    def proj(z):
        return tuple(
            lo[i] if z[i] < lo[i] else (hi[i] if z[i] > hi[i] else z[i])
            for i in rng_k
        )

    simplex = [proj(tuple(float(v) for v in z0))]
    for i in rng_k:
        e = list(simplex[0])
        e[i] = e[i] + st[i] if e[i] + st[i] <= hi[i] else e[i] - st[i]
        simplex.append(proj(e))
    vals = [f(z) for z in simplex]

    for _ in range(max_iter):
        order = sorted(range(k + 1), key=vals.__getitem__)
        simplex = [simplex[i] for i in order]
        vals = [vals[i] for i in order]
        if vals[-1] - vals[0] < tol:
            break
        worst = simplex[-1]
        centroid = tuple(
            sum(simplex[j][i] for j in rng_k) / k for i in rng_k
        )
        refl = proj(tuple(2.0 * centroid[i] - worst[i] for i in rng_k))
        f_refl = f(refl)
        if f_refl < vals[0]:
            exp = proj(tuple(3.0 * centroid[i] - 2.0 * worst[i] for i in rng_k))
            f_exp = f(exp)
            if f_exp < f_refl:
                simplex[-1], vals[-1] = exp, f_exp
            else:
                simplex[-1], vals[-1] = refl, f_refl
        elif f_refl < vals[-2]:
            simplex[-1], vals[-1] = refl, f_refl
        else:
            contr = proj(tuple(0.5 * (centroid[i] + worst[i]) for i in rng_k))
            f_contr = f(contr)
            if f_contr < vals[-1]:
                simplex[-1], vals[-1] = contr, f_contr
            else:
                base = simplex[0]
                for j in range(1, k + 1):
                    simplex[j] = proj(tuple(
                        0.5 * (base[i] + simplex[j][i]) for i in rng_k
                    ))
                    vals[j] = f(simplex[j])
    i_best = min(range(k + 1), key=vals.__getitem__)
    return simplex[i_best], vals[i_best]


def _random_feasible(branch, t, xi_hi, rng, count):
    """Seeded feasible probes in rectangular coordinates."""
    if branch.index == 3:
        return rng.uniform(0.0, xi_hi, size=(count, 1))
    if branch.index == 2:
        cols = (rng.uniform(0.0, t, count), rng.uniform(0.0, xi_hi, count))
        return np.column_stack(cols)
    cols = (
        rng.uniform(0.0, t, count),
        rng.uniform(0.0, 1.0, count),
        rng.uniform(0.0, xi_hi, count),
    )
    return np.column_stack(cols)


def _rect_to_point(branch: Branch, z) -> MinimizerPoint:
    if branch.index == 3:
        return MinimizerPoint(xi=float(z[0]))
    if branch.index == 2:
        return MinimizerPoint(tau=float(z[0]), xi=float(z[1]))
    tau = float(z[0])
    return MinimizerPoint(tau=tau, u=tau * float(z[1]), xi=float(z[2]))


def _check_side(branch_side: str, x: float) -> None:
    if branch_side == "R" and x <= 0.0:
        raise OutOfRange(f"right-side branches need x > 0, got {x}")
    if branch_side == "L" and x >= 0.0:
        raise OutOfRange(f"left-side branches need x < 0, got {x}")


def minimize_branch(
    branch: Branch,
    data: InitialData,
    x: float,
    t: float,
    search: SearchSpec | None = None,
    with_oracle_gap: bool = False,
) -> MinimizerResult:
    """Two-phase minimization of one branch action.

    Phase 1 brackets on a dense rectangular grid, phase 2 polishes the best
    few separated grid cells with a projected simplex descent and keeps the
    least.  A seeded batch of 64 random feasible probes certifies the result
    post hoc; a probe that beats it restarts the polish (at most twice), so
    the returned value is never above any probe.
    """
    search = search or SearchSpec()
    if t <= 0.0:
        raise OutOfRange(f"t must be positive, got {t}")
    _check_side(branch.side, x)
    xi_hi = search.xi_max(data, x, t)
    starts, steps, bounds = _grid_phase(branch, data, x, t, search)

    def f(z):
        return _closed_eval(branch, data, x, t, z)

    z_best, v_best = None, _INF
    for z0 in starts:
        z_new, v_new = _nelder_mead(
            f, z0, steps, bounds, search.refine_tol, search.max_refine_iter
        )
        if v_new < v_best:
            z_best, v_best = z_new, v_new
    rng = np.random.default_rng(search.seed)
    for _ in range(3):
        probes = _random_feasible(branch, t, xi_hi, rng, 64)
        probe_vals = [f(z) for z in probes]
        i = int(np.argmin(probe_vals))
        if probe_vals[i] >= v_best - 1e-12:
            break
        z_new, v_new = _nelder_mead(
            f, probes[i], steps, bounds, search.refine_tol, search.max_refine_iter
        )
        if v_new < v_best:
            z_best, v_best = z_new, v_new

    gap = None
    if with_oracle_gap:
        gap = v_best - brute_force_minimum(branch, data, x, t, search)
    return MinimizerResult(
        branch=branch, value=float(v_best), argmin=_rect_to_point(branch, z_best),
        oracle_gap=gap,
    )


def brute_force_minimum(
    branch: Branch,
    data: InitialData,
    x: float,
    t: float,
    search: SearchSpec | None = None,
) -> float:
    """Dense tensor-grid minimum, ``oracle_nodes`` per dimension.

    The xi axis is augmented with the kink locations of the datum the branch
    actually integrates, so piecewise minima are sampled exactly; evaluation
    is chunked along tau to bound memory.  No refinement: this is the
    reference the search is checked against, kept deliberately simple.
    """
    search = search or SearchSpec()
    if t <= 0.0:
        raise OutOfRange(f"t must be positive, got {t}")
    _check_side(branch.side, x)
    n = search.oracle_nodes
    xi_hi = search.xi_max(data, x, t)
    flip = -1.0 if _mirrored(branch) else 1.0
    kinks = [b for b in (flip * np.asarray(data.breakpoints)) if 0.0 < b < xi_hi]
    xi = np.unique(np.concatenate([np.linspace(0.0, xi_hi, n), np.array(kinks)]))
    if branch.index == 3:
        return float(np.min(_grid_values(branch, data, x, t, xi, xi, xi)))
    tau = np.linspace(0.0, t, n + 1)[:-1]
    s = np.linspace(0.0, 1.0, n)
    best = _INF
    chunk = max(1, (2 ** 22) // (len(s) * len(xi)))
    for start in range(0, len(tau), chunk):
        part = _grid_values(branch, data, x, t, tau[start:start + chunk], s, xi)
        best = min(best, float(np.min(part)))
    return best


# ---------------------------------------------------------------------------
# shared-grid profiles: the x-independent part of each branch, per (t, datum)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Profile:
    """Inner minimization collapsed onto the tau axis (or the xi axis for 3).

    ``r`` holds min over the inner variables per tau node (branch 3: the
    potential per xi node); ``arg`` the flat inner argmin per tau node.
    """

    xi_hi: float
    tau: np.ndarray
    s: np.ndarray
    xi: np.ndarray
    r: np.ndarray
    arg: np.ndarray | None
    steps: np.ndarray
    bounds: np.ndarray


_PROFILE_CACHE: dict = {}
_PROFILE_CACHE_LIMIT = 128


def _profile(branch: Branch, data: InitialData, t: float, xi_hi: float,
             search: SearchSpec) -> _Profile:
    key = (branch, data, round(t, 12), round(xi_hi, 6), search)
    hit = _PROFILE_CACHE.get(key)
    if hit is not None:
        return hit
    n = search.grid_nodes
    tau, s, xi, steps, bounds = _axes(branch, data, t, xi_hi, n)
    if branch.index == 3:
        sgn = 1.0 if branch.side == "R" else -1.0
        r = data.cumulative_array(sgn * xi)
        prof = _Profile(xi_hi, tau, s, xi, r, None, steps, bounds)
    elif branch.index == 2:
        v = data.cumulative_array(-xi)
        body = _ratio_grid(xi[None, :], tau[:, None]) + v[None, :]
        if branch.side == "R":
            body = body - tau[:, None]
        arg = np.argmin(body, axis=1)
        r = body[np.arange(len(tau)), arg]
        prof = _Profile(xi_hi, tau, s, xi, r, arg, steps, bounds)
    else:
        v = data.cumulative_array(xi)
        d = tau[:, None, None] * (1.0 - s[None, :, None])
        u = tau[:, None, None] * s[None, :, None]
        body = _ratio_grid(xi[None, None, :], d) + v[None, None, :]
        body = body + (-u if branch.side == "R" else d)
        flat = body.reshape(len(tau), -1)
        arg = np.argmin(flat, axis=1)
        r = flat[np.arange(len(tau)), arg]
        prof = _Profile(xi_hi, tau, s, xi, r, arg, steps, bounds)
    if len(_PROFILE_CACHE) >= _PROFILE_CACHE_LIMIT:
        _PROFILE_CACHE.pop(next(iter(_PROFILE_CACHE)))
    _PROFILE_CACHE[key] = prof
    return prof


def _separated_minima(vals: np.ndarray, count: int) -> list[int]:
    """Indices of the smallest values within _START_BAND, no two adjacent."""
    order = np.argsort(vals, kind="stable")
    cutoff = float(vals[order[0]]) + _START_BAND
    picked: list[int] = []
    for i in order:
        i = int(i)
        if vals[i] > cutoff:
            break
        if any(abs(i - j) <= 1 for j in picked):
            continue
        picked.append(i)
        if len(picked) == count:
            break
    return picked


def _inner_row_starts(branch, data, x, t, prof, i, count):
    """Best separated inner cells of one tau row, recomputed on demand.

    The profile keeps only each row's single inner argmin; near a crossing
    of two inner basins that one cell can sit in the wrong basin, so rebuild
    the row (it is one vectorized evaluation) and return starts in the best
    ``count`` mutually non-adjacent cells.
    """
    tau_i = prof.tau[i]
    if branch.index == 2:
        v = data.cumulative_array(-prof.xi)
        row = _ratio_grid(prof.xi[None, :], np.array([[tau_i]]))[0] + v
        return [np.array([tau_i, prof.xi[k]]) for k in _separated_minima(row, count)]
    v = data.cumulative_array(prof.xi)
    d = tau_i * (1.0 - prof.s)
    plane = _ratio_grid(prof.xi[None, :], d[:, None]) + v[None, :]
    plane = plane + (-(tau_i * prof.s)[:, None] if branch.side == "R" else d[:, None])
    order = np.argsort(plane, axis=None, kind="stable")
    cutoff = float(plane.flat[order[0]]) + _START_BAND
    picked: list[tuple] = []
    starts = []
    for flat in order:
        if float(plane.flat[flat]) > cutoff:
            break
        j, k = np.unravel_index(int(flat), plane.shape)
        if any(max(abs(j - pj), abs(k - pk)) <= 1 for pj, pk in picked):
            continue
        picked.append((j, k))
        starts.append(np.array([tau_i, prof.s[j], prof.xi[k]]))
        if len(starts) == count:
            break
    return starts


def _minimize_with_profile(
    branch: Branch, data: InitialData, x: float, t: float, search: SearchSpec,
    prof: _Profile,
) -> MinimizerResult:
    """Two-phase search with the grid phase read off a shared profile.

    Like the standalone grid phase, several separated coarse cells are
    polished so a basin crossing near ``(x, t)`` cannot strand the descent
    in the wrong basin: the top tau rows are separated candidates, and the
    best row contributes its two best separated inner cells.
    """
    starts = []
    if branch.index == 3:
        sgn = 1.0 if branch.side == "R" else -1.0
        vals = (x - sgn * prof.xi) ** 2 / (2.0 * t) + prof.r
        starts = [np.array([prof.xi[i]]) for i in _separated_minima(vals, _GRID_STARTS)]
    else:
        vals = x * x / (2.0 * (t - prof.tau)) + prof.r
        rows = _separated_minima(vals, _PROFILE_ROWS)
        starts = _inner_row_starts(branch, data, x, t, prof, rows[0], 2)
        for i in rows[1:]:
            if branch.index == 2:
                starts.append(np.array([prof.tau[i], prof.xi[prof.arg[i]]]))
            else:
                j, k = np.unravel_index(prof.arg[i], (len(prof.s), len(prof.xi)))
                starts.append(np.array([prof.tau[i], prof.s[j], prof.xi[k]]))

    def f(z):
        return _closed_eval(branch, data, x, t, z)

    z_best, v_best = None, _INF
    for z0 in starts:
        z_new, v_new = _nelder_mead(
            f, z0, prof.steps, prof.bounds, search.refine_tol, search.max_refine_iter
        )
        if v_new < v_best:
            z_best, v_best = z_new, v_new
    return MinimizerResult(
        branch=branch, value=float(v_best), argmin=_rect_to_point(branch, z_best)
    )


# ---------------------------------------------------------------------------
# assembled limit and its derivative
# ---------------------------------------------------------------------------

_PRIORITY = {"R": (2, 1, 3), "L": (1, 2, 3)}


def _branch_velocity(branch: Branch, x: float, t: float, p: MinimizerPoint) -> float:
    """Characteristic velocity of one branch at its argmin."""
    if branch.index == 3:
        if branch.side == "R":
            return (x - p.xi) / t
        return (x + p.xi) / t
    return x / (t - p.tau)


def limit_U(
    side: str,
    data: InitialData,
    x: float,
    t: float,
    search: SearchSpec | None = None,
) -> LimitSolution:
    """Inviscid potential U at ``(x, t)``: minimum of the side's branches.

    The right side adds ``t`` to the raw minimum.  The active branch under a
    tie follows the fixed priority (2, 1, 3) on the right and (1, 2, 3) on
    the left, matching the spatial ordering of the regions from the source
    line outward; ``tie`` is set whenever a second branch comes within
    ``tie_tol``, and ``u`` is the active branch's characteristic velocity.

    The grid phase is shared across calls with equal ``t`` and datum (the
    x-dependent travel term separates), with the xi window rounded up to the
    next integer so nearby x reuse one profile.
    """
    search = search or SearchSpec()
    if side not in ("L", "R"):
        raise OutOfRange(f"side must be 'L' or 'R', got {side!r}")
    if t <= 0.0:
        raise OutOfRange(f"t must be positive, got {t}")
    _check_side(side, x)
    xi_hi = math.ceil(search.xi_max(data, x, t))
    raw = {}
    for i in (1, 2, 3):
        branch = Branch(side, i)
        prof = _profile(branch, data, t, xi_hi, search)
        raw[i] = _minimize_with_profile(branch, data, x, t, search, prof)
    best = min(r.value for r in raw.values())
    close = [i for i in _PRIORITY[side] if raw[i].value <= best + search.tie_tol]
    active_index = close[0]
    tie = len(close) > 1
    results = tuple(
        dataclasses.replace(raw[i], tie=tie and i in close) for i in (1, 2, 3)
    )
    active = results[active_index - 1]
    u_val = _branch_velocity(active.branch, x, t, active.argmin)
    shift = t if side == "R" else 0.0
    return LimitSolution(
        side=side, x=x, t=t, U=best + shift, u=u_val,
        active_branch=active.branch, tie=tie, results=results,
    )


def limit_velocity(
    side: str,
    data: InitialData,
    x: float,
    t: float,
    search: SearchSpec | None = None,
) -> float:
    """Inviscid velocity from the active branch's argmin.

    When branches tie, all tied candidates' velocities are compared; if they
    disagree by more than 1e-3 the point is genuinely ambiguous (a shock
    ordinate) and :class:`AmbiguousMinimizer` carries every candidate.
    Disagreement below that is argmin noise: values converge to refine_tol,
    so near a degenerate tie the argmins locate only to its square root.
    """
    search = search or SearchSpec()
    sol = limit_U(side, data, x, t, search)
    if not sol.tie:
        return sol.u
    tied = [r for r in sol.results if r.tie]
    speeds = [_branch_velocity(r.branch, x, t, r.argmin) for r in tied]
    if max(speeds) - min(speeds) > 1e-3:
        raise AmbiguousMinimizer(
            f"tied branches at ({x}, {t}) disagree on velocity",
            candidates=tuple(speeds),
        )
    return sol.u


def finite_diff_check_U(
    side: str,
    data: InitialData,
    x: float,
    t: float,
    h: float,
    search: SearchSpec | None = None,
) -> DerivativeCheck:
    """Centered difference [U(x+h) - U(x-h)] / 2h, skipped at branch kinks.

    The stencil is rejected when it crosses the source line, when either
    endpoint reports a tie, or when the active branch differs between the
    endpoints: U is Lipschitz but kinked there, so the quotient would test
    nothing meaningful.
    """
    search = search or SearchSpec()
    if h <= 0.0:
        raise OutOfRange("h must be positive")
    if (x - h) * (x + h) <= 0.0:
        raise OutOfRange("stencil straddles the source line")
    lo = limit_U(side, data, x - h, t, search)
    hi = limit_U(side, data, x + h, t, search)
    if lo.tie or hi.tie:
        return DerivativeCheck(None, True, "tie within the stencil")
    if lo.active_branch != hi.active_branch:
        return DerivativeCheck(None, True, "active branch changes across the stencil")
    return DerivativeCheck((hi.U - lo.U) / (2.0 * h), False)


# ---------------------------------------------------------------------------
# interface curves
# ---------------------------------------------------------------------------

def interfaces(
    side: str,
    data: InitialData,
    t: float,
    search: SearchSpec | None = None,
) -> InterfacePair:
    """Locate the two branch-switch abscissas at time ``t`` on one side.

    The regions are ordered from the source line outward (inner branch,
    middle branch, classical branch), so each boundary is found by bisection
    on value-based indicators after a coarse bracketing scan: the inner
    switch is where the axis-adjacent branch stops winning strictly, the
    outer switch is where the classical branch starts winning strictly.
    Bisection tolerance 1e-6 in x.
    """
    search = search or SearchSpec()
    if t <= 0.0:
        raise OutOfRange(f"t must be positive, got {t}")
    if side not in ("L", "R"):
        raise OutOfRange(f"side must be 'L' or 'R', got {side!r}")
    orient = 1.0 if side == "R" else -1.0
    x_max = (data.bound + math.sqrt(2.0)) * t + 1.0
    inner_b, middle_b, outer_b = _PRIORITY[side]
    tol = 1e-6

    def values(a: float):
        sol = limit_U(side, data, orient * a, t, search)
        return tuple(r.value for r in sol.results)

    def in_inner(a: float) -> bool:
        v = values(a)
        others = min(v[middle_b - 1], v[outer_b - 1])
        return v[inner_b - 1] < others - search.tie_tol

    def before_outer(a: float) -> bool:
        v = values(a)
        return min(v[inner_b - 1], v[middle_b - 1]) <= v[outer_b - 1] + search.tie_tol

    def bisect_flag(lo: float, hi: float, flag) -> float:
        # invariant: flag(lo) is True, flag(hi) is False
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if flag(mid):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    probes = np.linspace(x_max / 48.0, x_max, 48)
    outer_flags = [before_outer(float(a)) for a in probes]
    first_off = next((i for i, b in enumerate(outer_flags) if not b), None)
    if first_off is None:
        raise NonConvergence(
            f"no classical region found below |x| = {x_max}; datum too wild"
        )
    lo = 0.0 if first_off == 0 else float(probes[first_off - 1])
    outer_val = bisect_flag(lo, float(probes[first_off]), before_outer)
    outer_degenerate = outer_val <= max(10.0 * tol, x_max * 1e-4)

    inner_flags = [in_inner(float(a)) for a in probes[:first_off]]
    last_on = None
    for i, b in enumerate(inner_flags):
        if b:
            last_on = i
        else:
            break
    if last_on is None:
        seed = float(probes[0]) * 1e-6
        if in_inner(seed):
            inner_val = bisect_flag(seed, float(probes[0]), in_inner)
            inner_degenerate = False
        else:
            inner_val, inner_degenerate = 0.0, True
    else:
        hi_idx = last_on + 1
        hi = float(probes[hi_idx]) if hi_idx < len(probes) else x_max
        inner_val = bisect_flag(float(probes[last_on]), hi, in_inner)
        inner_degenerate = False
    if inner_val > outer_val:  # middle region empty; the switches coincide
        inner_val = outer_val
    return InterfacePair(
        side=side, t=t,
        inner=orient * inner_val, outer=orient * outer_val,
        inner_degenerate=inner_degenerate, outer_degenerate=outer_degenerate,
    )
