"""Command-line front end: config loading, experiment orchestration, CSV/JSON emission.

Config files are JSON with nested sections.  Unknown keys are rejected at
every level so a typo cannot silently disable a knob.  Schema::

    {
      "initial_data": {"left": 0.0, "steps": [[b1, v1], [b2, v2]]},
      "eps_list": [0.5],
      "out_dir": "results",
      "threads": 4,
      "quadrature": {"rel_tol": ..., "max_subdivisions": ...,
                     "xi_cutoff_sigmas": ..., "time_nodes_per_unit": ...},
      "search": {"grid_nodes": ..., "tie_tol": ..., "refine_tol": ...,
                 "max_refine_iter": ..., "oracle_nodes": ..., "seed": ...,
                 "xi_margin": ...},
      "viscous": {"x": GRID, "t": GRID},
      "limit": {"x": GRID, "t": GRID},
      "interfaces": {"sides": ["R", "L"], "t": GRID},
      "verify": {
        "convergence": {"points": [[x, t], ...], "final_gap": 0.1},
        "weak_residual": {"test_functions": [BUMP, ...], "tolerance": 1e-3},
        "flux": {"times": [0.5, 1.0], "tolerance": 1e-2},
        "rankine_hugoniot": {"checks": [{"t": 1.0, "side": "R",
                                         "which": "outer", "dt": 1e-3}],
                             "tolerance": 5e-3},
        "entropy": {"times": [0.5, 1.0, 1.5]}
      }
    }

where GRID is ``{"min": a, "max": b, "count": n}`` (inclusive, evenly
spaced) and BUMP is ``{"x_lo": ..., "x_hi": ..., "t_lo": ..., "t_hi": ...,
"amplitude": 1.0}``.  ``initial_data`` follows the piecewise-constant
layout: ``left`` is the constant left of the first breakpoint and each
``steps`` entry ``[b, v]`` sets the value from ``b`` to the next
breakpoint (the last one extends to +infinity).  Every section except
``initial_data`` is optional; each subcommand demands its own section
(``verify`` checks run only for the subsections present, so an empty
``verify`` section yields an empty passing report).

Command-line flags override config scalars: ``--out DIR`` replaces
``out_dir`` and ``--threads N`` replaces ``threads``.  The sha256 hash of
the effective config (after overrides, canonical JSON) is embedded in
every output file: a ``# config_sha256: ...`` comment line in CSVs and a
``config_sha256`` field in JSON reports.  Outputs are byte-identical
across reruns with the same effective config: floats are written with
shortest round-trip ``repr``, report keys are sorted, and all stochastic
search restarts are seeded from the config.

Exit codes: 0 success, 1 verification failed, 2 invalid config, 3
numerical failure or unwritable output.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import hashlib
import json
import math
import os
import sys
from typing import Any, Callable, Sequence

import numpy as np

from .errors import AmbiguousMinimizer, ConfigError, NotAShock, SourcewaveError
from .initial_data import InitialData
from .quadrature import QuadratureSpec
from .variational import SearchSpec, interfaces, limit_U, limit_velocity
from .verify import (
    TestFunction,
    convergence_study,
    flux_jump_at_source,
    interface_entropy_measure,
    inviscid_weak_residual,
    limit_velocity_field,
    rankine_hugoniot_at_interface,
)
from .viscous import build_trace, heat_left, heat_right, velocity

SCHEMA_VERSION = 1

# Below 1e-3 the boundary-trace quadrature cost and the e^{t/2eps} dynamic
# range grow without a compensating gain at desk scale; the limit layer is
# the right tool there.
EPS_FLOOR = 1e-3


# ---------------------------------------------------------------------------
# config parsing


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Validated run configuration shared by all subcommands."""

    data: InitialData
    eps_list: tuple[float, ...]
    out_dir: str
    threads: int
    quadrature: QuadratureSpec
    search: SearchSpec
    viscous: dict[str, Any] | None
    limit: dict[str, Any] | None
    interfaces: dict[str, Any] | None
    verify: dict[str, Any] | None
    sha256: str


def _fail(path: str, message: str) -> ConfigError:
    return ConfigError(f"config key '{path}': {message}")


def _expect_mapping(node: Any, path: str, allowed: Sequence[str]) -> dict:
    if not isinstance(node, dict):
        raise _fail(path, f"expected an object, got {type(node).__name__}")
    unknown = sorted(set(node) - set(allowed))
    if unknown:
        raise _fail(path, f"unknown key(s) {unknown}; allowed: {sorted(allowed)}")
    return node


def _expect_list(node: Any, path: str) -> list:
    if not isinstance(node, list):
        raise _fail(path, f"expected an array, got {type(node).__name__}")
    return node


def _number(node: Any, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise _fail(path, f"expected a number, got {type(node).__name__}")
    value = float(node)
    if not math.isfinite(value):
        raise _fail(path, "must be finite")
    return value


def _integer(node: Any, path: str) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        raise _fail(path, f"expected an integer, got {type(node).__name__}")
    return node


def _parse_initial_data(node: Any) -> InitialData:
    section = _expect_mapping(node, "initial_data", ("left", "steps"))
    if "left" not in section:
        raise _fail("initial_data.left", "required")
    left = _number(section["left"], "initial_data.left")
    steps = _expect_list(section.get("steps", []), "initial_data.steps")
    breakpoints: list[float] = []
    values: list[float] = [left]
    for i, entry in enumerate(steps):
        pair = _expect_list(entry, f"initial_data.steps[{i}]")
        if len(pair) != 2:
            raise _fail(f"initial_data.steps[{i}]", "expected [breakpoint, value]")
        breakpoints.append(_number(pair[0], f"initial_data.steps[{i}][0]"))
        values.append(_number(pair[1], f"initial_data.steps[{i}][1]"))
    try:
        return InitialData(tuple(breakpoints), tuple(values))
    except SourcewaveError as exc:
        raise _fail("initial_data", str(exc)) from exc


def _parse_grid(node: Any, path: str) -> np.ndarray:
    section = _expect_mapping(node, path, ("min", "max", "count"))
    for key in ("min", "max", "count"):
        if key not in section:
            raise _fail(f"{path}.{key}", "required")
    lo = _number(section["min"], f"{path}.min")
    hi = _number(section["max"], f"{path}.max")
    count = _integer(section["count"], f"{path}.count")
    if count < 1:
        raise _fail(f"{path}.count", "must be >= 1")
    if hi < lo:
        raise _fail(f"{path}.max", "must be >= min")
    if count == 1 and hi != lo:
        raise _fail(f"{path}.count", "count 1 needs min == max")
    return np.linspace(lo, hi, count)


def _parse_overrides(node: Any, path: str, factory: Callable, fields: Sequence[str]):
    section = _expect_mapping(node, path, fields)
    kwargs = {}
    for key, value in section.items():
        want_int = key in ("grid_nodes", "max_refine_iter", "oracle_nodes", "seed",
                           "max_subdivisions")
        kwargs[key] = (_integer(value, f"{path}.{key}") if want_int
                       else _number(value, f"{path}.{key}"))
    try:
        return factory(**kwargs)
    except (SourcewaveError, ValueError) as exc:
        raise _fail(path, str(exc)) from exc


_TOP_KEYS = ("initial_data", "eps_list", "out_dir", "threads", "quadrature",
             "search", "viscous", "limit", "interfaces", "verify")


def parse_config(raw: Any) -> RunConfig:
    """Validate a parsed JSON document into a :class:`RunConfig`.

    Raises :class:`ConfigError` on any structural or value problem; no
    computation starts before this returns.
    """
    top = _expect_mapping(raw, "<root>", _TOP_KEYS)
    if "initial_data" not in top:
        raise _fail("initial_data", "required")
    data = _parse_initial_data(top["initial_data"])

    eps_list: list[float] = []
    for i, entry in enumerate(_expect_list(top.get("eps_list", []), "eps_list")):
        eps = _number(entry, f"eps_list[{i}]")
        if eps < EPS_FLOOR:
            raise _fail(f"eps_list[{i}]",
                        f"viscosity {eps} is below the viscosity floor {EPS_FLOOR}")
        eps_list.append(eps)

    out_dir = top.get("out_dir", ".")
    if not isinstance(out_dir, str):
        raise _fail("out_dir", "expected a string")

    threads = top.get("threads", 0)
    threads = _integer(threads, "threads")
    if threads < 0:
        raise _fail("threads", "must be >= 0 (0 = available parallelism)")
    if threads == 0:
        threads = os.cpu_count() or 1

    quad = QuadratureSpec()
    if "quadrature" in top:
        quad = _parse_overrides(
            top["quadrature"], "quadrature", QuadratureSpec,
            ("rel_tol", "max_subdivisions", "xi_cutoff_sigmas",
             "time_nodes_per_unit"))
    search = SearchSpec()
    if "search" in top:
        search = _parse_overrides(
            top["search"], "search", SearchSpec,
            ("grid_nodes", "tie_tol", "refine_tol", "max_refine_iter",
             "oracle_nodes", "seed", "xi_margin"))

    sections: dict[str, dict[str, Any] | None] = {}
    for name in ("viscous", "limit", "interfaces", "verify"):
        sections[name] = top[name] if name in top else None
        if sections[name] is not None and not isinstance(sections[name], dict):
            raise _fail(name, "expected an object")

    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"),
                           allow_nan=False)
    digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    return RunConfig(data=data, eps_list=tuple(eps_list), out_dir=out_dir,
                     threads=threads, quadrature=quad, search=search,
                     viscous=sections["viscous"], limit=sections["limit"],
                     interfaces=sections["interfaces"],
                     verify=sections["verify"], sha256=digest)


def _reject_nonfinite(name: str) -> float:
    raise ConfigError(f"config contains non-finite literal {name}")


def load_config(path: str, out_dir: str | None = None,
                threads: int | None = None) -> RunConfig:
    """Read a JSON config file and apply flag overrides before hashing."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh, parse_constant=_reject_nonfinite)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    if out_dir is not None:
        raw["out_dir"] = out_dir
    if threads is not None:
        raw["threads"] = threads
    return parse_config(raw)


# ---------------------------------------------------------------------------
# output plumbing


def _fmt(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(config: RunConfig, name: str, header: str,
               rows: Sequence[Sequence[Any]]) -> str:
    lines = [f"# config_sha256: {config.sha256}", header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path = os.path.join(config.out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _write_report(config: RunConfig, name: str, payload: dict) -> str:
    payload = dict(payload)
    payload["schema_version"] = SCHEMA_VERSION
    payload["config_sha256"] = config.sha256
    path = os.path.join(config.out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2,
                            allow_nan=False) + "\n")
    return path


def _ensure_out_dir(config: RunConfig) -> None:
    os.makedirs(config.out_dir, exist_ok=True)
    probe = os.path.join(config.out_dir, ".write_probe")
    with open(probe, "w", encoding="utf-8") as fh:
        fh.write("")
    os.remove(probe)


def _map_ordered(threads: int, fn: Callable, items: Sequence) -> list:
    """Apply ``fn`` over ``items`` preserving order.

    Workers only read shared immutable state (trace splines, initial data),
    so a thread pool is safe; assembly stays single-threaded and ordered
    regardless of completion order.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands


def cmd_viscous(config: RunConfig) -> int:
    """Tabulate the boundary trace and the viscous field on a grid."""
    if config.viscous is None:
        raise ConfigError("subcommand 'viscous' needs a 'viscous' config section")
    if not config.eps_list:
        raise ConfigError("subcommand 'viscous' needs a nonempty eps_list")
    section = _expect_mapping(config.viscous, "viscous", ("x", "t"))
    for key in ("x", "t"):
        if key not in section:
            raise _fail(f"viscous.{key}", "required")
    xs = _parse_grid(section["x"], "viscous.x")
    ts = _parse_grid(section["t"], "viscous.t")
    if np.any(ts <= 0.0):
        raise _fail("viscous.t.min", "times must be positive")
    if np.any(xs == 0.0):
        raise _fail("viscous.x", "grid contains x = 0; the viscous velocity "
                    "is discontinuous across the source line, evaluate on "
                    "either side instead")

    _ensure_out_dir(config)
    t_end = float(ts[-1]) * 1.02 + 0.01
    field_rows: list[tuple] = []
    trace_rows: list[tuple] = []
    for eps in config.eps_list:
        trace = build_trace(config.data, eps, t_end, q=config.quadrature)

        def one(point: tuple[float, float], _eps=eps, _trace=trace) -> tuple:
            x, t = point
            side = heat_right if x > 0.0 else heat_left
            theta = side(config.data, _eps, _trace, x, t, q=config.quadrature)
            u = velocity(config.data, _eps, _trace, x, t, q=config.quadrature)
            return (x, t, _eps, theta.log_magnitude, u)

        points = [(float(x), float(t)) for t in ts for x in xs]
        field_rows.extend(_map_ordered(config.threads, one, points))
        trace_rows.extend(
            (float(t), eps, math.exp(trace.log_g_at(float(t)))) for t in ts)

    _write_csv(config, "viscous_field.csv", "x,t,eps,theta_log,u_eps", field_rows)
    _write_csv(config, "viscous_trace.csv", "t,eps,g", trace_rows)
    return 0


def cmd_limit(config: RunConfig) -> int:
    """Sweep the inviscid limit and its interface curves."""
    if config.limit is None:
        raise ConfigError("subcommand 'limit' needs a 'limit' config section")
    section = _expect_mapping(config.limit, "limit", ("x", "t"))
    for key in ("x", "t"):
        if key not in section:
            raise _fail(f"limit.{key}", "required")
    xs = _parse_grid(section["x"], "limit.x")
    ts = _parse_grid(section["t"], "limit.t")
    if np.any(ts <= 0.0):
        raise _fail("limit.t.min", "times must be positive")
    if np.any(xs == 0.0):
        raise _fail("limit.x", "grid contains x = 0; sweep one-sided points "
                    "(the limit velocity jumps across the source line)")

    _ensure_out_dir(config)

    def one(point: tuple[float, float]) -> tuple:
        x, t = point
        side = "R" if x > 0.0 else "L"
        sol = limit_U(side, config.data, x, t, config.search)
        active = next(r for r in sol.results if r.branch == sol.active_branch)
        try:
            u = limit_velocity(side, config.data, x, t, config.search)
        except AmbiguousMinimizer:
            u = math.nan
        return (x, t, sol.U, u, f"{side}{sol.active_branch.index}",
                active.argmin.tau, active.argmin.u, active.argmin.xi, sol.tie)

    points = [(float(x), float(t)) for t in ts for x in xs]
    rows = _map_ordered(config.threads, one, points)
    # nan has no JSON analog and CSV consumers differ; write it literally.
    out = []
    for row in rows:
        out.append(tuple("nan" if isinstance(v, float) and math.isnan(v) else v
                         for v in row))
    _write_csv(config, "limit_field.csv", "x,t,U,u,branch,tau,u_inner,xi,tie", out)

    sides = {"R": [], "L": []}
    for t in ts:
        for side in ("R", "L"):
            pair = interfaces(side, config.data, float(t), config.search)
            sides[side].append(pair)
    _write_csv(config, "interfaces_right.csv", "t,x2,x1",
               [(float(t), p.inner, p.outer) for t, p in zip(ts, sides["R"])])
    _write_csv(config, "interfaces_left.csv", "t,y1,y2",
               [(float(t), p.outer, p.inner) for t, p in zip(ts, sides["L"])])
    return 0


def cmd_interfaces(config: RunConfig) -> int:
    """Tabulate only the interface curves over a time grid."""
    if config.interfaces is None:
        raise ConfigError(
            "subcommand 'interfaces' needs an 'interfaces' config section")
    section = _expect_mapping(config.interfaces, "interfaces", ("sides", "t"))
    if "t" not in section:
        raise _fail("interfaces.t", "required")
    ts = _parse_grid(section["t"], "interfaces.t")
    if np.any(ts <= 0.0):
        raise _fail("interfaces.t.min", "times must be positive")
    sides = section.get("sides", ["R", "L"])
    sides = _expect_list(sides, "interfaces.sides")
    for i, side in enumerate(sides):
        if side not in ("R", "L"):
            raise _fail(f"interfaces.sides[{i}]", "must be 'R' or 'L'")

    _ensure_out_dir(config)
    for side in sides:
        pairs = _map_ordered(
            config.threads,
            lambda t, _s=side: interfaces(_s, config.data, float(t),
                                          config.search),
            [float(t) for t in ts])
        if side == "R":
            _write_csv(config, "interfaces_right.csv", "t,x2,x1",
                       [(float(t), p.inner, p.outer)
                        for t, p in zip(ts, pairs)])
        else:
            _write_csv(config, "interfaces_left.csv", "t,y1,y2",
                       [(float(t), p.outer, p.inner)
                        for t, p in zip(ts, pairs)])
    return 0


def _verify_convergence(config: RunConfig, section: dict,
                        checks: list[dict]) -> None:
    node = _expect_mapping(section, "verify.convergence",
                           ("points", "final_gap"))
    if "points" not in node:
        raise _fail("verify.convergence.points", "required")
    if not config.eps_list:
        raise ConfigError("verify.convergence needs a nonempty eps_list")
    tol = _number(node.get("final_gap", 0.1), "verify.convergence.final_gap")
    for i, entry in enumerate(_expect_list(node["points"],
                                           "verify.convergence.points")):
        pair = _expect_list(entry, f"verify.convergence.points[{i}]")
        if len(pair) != 2:
            raise _fail(f"verify.convergence.points[{i}]", "expected [x, t]")
        x = _number(pair[0], f"verify.convergence.points[{i}][0]")
        t = _number(pair[1], f"verify.convergence.points[{i}][1]")
        report = convergence_study(config.data, (x, t), list(config.eps_list),
                                   q=config.quadrature, search=config.search)
        passed = bool(report.monotone_decreasing) and report.final_gap <= tol
        entry_payload = report.to_jsonable()
        entry_payload.update(kind="convergence", tolerance=tol, passed=passed)
        checks.append(entry_payload)


def _verify_weak_residual(config: RunConfig, section: dict,
                          checks: list[dict]) -> None:
    node = _expect_mapping(section, "verify.weak_residual",
                           ("test_functions", "tolerance"))
    if "test_functions" not in node:
        raise _fail("verify.weak_residual.test_functions", "required")
    tol = _number(node.get("tolerance", 1e-3), "verify.weak_residual.tolerance")
    u_field = limit_velocity_field(config.data, config.search)
    fields = ("x_lo", "x_hi", "t_lo", "t_hi", "amplitude")
    for i, entry in enumerate(_expect_list(
            node["test_functions"], "verify.weak_residual.test_functions")):
        path = f"verify.weak_residual.test_functions[{i}]"
        box = _expect_mapping(entry, path, fields)
        kwargs = {}
        for key in fields:
            if key in box:
                kwargs[key] = _number(box[key], f"{path}.{key}")
        try:
            fn = TestFunction(**kwargs)
        except (SourcewaveError, TypeError) as exc:
            raise _fail(path, str(exc)) from exc
        residual = inviscid_weak_residual(config.data, u_field, fn,
                                          q=config.quadrature,
                                          search=config.search)
        checks.append({
            "kind": "weak_residual",
            "box": list(fn.box),
            "residual": residual,
            "tolerance": tol,
            "passed": abs(residual) <= tol,
        })


def _verify_flux(config: RunConfig, section: dict, checks: list[dict]) -> None:
    node = _expect_mapping(section, "verify.flux", ("times", "tolerance"))
    if "times" not in node:
        raise _fail("verify.flux.times", "required")
    tol = _number(node.get("tolerance", 1e-2), "verify.flux.tolerance")
    for i, entry in enumerate(_expect_list(node["times"], "verify.flux.times")):
        t = _number(entry, f"verify.flux.times[{i}]")
        jump = flux_jump_at_source(config.data, t, config.search)
        checks.append({
            "kind": "flux_jump",
            "t": t,
            "jump": jump,
            "tolerance": tol,
            "passed": abs(jump - 1.0) <= tol,
        })


def _verify_rh(config: RunConfig, section: dict, checks: list[dict]) -> None:
    node = _expect_mapping(section, "verify.rankine_hugoniot",
                           ("checks", "tolerance"))
    if "checks" not in node:
        raise _fail("verify.rankine_hugoniot.checks", "required")
    tol = _number(node.get("tolerance", 5e-3),
                  "verify.rankine_hugoniot.tolerance")
    for i, entry in enumerate(_expect_list(node["checks"],
                                           "verify.rankine_hugoniot.checks")):
        path = f"verify.rankine_hugoniot.checks[{i}]"
        spec = _expect_mapping(entry, path, ("t", "side", "which", "dt"))
        for key in ("t", "side", "which"):
            if key not in spec:
                raise _fail(f"{path}.{key}", "required")
        t = _number(spec["t"], f"{path}.t")
        side = spec["side"]
        which = spec["which"]
        if side not in ("R", "L"):
            raise _fail(f"{path}.side", "must be 'R' or 'L'")
        if which not in ("inner", "outer"):
            raise _fail(f"{path}.which", "must be 'inner' or 'outer'")
        dt = _number(spec.get("dt", 1e-3), f"{path}.dt")
        payload: dict[str, Any] = {"kind": "rankine_hugoniot", "t": t,
                                   "side": side, "which": which,
                                   "tolerance": tol}
        try:
            speed_fd, speed_rh = rankine_hugoniot_at_interface(
                config.data, t, side, which, dt, config.search)
        except NotAShock as exc:
            payload.update(not_a_shock=True, detail=str(exc), passed=True)
        else:
            payload.update(speed_fd=speed_fd, speed_rh=speed_rh,
                           passed=abs(speed_fd - speed_rh) <= tol)
        checks.append(payload)


def _verify_entropy(config: RunConfig, section: dict,
                    checks: list[dict]) -> None:
    node = _expect_mapping(section, "verify.entropy", ("times",))
    if "times" not in node:
        raise _fail("verify.entropy.times", "required")
    ts = [_number(entry, f"verify.entropy.times[{i}]")
          for i, entry in enumerate(_expect_list(node["times"],
                                                 "verify.entropy.times"))]
    measure = interface_entropy_measure(config.data, ts, config.search)
    # Reported, not gated: the source admits data whose flux jump stays
    # at unity while no time slice sees inflow from both sides.
    checks.append({"kind": "entropy_measure", "times": ts,
                   "measure": measure, "passed": True})


def cmd_verify(config: RunConfig) -> int:
    """Run the configured verification checks and write a JSON report."""
    if config.verify is None:
        raise ConfigError("subcommand 'verify' needs a 'verify' config section")
    section = _expect_mapping(
        config.verify, "verify",
        ("convergence", "weak_residual", "flux", "rankine_hugoniot", "entropy"))
    _ensure_out_dir(config)
    checks: list[dict] = []
    if "convergence" in section:
        _verify_convergence(config, section["convergence"], checks)
    if "weak_residual" in section:
        _verify_weak_residual(config, section["weak_residual"], checks)
    if "flux" in section:
        _verify_flux(config, section["flux"], checks)
    if "rankine_hugoniot" in section:
        _verify_rh(config, section["rankine_hugoniot"], checks)
    if "entropy" in section:
        _verify_entropy(config, section["entropy"], checks)

    n_failed = sum(1 for c in checks if not c["passed"])
    _write_report(config, "verify_report.json", {
        "checks": checks,
        "n_checks": len(checks),
        "n_failed": n_failed,
        "passed": n_failed == 0,
    })
    return 0 if n_failed == 0 else 1


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "viscous": cmd_viscous,
    "limit": cmd_limit,
    "verify": cmd_verify,
    "interfaces": cmd_interfaces,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sourcewave",
        description="Point-source Burgers flows: viscous fields, inviscid "
                    "limits, and verification reports.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--out", default=None, help="override out_dir")
        p.add_argument("--threads", type=int, default=None,
                       help="override worker count (0 = all cores)")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config, out_dir=args.out,
                             threads=args.threads)
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SourcewaveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
