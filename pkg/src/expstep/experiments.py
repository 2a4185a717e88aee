"""Experiment presets, the table runner and report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .integrator import DivergenceError, Grid, OdeSystem, Trajectory, integrate
from .lienard import (ConjectureVerdict, LienardSpec, constant_spec, default_battery,
                      polynomial_spec, test_boundedness, vdp_spec)
from .metrics import (ErrorReport, build_spline, first_integral_drift, node_mse, pde_mse,
                      residual_error, sup_node_error)
from .models import CATALOG, PROFILES, burgers, burgers_initial_state, lindstedt_poincare_derivatives, make_model
from .reference import FLAVORS, ReferenceConfig, integrate_reference, rk_reference

METHODS = ("matrix", "taylor2", "taylor3", "taylor4", "rk4", "lindstedt")
TABLE_METRICS = ("node_mse", "residual", "first_integral_drift", "sup_error")
FORMATS = ("csv", "json")
# Largest RK4 step used for reference trajectories.
REFERENCE_STEP = 2.5e-4
REFERENCE_NOTE = f"classical RK4 substepped to a step <= {REFERENCE_STEP:g}"


class UsageError(ValueError):
    """Invalid configuration or input file."""


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    params: dict = field(default_factory=dict)
    methods: tuple = ("matrix",)
    h_list: tuple = (0.1,)
    T: float = 20.0
    initial: tuple = ()
    metric: str = "node_mse"
    taylor_flavor: str = "system"
    output: Optional[str] = None
    format: str = "csv"
    required: bool = False
    name: str = "custom"

    def __post_init__(self):
        if self.model not in CATALOG or self.model == "burgers":
            valid = ", ".join(sorted(k for k in CATALOG if k != "burgers"))
            raise UsageError(f"unknown model {self.model!r}; valid: {valid}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise UsageError(f"unknown method {bad[0] if bad else '(none)'!r}; valid: {', '.join(METHODS)}")
        if self.metric not in TABLE_METRICS:
            raise UsageError(f"unknown metric {self.metric!r}; valid: {', '.join(TABLE_METRICS)}")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}; valid: {', '.join(FORMATS)}")
        if self.taylor_flavor not in FLAVORS:
            raise UsageError(f"unknown Taylor flavor {self.taylor_flavor!r}; valid: {', '.join(FLAVORS)}")
        if not self.T > 0 or not self.h_list or any(not h > 0 for h in self.h_list):
            raise UsageError("T and every step size must be positive")

    def system(self) -> OdeSystem:
        try:
            sys = make_model(self.model, **self.params)
        except TypeError as exc:
            raise UsageError(f"bad parameters for {self.model}: {exc}") from None
        if len(self.initial) != sys.dim:
            raise UsageError(f"{self.model} needs an initial state of length {sys.dim}")
        return sys


_H6 = (1e-4, 1e-3, 1e-2, 0.1, 0.2, 0.5)

PRESETS: dict[str, ExperimentConfig] = {
    "table1": ExperimentConfig("van_der_pol", {"mu": 0.5}, ("matrix", "taylor3", "taylor4"), _H6,
                               20.0, (0.0, 2.0), taylor_flavor="scalar", name="table1"),
    "table2": ExperimentConfig("duffing", {}, ("matrix", "taylor3", "taylor4"), _H6,
                               20.0, (1.0, 0.0), name="table2"),
    "table3": ExperimentConfig("lorenz", {"a": 10.0, "b": 9.996, "c": 8.0 / 3.0},
                               ("matrix", "taylor2", "taylor3", "taylor4"), (1e-2, 0.1, 0.2),
                               10.0, (1.0, 0.0, 1.0), name="table3"),
    "table4": ExperimentConfig("neutral_damping", {"eps": 0.1}, ("matrix", "taylor3", "taylor4"), _H6,
                               2 * math.pi, (1.0, 0.0), name="table4"),
    "table5": ExperimentConfig("neutral_damping", {"eps": 0.1},
                               ("matrix", "taylor2", "taylor3", "taylor4", "lindstedt"), _H6,
                               2 * math.pi, (1.0, 0.0), metric="residual", name="table5"),
    "table6": ExperimentConfig("epidemic", {"a": 5e-4, "b": 0.1}, ("matrix", "taylor2", "taylor3"),
                               (0.01, 0.1, 1.0, 2.0), 100.0, (300.0, 20.0, 0.0), name="table6"),
    "table7": ExperimentConfig("lotka_volterra", {"a": 1.2, "b": 0.6, "c": 0.8, "d": 0.3},
                               ("matrix", "taylor2", "taylor3"), (0.01, 0.1, 0.2),
                               20.0, (3.0, 3.0), name="table7"),
}

# Published values keyed by (method, nominal h); None marks a divergent entry.
PUBLISHED: dict[str, dict[tuple[str, float], Optional[float]]] = {
    "table1": {
        ("matrix", 1e-4): 2.63e-11, ("matrix", 1e-3): 2.08e-11, ("matrix", 1e-2): 1.46e-8,
        ("matrix", 0.1): 2.04e-5, ("matrix", 0.2): 2.30e-4, ("matrix", 0.5): 8.10e-3,
        ("taylor3", 1e-4): 8.60e-7, ("taylor3", 1e-3): 8.30e-9, ("taylor3", 1e-2): 9.11e-9,
        ("taylor3", 0.1): 1.17e-4, ("taylor3", 0.2): 2.23e-3, ("taylor3", 0.5): 1.49e-1,
        ("taylor4", 1e-4): 6.40e-7, ("taylor4", 1e-3): 6.45e-9, ("taylor4", 1e-2): 6.60e-11,
        ("taylor4", 0.1): 1.67e-7, ("taylor4", 0.2): 7.94e-6, ("taylor4", 0.5): 2.75e-3,
    },
    "table2": {
        ("matrix", 1e-4): 1.69e-9, ("matrix", 1e-3): 1.03e-10, ("matrix", 1e-2): 9.61e-9,
        ("matrix", 0.1): 1.16e-5, ("matrix", 0.2): 1.18e-4, ("matrix", 0.5): 82.00e-3,
        ("taylor3", 1e-4): 5.60e-5, ("taylor3", 1e-3): 5.06e-7, ("taylor3", 1e-2): 2.47e-8,
        ("taylor3", 0.1): 4.92e-4, ("taylor3", 0.2): 6.78e-3, ("taylor3", 0.5): 1.04e-1,
        ("taylor4", 1e-4): 4.13e-5, ("taylor4", 1e-3): 4.24e-7, ("taylor4", 1e-2): 4.24e-9,
        ("taylor4", 0.1): 4.12e-8, ("taylor4", 0.2): 7.56e-6, ("taylor4", 0.5): 7.73e-3,
    },
    "table3": {
        ("matrix", 1e-2): 5.2e-6, ("matrix", 0.1): 5.3e-2, ("matrix", 0.2): 3.7e-1,
        ("taylor2", 1e-2): 6.73e-5, ("taylor2", 0.1): 7.1e-1, ("taylor2", 0.2): None,
        ("taylor3", 1e-2): 3.6e-8, ("taylor3", 0.1): 1.8e-1, ("taylor3", 0.2): None,
        ("taylor4", 1e-2): 3.1e-10, ("taylor4", 0.1): 5.2e-2, ("taylor4", 0.2): None,
    },
    "table4": {
        ("matrix", 1e-4): 2.2e-14, ("matrix", 1e-3): 1.9e-14, ("matrix", 1e-2): 9.0e-14,
        ("matrix", 0.1): 1.6e-9, ("matrix", 0.2): 2.6e-8, ("matrix", 0.5): 1.1e-6,
        ("taylor3", 1e-4): 4.2e-14, ("taylor3", 1e-3): 4.1e-11, ("taylor3", 1e-2): 4.6e-13,
        ("taylor3", 0.1): 2.7e-7, ("taylor3", 0.2): 8.6e-6, ("taylor3", 0.5): 7.5e-4,
        ("taylor4", 1e-4): 3.2e-11, ("taylor4", 1e-3): 3.1e-11, ("taylor4", 1e-2): 4.0e-12,
        ("taylor4", 0.1): 8.2e-11, ("taylor4", 0.2): 1.0e-9, ("taylor4", 0.5): 6.1e-6,
    },
    "table5": {
        ("matrix", 1e-4): 7.2e-16, ("matrix", 1e-3): 1.8e-14, ("matrix", 1e-2): 1.9e-10,
        ("matrix", 0.1): 4.6e-6, ("matrix", 0.2): 6.1e-5, ("matrix", 0.5): 4.8e-3,
        ("taylor2", 1e-4): 4.7e-16, ("taylor2", 1e-3): 1.8e-14, ("taylor2", 1e-2): 1.9e-11,
        ("taylor2", 0.1): 6.4e-6, ("taylor2", 0.2): 9.8e-5, ("taylor2", 0.5): 1.2e-3,
        ("taylor3", 1e-4): 6.7e-16, ("taylor3", 1e-3): 1.8e-14, ("taylor3", 1e-2): 1.1e-10,
        ("taylor3", 0.1): 4.6e-6, ("taylor3", 0.2): 6.0e-5, ("taylor3", 0.5): 4.6e-3,
        ("taylor4", 1e-4): 6.5e-16, ("taylor4", 1e-3): 1.8e-14, ("taylor4", 1e-2): 1.1e-10,
        ("taylor4", 0.1): 4.6e-6, ("taylor4", 0.2): 6.0e-5, ("taylor4", 0.5): 4.9e-3,
    },
    "table6": {
        ("matrix", 0.01): 2.2e-11, ("matrix", 0.1): 2.0e-8, ("matrix", 1.0): 2.1e-4, ("matrix", 2.0): 3.6e-3,
        ("taylor2", 0.01): 4.0e-11, ("taylor2", 0.1): 7.3e-8, ("taylor2", 1.0): 7.2e-4, ("taylor2", 2.0): 1.1e-2,
        ("taylor3", 0.01): 1.9e-11, ("taylor3", 0.1): 2.0e-11, ("taylor3", 1.0): 1.7e-7, ("taylor3", 2.0): 1.2e-5,
    },
    "table7": {
        ("matrix", 0.01): 4.1e-8, ("matrix", 0.1): 3.5e-8, ("matrix", 0.2): 2.6e-3,
        ("taylor2", 0.01): 3.5e-8, ("taylor2", 0.1): 5.4e-8, ("taylor2", 0.2): 5.4e-3,
        ("taylor3", 0.01): 8.2e-13, ("taylor3", 0.1): 2.3e-9, ("taylor3", 0.2): 1.0e-5,
    },
}

# Initial states used by the presets, the default for ad-hoc runs.
DEFAULT_INITIAL = {cfg.model: cfg.initial for cfg in PRESETS.values()}

PROFILE_NAMES = tuple(PROFILES)
BURGERS_PRESET = {"n_space": 5, "m_time": 10, "profile": "sin_pi"}
# Battery cases: Hamiltonian, damped and anti-damped with g = 1/2.
LIENARD_PRESET = {
    "hamiltonian": "constant f=0 g=0.5",
    "damped": "constant f=1 g=0.5",
    "growing": "constant f=-1 g=0.5",
}

LINDSTEDT_RESIDUAL = 1.1e-4
BURGERS_PUBLISHED = 1.07e-4


def make_grid(T: float, h: float) -> Grid:
    """Grid on [0, T] with N = round(T/h); the step is recomputed from N."""
    return Grid.from_step(0.0, T, h)


def reference_trajectory(sys: OdeSystem, y0, grid: Grid) -> Trajectory:
    """Exact solution when the model carries a validated one, else substepped RK4."""
    if sys.exact_solution is not None:
        return Trajectory(grid, np.array([sys.exact_solution(t) for t in grid.nodes()]))
    substeps = max(1, math.ceil(grid.h / REFERENCE_STEP - 1e-9))
    return rk_reference(sys, y0, grid, substeps)


def lindstedt_trajectory(eps: float, grid: Grid) -> Trajectory:
    x, dx, _ = lindstedt_poincare_derivatives(eps, grid.nodes())
    return Trajectory(grid, np.column_stack([x, dx]))


def run_method(sys: OdeSystem, method: str, y0, grid: Grid, flavor: str = "system") -> Trajectory:
    if method == "matrix":
        return integrate(sys, y0, grid)
    if method == "lindstedt":
        if sys.name != "neutral_damping" or tuple(y0) != (1.0, 0.0):
            raise UsageError("the lindstedt method needs neutral_damping with initial state (1, 0)")
        return lindstedt_trajectory(sys.params["eps"], grid)
    return integrate_reference(sys, y0, grid, ReferenceConfig(method, flavor=flavor))


def compute_metric(metric: str, sys: OdeSystem, traj: Trajectory, ref: Optional[Trajectory]) -> float:
    T = traj.grid.tN - traj.grid.t0
    if metric == "node_mse":
        return node_mse(traj, ref)
    if metric == "sup_error":
        return sup_node_error(traj, ref)
    if metric == "first_integral_drift":
        return first_integral_drift(traj, sys.first_integral, T)
    if metric == "residual":
        if "eps" not in sys.params:
            raise UsageError("the residual metric is defined for neutral_damping only")
        spline = build_spline(traj.times, traj.states[:, 0], bc="not-a-knot")
        return residual_error(spline, sys.params["eps"], T)
    raise UsageError(f"unknown metric {metric!r}")


def run_table(config: ExperimentConfig) -> list[ErrorReport]:
    """One report per (method, h), ordered by method as configured and then by h."""
    sys = config.system()
    y0 = np.array(config.initial, dtype=float)
    needs_ref = config.metric in ("node_mse", "sup_error")
    if config.metric == "first_integral_drift" and sys.first_integral is None:
        raise UsageError(f"{config.model} supplies no first integral")
    refs: dict[int, Trajectory] = {}
    rows = []
    for method in config.methods:
        for h in sorted(config.h_list):
            grid = make_grid(config.T, h)
            if needs_ref and grid.N not in refs:
                refs[grid.N] = reference_trajectory(sys, y0, grid)
            start = time.perf_counter()
            try:
                traj = run_method(sys, method, y0, grid, config.taylor_flavor)
            except DivergenceError:
                ms = 1e3 * (time.perf_counter() - start)
                rows.append(ErrorReport(config.model, method, config.metric, grid.h, math.nan, ms, "error"))
                continue
            ms = 1e3 * (time.perf_counter() - start)
            value = compute_metric(config.metric, sys, traj, refs.get(grid.N))
            status = "ok" if math.isfinite(value) else "error"
            rows.append(ErrorReport(config.model, method, config.metric, grid.h, value, ms, status))
    return rows


def published_value(preset: str, method: str, h: float) -> Optional[float]:
    """Published entry for a report of the preset; ``h`` may be nominal or recomputed.

    Steps are matched through the node count N = round(T/h), which is what the
    run actually used. Raises KeyError when the table has no such entry.
    """
    T = PRESETS[preset].T
    n = round(T / h)
    for (m, hp), v in PUBLISHED.get(preset, {}).items():
        if m == method and round(T / hp) == n:
            return v
    raise KeyError((preset, method, h))


# --- Burgers -------------------------------------------------------------------------


@dataclass(frozen=True)
class BurgersResult:
    report: ErrorReport
    x: np.ndarray
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    profile: str

    @property
    def final_max(self) -> float:
        return float(np.max(np.abs(self.u[-1])))


def burgers_pde_rhs(u: np.ndarray, hx: float) -> np.ndarray:
    """Interior time derivative for u_t = u_xx + (u^2/2)_x with zero boundary values.

    Conservative central differences, deliberately a different spatial form
    from the factored matrix model.
    """
    w = np.concatenate(([0.0], u, [0.0]))
    lap = (w[2:] - 2 * w[1:-1] + w[:-2]) / (hx * hx)
    flux = (w[2:] ** 2 - w[:-2] ** 2) / (4 * hx)
    return lap + flux


def burgers_reference(n_space: int, m_time: int, profile="sin_pi", min_nodes: int = 64) -> np.ndarray:
    """Fine-grid RK4 solution sampled at x_k = k/n_space, t_j = j/m_time.

    The fine grid uses the smallest multiple of n_space that is at least
    ``min_nodes`` so every coarse node is a fine node.
    """
    fine = n_space * math.ceil(min_nodes / n_space)
    hx = 1.0 / fine
    u = _profile_on(fine, profile, n_space)
    ht = 1.0 / m_time
    # explicit stability needs dt below about 0.7 hx^2
    sub = math.ceil(ht / (0.25 * hx * hx))
    dt = ht / sub
    ratio = fine // n_space
    out = np.zeros((m_time + 1, n_space + 1))
    out[0, 1:-1] = u[ratio - 1::ratio][: n_space - 1]
    for j in range(1, m_time + 1):
        for _ in range(sub):
            k1 = burgers_pde_rhs(u, hx)
            k2 = burgers_pde_rhs(u + 0.5 * dt * k1, hx)
            k3 = burgers_pde_rhs(u + 0.5 * dt * k2, hx)
            k4 = burgers_pde_rhs(u + dt * k3, hx)
            u = u + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[j, 1:-1] = u[ratio - 1::ratio][: n_space - 1]
    return out


def _profile_on(n: int, profile, n_coarse: int) -> np.ndarray:
    if isinstance(profile, str) or callable(profile):
        return burgers_initial_state(n, profile)
    # tabulated coarse values: interpolate linearly (boundary zeros included)
    vals = np.asarray(profile, dtype=float)
    if vals.shape != (n_coarse - 1,):
        raise UsageError(f"tabulated profile needs {n_coarse - 1} interior values")
    xc = np.arange(n_coarse + 1) / n_coarse
    return np.interp(np.arange(1, n) / n, xc, np.concatenate(([0.0], vals, [0.0])))


def run_burgers(n_space: int = 5, m_time: int = 10, profile="sin_pi") -> BurgersResult:
    """Matrix-method solution of the semidiscrete Burgers system on t in [0, 1]."""
    if n_space < 2 or m_time < 1:
        raise UsageError("need n_space >= 2 and m_time >= 1")
    sys = burgers(n_space)
    y0 = burgers_initial_state(n_space, profile)
    grid = Grid(0.0, 1.0, m_time)
    start = time.perf_counter()
    traj = integrate(sys, y0, grid)
    ms = 1e3 * (time.perf_counter() - start)
    u = np.zeros((m_time + 1, n_space + 1))
    u[:, 1:-1] = traj.states
    v = burgers_reference(n_space, m_time, profile)
    err = pde_mse(u, v, m_time, n_space)
    label = profile if isinstance(profile, str) else "tabulated"
    report = ErrorReport("burgers", "matrix", "pde_mse", grid.h, err, ms)
    return BurgersResult(report, np.arange(n_space + 1) / n_space, grid.nodes(), u, v, label)


def write_field_csv(result: BurgersResult, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["t"] + [f"x={x!r}" for x in result.x.tolist()])
    for t, row in zip(result.t.tolist(), result.u):
        w.writerow([repr(t)] + [repr(float(v)) for v in row])


# --- Lienard specs -------------------------------------------------------------------

_LIENARD_KINDS = ("constant", "vdp", "poly")


def _parse_floats(text: str, where: str) -> list[float]:
    try:
        vals = [float(p) for p in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"{where}: expected numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{where}: empty value")
    return vals


def lienard_from_pairs(pairs: Sequence[tuple[str, str, str]]) -> tuple[LienardSpec, dict]:
    """Build a spec from (key, value, location) triples.

    Keys: kind (constant | vdp | poly), f, g, mu, T, h, y_range, bound,
    radius, count. For ``constant`` f and g are numbers, for ``poly`` they
    are coefficient lists in ascending powers.
    """
    d = {}
    for key, value, where in pairs:
        if key in d:
            raise UsageError(f"{where}: duplicate field {key!r}")
        d[key] = (value, where)
    known = {"kind", "f", "g", "mu", "T", "h", "y_range", "bound", "radius", "count"}
    for key, (_, where) in d.items():
        if key not in known:
            raise UsageError(f"{where}: unknown field {key!r}")
    if "kind" not in d:
        raise UsageError("missing field 'kind' (one of constant, vdp, poly)")
    kind, kwhere = d["kind"]
    if kind not in _LIENARD_KINDS:
        raise UsageError(f"{kwhere}: unknown kind {kind!r}; valid: {', '.join(_LIENARD_KINDS)}")

    def num(key, default):
        if key not in d:
            return default
        v = _parse_floats(*d[key])
        if len(v) != 1:
            raise UsageError(f"{d[key][1]}: field {key!r} takes one number")
        return v[0]

    kw = {"T": num("T", 100.0)}
    if "y_range" in d:
        yr = _parse_floats(*d["y_range"])
        if len(yr) != 2:
            raise UsageError(f"{d['y_range'][1]}: y_range takes two numbers")
        kw["y_range"] = tuple(yr)
    if "bound" in d:
        kw["bound_threshold"] = num("bound", None)
    run = {"h": num("h", 1e-2), "radius": num("radius", 2.0), "count": num("count", 20)}
    if run["count"] != int(run["count"]) or run["count"] < 1:
        raise UsageError(f"{d['count'][1]}: count must be a positive integer")
    run["count"] = int(run["count"])
    try:
        if kind == "vdp":
            spec = vdp_spec(num("mu", 0.5), **kw)
        else:
            for key in ("f", "g"):
                if key not in d:
                    raise UsageError(f"missing field {key!r} for kind {kind}")
            if kind == "constant":
                spec = constant_spec(num("f", 0.0), num("g", 0.0), **kw)
            else:
                spec = polynomial_spec(_parse_floats(*d["f"]), _parse_floats(*d["g"]), **kw)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return spec, run


def parse_lienard_tokens(tokens: Sequence[str]) -> tuple[LienardSpec, dict]:
    """``constant f=1 g=0.5`` style: a kind followed by key=value tokens."""
    if not tokens:
        raise UsageError("empty Lienard spec")
    pairs = [("kind", tokens[0], "token 1")]
    for i, tok in enumerate(tokens[1:], start=2):
        if "=" not in tok:
            raise UsageError(f"token {i}: expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        pairs.append((k.strip(), v.strip(), f"token {i} ({k.strip()})"))
    return lienard_from_pairs(pairs)


def parse_lienard_file(text: str) -> tuple[LienardSpec, dict]:
    return lienard_from_pairs([(k, v, f"line {n} ({k})") for k, v, n in parse_key_values(text)])


def run_lienard(spec: LienardSpec, h: float = 1e-2, radius: float = 2.0, count: int = 20) -> ConjectureVerdict:
    return test_boundedness(spec, default_battery(count, radius), h)


# --- config files and report IO ------------------------------------------------------


def parse_key_values(text: str) -> list[tuple[str, str, int]]:
    """Flat ``key = value`` lines; ``#`` starts a comment. Returns (key, value, line)."""
    out = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {n}: expected key = value, got {raw.strip()!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise UsageError(f"line {n}: missing key")
        out.append((k, v, n))
    return out


def config_from_text(text: str, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Experiment config from key-value text.

    ``preset`` selects a starting point; ``model``, ``methods``, ``h``, ``T``,
    ``initial``, ``metric``, ``taylor_flavor``, ``out``, ``format`` and
    ``required`` override it; ``param.<name>`` sets a model parameter.
    """
    items = parse_key_values(text)
    fields_ = {}
    params = {}
    for k, v, n in items:
        where = f"line {n} ({k})"
        if k == "preset":
            if v not in PRESETS:
                raise UsageError(f"{where}: unknown preset {v!r}; valid: {', '.join(PRESETS)}")
            base = PRESETS[v]
        elif k.startswith("param."):
            params[k[6:]] = _parse_floats(v, where)[0]
        elif k == "model":
            fields_["model"] = v
        elif k == "methods":
            fields_["methods"] = tuple(s for s in v.replace(",", " ").split())
        elif k == "h":
            fields_["h_list"] = tuple(_parse_floats(v, where))
        elif k == "T":
            fields_["T"] = _parse_floats(v, where)[0]
        elif k == "initial":
            fields_["initial"] = tuple(_parse_floats(v, where))
        elif k in ("metric", "taylor_flavor", "format"):
            fields_[k] = v
        elif k == "out":
            fields_["output"] = v
        elif k == "required":
            if v.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"{where}: expected a boolean, got {v!r}")
            fields_["required"] = v.lower() in ("true", "1", "yes")
        else:
            raise UsageError(f"{where}: unknown key {k!r}")
    if base is None and "model" not in fields_:
        raise UsageError("config needs a 'model' or a 'preset'")
    if base is not None and fields_.get("model", base.model) != base.model:
        base = replace(base, params={})
    if params:
        fields_["params"] = {**(base.params if base else {}), **params}
    try:
        return replace(base, **fields_) if base else ExperimentConfig(**fields_)
    except UsageError:
        raise
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def reports_to_csv(reports: Sequence[ErrorReport], notes: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for note in notes:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ErrorReport.CSV_HEADER)
    for r in reports:
        w.writerow(r.to_row())
    return buf.getvalue()


def reports_from_csv(text: str) -> list[ErrorReport]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or tuple(rows[0]) != ErrorReport.CSV_HEADER:
        raise UsageError("not a report file: header mismatch")
    return [ErrorReport.from_row(r) for r in rows[1:]]


def _json_value(x):
    return x if not isinstance(x, float) or math.isfinite(x) else repr(x)


def reports_to_json(reports: Sequence[ErrorReport], meta: Optional[dict] = None) -> str:
    payload = {"meta": meta or {},
               "reports": [{k: _json_value(v) for k, v in r.to_dict().items()} for r in reports]}
    return json.dumps(payload, indent=2) + "\n"


def reports_from_json(text: str) -> list[ErrorReport]:
    out = []
    for d in json.loads(text)["reports"]:
        d = {k: (float(v) if k in ("h", "value", "runtime_ms") else v) for k, v in d.items()}
        out.append(ErrorReport(**d))
    return out


def table_notes(config: ExperimentConfig) -> list[str]:
    return [f"preset: {config.name}", f"model: {config.model} {json.dumps(config.params, sort_keys=True)}",
            f"T: {config.T!r}", f"initial: {list(config.initial)}", f"reference: {REFERENCE_NOTE}",
            f"taylor_flavor: {config.taylor_flavor}"]


def write_text(path: Optional[str], text: str, stream) -> None:
    if path:
        Path(path).write_text(text)
    else:
        stream.write(text)
