"""Error functionals, natural cubic splines and empirical order estimation."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .integrator import Trajectory

METRICS = ("node_mse", "residual", "first_integral_drift", "pde_mse", "sup_error")


@dataclass(frozen=True)
class ErrorReport:
    model: str
    method: str
    metric: str
    h: float
    value: float
    runtime_ms: float
    status: str = "ok"

    CSV_HEADER = ("model", "method", "metric", "h", "value", "runtime_ms", "status")

    def to_row(self) -> list[str]:
        return [self.model, self.method, self.metric, _fmt(self.h), _fmt(self.value),
                _fmt(self.runtime_ms), self.status]

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "ErrorReport":
        model, method, metric, h, value, runtime_ms, status = row
        return cls(model, method, metric, float(h), float(value), float(runtime_ms), status)

    def to_dict(self) -> dict:
        return asdict(self)


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips (at most 17 significant digits)
    return repr(float(x))


def _check_grids(a: Trajectory, b: Trajectory) -> None:
    ga, gb = a.grid, b.grid
    if (ga.N, ga.t0, ga.tN) != (gb.N, gb.t0, gb.tN):
        raise ValueError("trajectories live on different grids")


def node_mse(test: Trajectory, ref: Trajectory, all_components: bool = False) -> float:
    """Mean squared node error over j = 0..N-1 (the final node is excluded).

    Only the first state component enters unless ``all_components`` is set,
    in which case the squared differences of all components are summed.
    """
    _check_grids(test, ref)
    d = test.states[:-1] - ref.states[:-1]
    if all_components:
        return float(np.mean(np.sum(d * d, axis=1)))
    return float(np.mean(d[:, 0] ** 2))


def sup_node_error(test: Trajectory, ref: Trajectory) -> float:
    _check_grids(test, ref)
    return float(np.max(np.abs(test.states - ref.states)))


@dataclass(frozen=True)
class CubicSpline:
    """Piecewise cubic ``s(t) = y_k + b_k dt + c_k dt^2 + d_k dt^3`` on [t_k, t_{k+1}]."""

    nodes: np.ndarray
    values: np.ndarray
    second: np.ndarray

    def _coefficients(self):
        t, y, m = self.nodes, self.values, self.second
        h = np.diff(t)
        b = np.diff(y) / h - h * (2 * m[:-1] + m[1:]) / 6
        c = m[:-1] / 2
        d = np.diff(m) / (6 * h)
        return b, c, d

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.nodes, t, side="right") - 1, 0, len(self.nodes) - 2)
        return k, t - self.nodes[k]

    def __call__(self, t, derivative: int = 0):
        k, dt = self._locate(t)
        b, c, d = self._coefficients()
        b, c, d = b[k], c[k], d[k]
        if derivative == 0:
            return self.values[k] + dt * (b + dt * (c + dt * d))
        if derivative == 1:
            return b + dt * (2 * c + 3 * d * dt)
        if derivative == 2:
            return 2 * c + 6 * d * dt
        raise ValueError("derivative must be 0, 1 or 2")


SPLINE_BOUNDARIES = ("natural", "not-a-knot")


def build_spline(nodes, values, bc: str = "natural") -> CubicSpline:
    """Cubic spline through (nodes, values); second derivatives from a banded solve.

    ``bc="natural"`` sets s'' = 0 at both ends. ``bc="not-a-knot"`` instead
    makes the third derivative continuous at the second and the second-to-last
    node, which keeps s'' accurate up to the ends (needs at least 4 nodes).
    """
    if bc not in SPLINE_BOUNDARIES:
        raise ValueError(f"unknown boundary condition {bc!r}; valid: {', '.join(SPLINE_BOUNDARIES)}")
    t = np.asarray(nodes, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != y.shape:
        raise ValueError("nodes and values must be 1-D and of equal length")
    if len(t) < 3:
        raise ValueError("a cubic spline needs at least 3 nodes")
    if bc == "not-a-knot" and len(t) < 4:
        raise ValueError("a not-a-knot spline needs at least 4 nodes")
    h = np.diff(t)
    if np.any(h <= 0):
        raise ValueError("nodes must be strictly increasing")
    rhs = np.zeros(len(t))
    rhs[1:-1] = 6 * (np.diff(y[1:]) / h[1:] - np.diff(y[:-1]) / h[:-1])
    if bc == "natural":
        n = len(t) - 2
        ab = np.zeros((3, n))
        ab[0, 1:] = h[1:-1]
        ab[1] = 2 * (h[:-1] + h[1:])
        ab[2, :-1] = h[1:-1]
        m = np.zeros(len(t))
        m[1:-1] = solve_banded((1, 1), ab, rhs[1:-1])
        return CubicSpline(t, y, m)
    # all second derivatives at once; band storage ab[2 + i - j, j] = a[i, j]
    n = len(t)
    ab = np.zeros((5, n))
    ab[1, 2:] = h[1:]
    ab[2, 1:-1] = 2 * (h[:-1] + h[1:])
    ab[3, :-2] = h[:-1]
    # first row: (m1 - m0)/h0 = (m2 - m1)/h1, last row likewise
    ab[2, 0], ab[1, 1], ab[0, 2] = h[1], -(h[0] + h[1]), h[0]
    ab[4, n - 3], ab[3, n - 2], ab[2, n - 1] = h[-1], -(h[-2] + h[-1]), h[-2]
    return CubicSpline(t, y, solve_banded((2, 2), ab, rhs))


def _simpson_weights(sub: int) -> np.ndarray:
    if sub < 2 or sub % 2:
        raise ValueError("Simpson needs an even number of subintervals")
    w = np.ones(sub + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w / (3 * sub)


def residual_error(spline: CubicSpline, eps: float, T: float, sub: int = 10) -> float:
    """(1/T) * integral over [0, T] of (s'' + eps s'^2 + s)^2, composite Simpson.

    ``sub`` subintervals are used inside every spline interval, and each
    interval is integrated with its own cubic piece.
    """
    t = spline.nodes
    if t[0] > 0 or t[-1] < T * (1 - 1e-12):
        raise ValueError("spline does not span [0, T]")
    w = _simpson_weights(sub)
    nint = int(np.searchsorted(t, T * (1 - 1e-12)))
    b, c, d = (a[:nint, None] for a in spline._coefficients())
    h = np.diff(t)[:nint, None]
    dt = h * np.linspace(0.0, 1.0, sub + 1)[None, :]
    s = spline.values[:nint, None] + dt * (b + dt * (c + dt * d))
    s1 = b + dt * (2 * c + 3 * d * dt)
    s2 = 2 * c + 6 * d * dt
    r2 = (s2 + eps * s1 * s1 + s) ** 2
    return float(np.sum(h[:, 0] * (r2 @ w))) / T


def analytic_residual(eps: float, T: float, derivatives: Callable, intervals: int = 2000,
                      sub: int = 10) -> float:
    """Same functional as :func:`residual_error` for a closed-form x(t).

    ``derivatives(t)`` returns ``(x, x', x'')`` on arrays.
    """
    edges = np.linspace(0.0, T, intervals + 1)
    h = np.diff(edges)[:, None]
    pts = edges[:-1, None] + h * np.linspace(0.0, 1.0, sub + 1)[None, :]
    x, dx, ddx = derivatives(pts)
    r2 = (ddx + eps * dx * dx + x) ** 2
    return float(np.sum(h[:, 0] * (r2 @ _simpson_weights(sub)))) / T


def first_integral_drift(traj: Trajectory, f: Optional[Callable], T: Optional[float] = None) -> float:
    """(1/T) * integral of (f(y_0) - f(y(t)))^2 dt, trapezoid rule on the nodes."""
    if f is None:
        raise ValueError("system supplies no first integral")
    t = traj.times
    T = float(t[-1] - t[0]) if T is None else T
    f0 = f(traj.states[0])
    d2 = np.array([(f0 - f(y)) ** 2 for y in traj.states])
    return float(np.sum(0.5 * (d2[1:] + d2[:-1]) * np.diff(t))) / T


def relative_drift(traj: Trajectory, f: Callable) -> float:
    """max_k |f(y_k) - f(y_0)| / |f(y_0)|."""
    vals = np.array([f(y) for y in traj.states])
    return float(np.max(np.abs(vals - vals[0])) / abs(vals[0]))


def pde_mse(u, v, m: Optional[int] = None, n: Optional[int] = None) -> float:
    """(1/m) * sum over j = 0..m and interior k = 1..n-1 of (u - v)^2.

    ``u`` and ``v`` are (m+1, n+1) arrays of space-time samples including the
    two boundary columns.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 2:
        raise ValueError(f"sample arrays differ in shape: {u.shape} vs {v.shape}")
    m = u.shape[0] - 1 if m is None else m
    n = u.shape[1] - 1 if n is None else n
    if u.shape != (m + 1, n + 1):
        raise ValueError(f"expected samples of shape {(m + 1, n + 1)}, got {u.shape}")
    d = u[:, 1:n] - v[:, 1:n]
    return float(np.sum(d * d)) / m


def observed_order(errors: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(e) against log(h)."""
    if len(errors) < 2:
        raise ValueError("need at least two (h, error) pairs")
    hs = np.array([h for h, _ in errors], dtype=float)
    es = np.array([e for _, e in errors], dtype=float)
    if np.any(es <= 0) or not np.all(np.isfinite(es)):
        raise ValueError("errors must be positive and finite")
    if np.any(np.diff(hs) >= 0):
        raise ValueError("step sizes must be strictly decreasing")
    x, y = np.log(hs), np.log(es)
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def first_negative_node(traj: Trajectory) -> Optional[int]:
    """Index of the first node with a negative component, if any."""
    bad = np.nonzero(np.any(traj.states < 0, axis=1))[0]
    return int(bad[0]) if len(bad) else None

