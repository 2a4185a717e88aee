"""Matrix one-step integrator for autonomous systems written as y' = A(y) y.

On each subinterval the matrix is frozen at a predicted midpoint state and the
resulting constant-coefficient system is propagated exactly:

    y* = exp(A(y_k) h/2) y_k
    y_{k+1} = exp(A(y*) h) y_k
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Callable, Optional, Sequence

import numpy as np

from .linalg import expm

# Any state norm beyond this aborts the run as divergent.
DIVERGENCE_NORM = 1e12


class DivergenceError(RuntimeError):
    """An integration produced a non-finite or runaway state."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"integration diverged at step {step}")


def _is_zero(a) -> bool:
    return isinstance(a, Real) and a == 0


@dataclass(frozen=True)
class OdeSystem:
    """A model y' = A(y) y.

    ``entries(y)`` returns the rows of A(y) as nested lists and must only use
    ``+``, ``-``, ``*`` and constants on the state components, so the same code
    evaluates on floats and on truncated Taylor series. ``fast_matrix`` is an
    optional array-building shortcut for large systems; it has to agree with
    ``entries``.
    """

    name: str
    dim: int
    entries: Callable[[Sequence], list]
    fast_matrix: Optional[Callable[[np.ndarray], np.ndarray]] = None
    first_integral: Optional[Callable[[np.ndarray], float]] = None
    exact_solution: Optional[Callable[[float], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def matrix_map(self, y) -> np.ndarray:
        if self.fast_matrix is not None:
            return self.fast_matrix(np.asarray(y, dtype=float))
        return np.array(self.entries(y), dtype=float)

    def rhs(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.matrix_map(y) @ y

    def rhs_generic(self, y: Sequence) -> list:
        """A(y) y using only the arithmetic of the state components."""
        out = []
        for row in self.entries(y):
            acc = 0.0
            for a, yj in zip(row, y):
                if _is_zero(a):
                    continue
                acc = acc + a * yj
            out.append(acc)
        return out


@dataclass(frozen=True)
class Grid:
    t0: float
    tN: float
    N: int

    def __post_init__(self):
        if not (self.tN > self.t0):
            raise ValueError("grid needs tN > t0")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("grid needs a positive integer N")

    @classmethod
    def from_step(cls, t0: float, tN: float, h: float) -> "Grid":
        """Uniform grid with N = round((tN - t0)/h); h is then recomputed."""
        if h <= 0:
            raise ValueError("step must be positive")
        return cls(t0, tN, max(1, int(round((tN - t0) / h))))

    @property
    def h(self) -> float:
        return (self.tN - self.t0) / self.N

    def node(self, k: int) -> float:
        return self.t0 + k * self.h

    def nodes(self) -> np.ndarray:
        return self.t0 + np.arange(self.N + 1) * self.h


@dataclass(frozen=True)
class Trajectory:
    grid: Grid
    states: np.ndarray
    midpoints: Optional[np.ndarray] = None

    def __post_init__(self):
        self.states.setflags(write=False)
        if self.midpoints is not None:
            self.midpoints.setflags(write=False)

    @property
    def times(self) -> np.ndarray:
        return self.grid.nodes()


def check_state(y: np.ndarray, step: int) -> None:
    # NaN fails the comparison as well
    if not np.abs(y).max() <= DIVERGENCE_NORM:
        raise DivergenceError(step)


def step_matrix(sys: OdeSystem, y_k, h: float) -> tuple[np.ndarray, np.ndarray]:
    """One matrix step; returns (y_next, y_star)."""
    y_k = np.asarray(y_k, dtype=float)
    y_star = expm(sys.matrix_map(y_k), 0.5 * h) @ y_k
    y_next = expm(sys.matrix_map(y_star), h) @ y_k
    return y_next, y_star


def integrate(sys: OdeSystem, y0, grid: Grid) -> Trajectory:
    y = np.array(y0, dtype=float)
    if y.shape != (sys.dim,):
        raise ValueError(f"{sys.name} expects a state of dimension {sys.dim}")
    h = grid.h
    states = np.empty((grid.N + 1, sys.dim))
    mids = np.empty((grid.N, sys.dim))
    states[0] = y
    for k in range(grid.N):
        try:
            y, mids[k] = step_matrix(sys, y, h)
        except (ValueError, ArithmeticError) as exc:
            # non-finite matrices are rejected by the exponential routines
            raise DivergenceError(k, f"integration diverged at step {k}: {exc}") from exc
        check_state(y, k)
        states[k + 1] = y
    return Trajectory(grid, states, mids)


def evaluate_dense(traj: Trajectory, sys: OdeSystem, t: float) -> np.ndarray:
    """Segmentary solution at an arbitrary time inside the grid."""
    g = traj.grid
    if not (g.t0 <= t <= g.tN):
        raise ValueError(f"t = {t} outside [{g.t0}, {g.tN}]")
    if traj.midpoints is None:
        raise ValueError("trajectory carries no midpoint states")
    k = min(int(math.floor((t - g.t0) / g.h)), g.N - 1)
    tk = g.node(k)
    if t == tk:
        return np.array(traj.states[k])
    if t == g.tN:
        return np.array(traj.states[g.N])
    return segment(traj, sys, k, t - tk)


def segment(traj: Trajectory, sys: OdeSystem, k: int, dt: float) -> np.ndarray:
    """Interval-k solution exp(A(y*_k) dt) y_k, also valid at dt = h."""
    return expm(sys.matrix_map(traj.midpoints[k]), dt) @ traj.states[k]


def refine_sequence(sys: OdeSystem, y0, t0: float, tN: float, N_list: Sequence[int]) -> list[Trajectory]:
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly increasing")
    return [integrate(sys, y0, Grid(t0, tN, int(n))) for n in N_list]
