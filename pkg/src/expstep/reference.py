"""Baseline integrators: Taylor methods of order 2-4 and a substepped RK4 reference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrator import DivergenceError, Grid, OdeSystem, Trajectory, check_state


class Jet:
    """Truncated Taylor series c_0 + c_1 s + ... + c_d s^d in the local time s."""

    __slots__ = ("c",)

    def __init__(self, coefficients):
        self.c = np.asarray(coefficients, dtype=float)

    @classmethod
    def constant(cls, value: float, order: int) -> "Jet":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def _coerce(self, other):
        if isinstance(other, Jet):
            if len(other.c) != len(self.c):
                raise ValueError("jet orders differ")
            return other.c
        c = np.zeros_like(self.c)
        c[0] = other
        return c

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c + self._coerce(other))
        c = self.c.copy()
        c[0] += other
        return Jet(c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            n = len(self.c)
            return Jet(np.convolve(self.c, self._coerce(other))[:n])
        return Jet(self.c * other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("jets support non-negative integer powers only")
        out = Jet.constant(1.0, self.order)
        for _ in range(int(k)):
            out = out * self
        return out

    def __repr__(self):
        return f"Jet({self.c.tolist()})"


def taylor_step(sys: OdeSystem, y_k, h: float, order: int, flavor: str = "system") -> np.ndarray:
    """Taylor polynomial step of the given order.

    The series coefficients of y are built one at a time from the series of
    A(y) y: coefficient i+1 of y is coefficient i of the right-hand side
    divided by i+1.

    With ``flavor="scalar"`` the state is read as (y, y') of a second-order
    scalar equation: y advances with its degree-``order`` polynomial and y'
    with the derivative of that polynomial (one degree lower).
    """
    if order not in range(1, 9):
        raise ValueError("order must be between 1 and 8")
    if flavor not in FLAVORS:
        raise ValueError(f"unknown Taylor flavor {flavor!r}; valid: {', '.join(FLAVORS)}")
    if flavor == "scalar" and sys.dim != 2:
        raise ValueError("the scalar flavor needs a (y, y') state")
    y_k = np.asarray(y_k, dtype=float)
    jets = [Jet.constant(v, order) for v in y_k]
    for i in range(order):
        f = sys.rhs_generic(jets)
        for yj, fj in zip(jets, f):
            if isinstance(fj, Jet):
                yj.c[i + 1] = fj.c[i] / (i + 1)
            else:
                yj.c[i + 1] = fj if i == 0 else 0.0
    coef = np.array([j.c for j in jets])
    if flavor == "scalar":
        coef[1, order] = 0.0
    out = coef[:, order].copy()
    for i in range(order - 1, -1, -1):
        out = out * h + coef[:, i]
    return out


def rk4_step(sys: OdeSystem, y: np.ndarray, h: float) -> np.ndarray:
    k1 = sys.rhs(y)
    k2 = sys.rhs(y + 0.5 * h * k1)
    k3 = sys.rhs(y + 0.5 * h * k2)
    k4 = sys.rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _run(sys: OdeSystem, y0, grid: Grid, advance) -> Trajectory:
    y = np.array(y0, dtype=float)
    if y.shape != (sys.dim,):
        raise ValueError(f"{sys.name} expects a state of dimension {sys.dim}")
    states = np.empty((grid.N + 1, sys.dim))
    states[0] = y
    h = grid.h
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(grid.N):
            y = advance(y, h)
            check_state(y, k)
            states[k + 1] = y
    return Trajectory(grid, states)


def rk_reference(sys: OdeSystem, y0, grid: Grid, substeps: int = 100) -> Trajectory:
    """Classical RK4 with each grid interval split into ``substeps`` pieces."""
    if substeps < 1:
        raise ValueError("substeps must be >= 1")

    def advance(y, h):
        dt = h / substeps
        for _ in range(substeps):
            y = rk4_step(sys, y, dt)
        return y

    return _run(sys, y0, grid, advance)


METHODS = ("taylor2", "taylor3", "taylor4", "rk4", "rk_reference")
FLAVORS = ("system", "scalar")


@dataclass(frozen=True)
class ReferenceConfig:
    method: str
    substeps: int = 100
    flavor: str = "system"

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown Taylor flavor {self.flavor!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; valid: {', '.join(METHODS)}")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")


def integrate_reference(sys: OdeSystem, y0, grid: Grid, cfg: ReferenceConfig) -> Trajectory:
    if cfg.method == "rk_reference":
        return rk_reference(sys, y0, grid, cfg.substeps)
    if cfg.method == "rk4":
        return _run(sys, y0, grid, lambda y, h: rk4_step(sys, y, h))
    order = int(cfg.method[-1])
    return _run(sys, y0, grid, lambda y, h: taylor_step(sys, y, h, order, cfg.flavor))


__all__ = [
    "DivergenceError",
    "Jet",
    "ReferenceConfig",
    "integrate_reference",
    "rk4_step",
    "rk_reference",
    "taylor_step",
]
