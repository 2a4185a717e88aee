"""Boundedness experiments for Lienard equations y'' + f(y) y' + g(y) y = 0.

The state (y, z = y') evolves under the matrix [[0, 1], [-g(y), -f(y)]], which
is integrated with the matrix one-step method from a battery of initial states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .integrator import DivergenceError, Grid, OdeSystem, integrate


@dataclass(frozen=True)
class LienardSpec:
    """Coefficients f, g and the experiment horizon.

    ``bound_threshold=None`` means ten times the largest initial norm of the
    battery being tested.
    """

    f: Callable
    g: Callable
    y_range: tuple[float, float] = (-3.0, 3.0)
    T: float = 100.0
    bound_threshold: Optional[float] = None
    label: str = "lienard"

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        lo, hi = self.y_range
        if not lo < hi:
            raise ValueError("y_range must be a nonempty interval")
        if self.bound_threshold is not None and not self.bound_threshold > 0:
            raise ValueError("bound_threshold must be positive")

    def system(self) -> OdeSystem:
        f, g = self.f, self.g

        def entries(y):
            return [[0, 1], [-g(y[0]), -f(y[0])]]

        return OdeSystem(self.label, 2, entries)


@dataclass(frozen=True)
class Conditions:
    discriminant_negative: bool
    f_nonnegative: bool
    g_in_unit_interval: bool

    @property
    def all(self) -> bool:
        return self.discriminant_negative and self.f_nonnegative and self.g_in_unit_interval

    def to_dict(self) -> dict:
        return {"discriminant_negative": self.discriminant_negative,
                "f_nonnegative": self.f_nonnegative,
                "g_in_unit_interval": self.g_in_unit_interval}


@dataclass(frozen=True)
class RunRecord:
    initial: tuple[float, float]
    sup_norm: float
    escape_time: Optional[float]
    diverged: bool

    def to_dict(self) -> dict:
        return {"initial": list(self.initial), "sup_norm": _json_float(self.sup_norm),
                "escape_time": self.escape_time, "diverged": self.diverged}


@dataclass(frozen=True)
class ConjectureVerdict:
    conditions: Conditions
    bounded: bool
    sup_norm: float
    threshold: float
    T: float
    h: float
    counterexample: Optional[tuple[tuple[float, float], float]] = None
    runs: list[RunRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        ce = None
        if self.counterexample is not None:
            ce = {"initial": list(self.counterexample[0]), "escape_time": self.counterexample[1]}
        return {"conditions": self.conditions.to_dict(),
                "conditions_hold": self.conditions.all,
                "bounded": self.bounded,
                "sup_norm": _json_float(self.sup_norm),
                "bound_threshold": self.threshold,
                "T": self.T,
                "h": self.h,
                "counterexample": ce,
                "runs": [r.to_dict() for r in self.runs]}


def _json_float(x: float):
    return x if math.isfinite(x) else str(x)


def check_conditions(spec: LienardSpec, samples: int = 1001) -> Conditions:
    """Evaluate f^2 - 4g < 0, f >= 0 and 0 < g < 1 on uniform samples of y_range."""
    if samples < 100:
        raise ValueError("at least 100 samples are required")
    ys = np.linspace(spec.y_range[0], spec.y_range[1], samples)
    fv = np.array([float(spec.f(y)) for y in ys])
    gv = np.array([float(spec.g(y)) for y in ys])
    if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(gv))):
        raise ValueError("f or g is not finite on the sampled range")
    return Conditions(bool(np.all(fv * fv - 4 * gv < 0)),
                      bool(np.all(fv >= 0)),
                      bool(np.all((gv > 0) & (gv < 1))))


def default_battery(count: int = 20, radius: float = 2.0) -> list[tuple[float, float]]:
    """``count`` states evenly spaced on a circle about the origin."""
    angles = 2 * np.pi * np.arange(count) / count
    return [(float(radius * math.cos(a)), float(radius * math.sin(a))) for a in angles]


def test_boundedness(spec: LienardSpec, initial_states: Sequence, h: float = 1e-2,
                     conditions: Optional[Conditions] = None) -> ConjectureVerdict:
    """Integrate every initial state over [0, T] and compare node norms to the threshold.

    A run that blows up counts as unbounded; its escape time is the last
    node reached.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    if len(initial_states) == 0:
        raise ValueError("need at least one initial state")
    states = [tuple(float(v) for v in s) for s in initial_states]
    threshold = spec.bound_threshold
    if threshold is None:
        threshold = 10.0 * max(math.hypot(*s) for s in states)
    conditions = check_conditions(spec) if conditions is None else conditions
    grid = Grid.from_step(0.0, spec.T, h)
    sys = spec.system()
    runs = []
    for s in states:
        try:
            traj = integrate(sys, s, grid)
        except DivergenceError as exc:
            runs.append(RunRecord(s, math.inf, grid.node(exc.step), True))
            continue
        norms = np.hypot(traj.states[:, 0], traj.states[:, 1])
        over = np.nonzero(norms > threshold)[0]
        escape = float(grid.node(int(over[0]))) if len(over) else None
        runs.append(RunRecord(s, float(norms.max()), escape, False))
    sup = max(r.sup_norm for r in runs)
    bounded = all(r.escape_time is None for r in runs)
    counterexample = None
    if conditions.all and not bounded:
        first = next(r for r in runs if r.escape_time is not None)
        counterexample = (first.initial, first.escape_time)
    return ConjectureVerdict(conditions, bounded, sup, threshold, spec.T, grid.h,
                             counterexample, runs)


test_boundedness.__test__ = False


def hamiltonian(g: Callable, nodes: int = 20) -> Callable:
    """H(y, z) = z^2/2 + integral from 0 to y of u g(u) du (Gauss-Legendre)."""
    x, w = np.polynomial.legendre.leggauss(nodes)

    def H(state) -> float:
        y, z = float(state[0]), float(state[1])
        u = 0.5 * y * (x + 1)
        pot = 0.5 * y * float(np.sum(w * u * np.array([float(g(v)) for v in u])))
        return 0.5 * z * z + pot

    return H


def polynomial(coefficients: Sequence[float]) -> Callable:
    """p(y) = c0 + c1 y + c2 y^2 + ... by Horner, usable on floats and jets."""
    cs = [float(c) for c in coefficients]
    if not cs:
        raise ValueError("empty coefficient list")

    def p(y):
        acc = cs[-1]
        for c in reversed(cs[:-1]):
            acc = acc * y + c
        return acc

    return p


def constant_spec(f: float, g: float, **kw) -> LienardSpec:
    return LienardSpec(polynomial([f]), polynomial([g]), label=f"constant f={f} g={g}", **kw)


def vdp_spec(mu: float = 0.5, **kw) -> LienardSpec:
    """van der Pol as f(y) = mu (y^2 - 1), g = 1."""
    return LienardSpec(polynomial([-mu, 0.0, mu]), polynomial([1.0]), label=f"vdp mu={mu}", **kw)


def polynomial_spec(f_coeffs: Sequence[float], g_coeffs: Sequence[float], **kw) -> LienardSpec:
    return LienardSpec(polynomial(f_coeffs), polynomial(g_coeffs), label="polynomial", **kw)
