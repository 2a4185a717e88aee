"""Benchmark systems in factored form y' = A(y) y.

Each constructor writes A(y) with plain arithmetic so that the same code serves
the matrix integrator (floats) and the Taylor baselines (series arithmetic).
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .integrator import OdeSystem


def van_der_pol(mu: float = 0.5) -> OdeSystem:
    def entries(y):
        return [[0, 1], [-1, mu * (1 - y[0] * y[0])]]

    return OdeSystem("van_der_pol", 2, entries, params={"mu": mu})


def duffing_energy(y) -> float:
    return 0.5 * y[1] ** 2 + 0.5 * y[0] ** 2 + 0.25 * y[0] ** 4


# Constants of the printed elliptic-function solution for y(0) = 1, y'(0) = 0.
DUFFING_C1 = 1.5
DUFFING_C2 = 1.1920055


def duffing_closed_form(t) -> complex:
    """The elliptic-sine expression quoted for the Duffing solution, verbatim.

    ``y = -i sqrt(1 + k) sn(u; m)`` with
    ``u = (t^2 (1 - k) + 2 t (c2 - k c1) + (1 - k) c2^2) / sqrt(2)``,
    ``m = (1 + k)/(1 - k)`` and ``k = sqrt(1 + 2 c1)``. Kept only so the
    validation gate can reject or accept it.
    """
    c1, c2 = DUFFING_C1, DUFFING_C2
    k = math.sqrt(1 + 2 * c1)
    m = (1 + k) / (1 - k)
    u = (t * t * (1 - k) + 2 * t * (c2 - k * c1) + (1 - k) * c2 * c2) / math.sqrt(2)
    return -1j * math.sqrt(1 + k) * jacobi_sn(u, m)


def validate_duffing_closed_form(T: float = 20.0, samples: int = 200, tol: float = 1e-6) -> tuple[bool, float]:
    """Substitute the closed form into y'' + y + y^3 = 0 and the initial data.

    Returns ``(usable, worst_defect)``; the defect also counts imaginary
    content and the mismatch with y(0) = 1, y'(0) = 0.
    """
    dt = 1e-4
    worst = 0.0
    for t in np.linspace(dt, T, samples):
        ym, y0, yp = (duffing_closed_form(t + s) for s in (-dt, 0.0, dt))
        ypp = (yp - 2 * y0 + ym) / dt ** 2
        worst = max(worst, abs(ypp + y0 + y0 ** 3), abs(y0.imag))
    y_init = duffing_closed_form(0.0)
    v_init = (duffing_closed_form(dt) - duffing_closed_form(-dt)) / (2 * dt)
    worst = max(worst, abs(y_init - 1.0), abs(v_init))
    if not math.isfinite(worst):
        worst = math.inf
    return worst <= tol, worst


def duffing() -> OdeSystem:
    """Undamped Duffing oscillator y'' + y + y^3 = 0.

    The exact solution is attached only when the quoted closed form survives
    :func:`validate_duffing_closed_form`.
    """

    def entries(y):
        return [[0, 1], [-(1 + y[0] * y[0]), 0]]

    def exact(t):
        return np.array([duffing_closed_form(t).real, np.nan])

    usable, _ = validate_duffing_closed_form()
    return OdeSystem("duffing", 2, entries, first_integral=duffing_energy,
                     exact_solution=exact if usable else None, params={})


def lorenz(a: float = 10.0, b: float = 9.996, c: float = 8.0 / 3.0) -> OdeSystem:
    def entries(y):
        return [[-a, a, 0], [b - y[2], -1, 0], [y[1], 0, -c]]

    return OdeSystem("lorenz", 3, entries, params={"a": a, "b": b, "c": c})


def neutral_damping(eps: float = 0.1) -> OdeSystem:
    """x'' + eps x'^2 + x = 0 with its exponential-weighted first integral."""
    if eps == 0:
        raise ValueError("eps must be non-zero (the first integral divides by eps^2)")

    def entries(y):
        return [[0, 1], [-1, -eps * y[1]]]

    def first_integral(y):
        x, v = y[0], y[1]
        return (0.5 * v * v + (2 * eps * x - 1) / (4 * eps * eps)) * math.exp(2 * eps * x)

    return OdeSystem("neutral_damping", 2, entries, first_integral=first_integral,
                     params={"eps": eps})


def lindstedt_poincare_derivatives(eps: float, t):
    """Three-term perturbative solution x, x', x'' for x(0) = 1, x'(0) = 0."""
    w = 1 - eps / 6
    t = np.asarray(t, dtype=float)
    c1, c2, c3 = np.cos(w * t), np.cos(2 * w * t), np.cos(3 * w * t)
    s1, s2, s3 = np.sin(w * t), np.sin(2 * w * t), np.sin(3 * w * t)
    e2 = eps * eps
    x = c1 + eps * (-3 + 4 * c1 - c2) / 6 + e2 * (-2 + 61 / 24 * c1 - 2 / 3 * c2 + c3 / 8) / 3
    dx = w * (-s1 + eps * (-4 * s1 + 2 * s2) / 6
              + e2 * (-61 / 24 * s1 + 4 / 3 * s2 - 3 / 8 * s3) / 3)
    ddx = w * w * (-c1 + eps * (-4 * c1 + 4 * c2) / 6
                   + e2 * (-61 / 24 * c1 + 8 / 3 * c2 - 9 / 8 * c3) / 3)
    return x, dx, ddx


def lindstedt_poincare(eps: float, t):
    return lindstedt_poincare_derivatives(eps, t)[0]


def epidemic(a: float = 0.0005, b: float = 0.1) -> OdeSystem:
    """Healthy/sick/dead compartments; columns of A sum to zero."""

    def entries(y):
        return [[0, -a * y[0], 0], [0, a * y[0] - b, 0], [0, b, 0]]

    def total(y):
        return float(y[0] + y[1] + y[2])

    return OdeSystem("epidemic", 3, entries, first_integral=total,
                     params={"a": a, "b": b})


def lotka_volterra(a: float = 1.2, b: float = 0.6, c: float = 0.8, d: float = 0.3) -> OdeSystem:
    """x' = a x - b x y, y' = d x y - c y in diagonal factorization.

    The attached constant of motion is ``x^c y^a exp(-(d x + b y))``.
    """

    def entries(y):
        return [[a - b * y[1], 0], [0, d * y[0] - c]]

    def invariant(y):
        x, v = y[0], y[1]
        return x ** c * v ** a * math.exp(-(d * x + b * v))

    return OdeSystem("lotka_volterra", 2, entries, first_integral=invariant,
                     params={"a": a, "b": b, "c": c, "d": d})


def lotka_volterra_printed_invariant(y, a=1.2, b=0.6, c=0.8, d=0.3) -> float:
    """``x^c y^a exp(-(b + d) x)`` as printed; not conserved by the flow."""
    x, v = y[0], y[1]
    return x ** c * v ** a * math.exp(-(b + d) * x)


PROFILES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin_pi": lambda x: np.sin(np.pi * x),
    "zero": lambda x: np.zeros_like(x),
}


def burgers_initial_state(n_space: int, profile="sin_pi") -> np.ndarray:
    """Interior node values of the initial profile on x_k = k / n_space.

    ``profile`` is a built-in name, a callable, or a sequence of n_space - 1
    tabulated interior values.
    """
    x = np.arange(1, n_space) / n_space
    if isinstance(profile, str):
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}; known: {sorted(PROFILES)}")
        return PROFILES[profile](x)
    if callable(profile):
        return np.asarray(profile(x), dtype=float)
    vals = np.asarray(profile, dtype=float)
    if vals.shape != (n_space - 1,):
        raise ValueError(f"tabulated profile needs {n_space - 1} interior values")
    return vals


def burgers(n_space: int = 5) -> OdeSystem:
    """Method-of-lines Burgers system on [0, 1] with zero boundary values.

    Row k of A(U) is ``[(1 - hx/2 u_k), -2, (1 + hx/2 u_k)] / hx^2`` on
    ``(u_{k-1}, u_k, u_{k+1})``.
    """
    if n_space < 2:
        raise ValueError("n_space must be >= 2")
    n = n_space - 1
    hx = 1.0 / n_space
    inv = 1.0 / (hx * hx)

    def entries(u):
        rows = []
        for k in range(n):
            row = [0] * n
            row[k] = -2 * inv
            if k > 0:
                row[k - 1] = (1 - 0.5 * hx * u[k]) * inv
            if k < n - 1:
                row[k + 1] = (1 + 0.5 * hx * u[k]) * inv
            rows.append(row)
        return rows

    def fast_matrix(u):
        m = np.diag(np.full(n, -2 * inv))
        if n > 1:
            idx = np.arange(1, n)
            m[idx, idx - 1] = (1 - 0.5 * hx * u[1:]) * inv
            m[idx - 1, idx] = (1 + 0.5 * hx * u[:-1]) * inv
        return m

    return OdeSystem("burgers", n, entries, fast_matrix=fast_matrix,
                     params={"n_space": n_space})


def jacobi_ellipj(u: float, m: float) -> tuple[float, float, float]:
    """Jacobi sn, cn, dn for real u and any real parameter m.

    0 <= m <= 1 goes through the descending Landen (AGM) scheme; m < 0 and
    m > 1 are mapped into that range with the reciprocal and imaginary-modulus
    transformations.
    """
    if m < 0.0:
        s = math.sqrt(1.0 - m)
        sn, cn, dn = jacobi_ellipj(u * s, -m / (1.0 - m))
        return sn / (s * dn), cn / dn, 1.0 / dn
    if m > 1.0:
        s = math.sqrt(m)
        sn, cn, dn = jacobi_ellipj(u * s, 1.0 / m)
        return sn / s, dn, cn
    if m == 0.0:
        return math.sin(u), math.cos(u), 1.0
    if m == 1.0:
        sech = 1.0 / math.cosh(u)
        return math.tanh(u), sech, sech

    a = [1.0]
    c = [math.sqrt(m)]
    b = math.sqrt(1.0 - m)
    while abs(c[-1]) > 1e-16 * a[-1] and len(a) < 60:
        an, bn = a[-1], b
        a.append(0.5 * (an + bn))
        c.append(0.5 * (an - bn))
        b = math.sqrt(an * bn)
    n = len(a) - 1
    phi = 2.0 ** n * a[n] * u
    phis = [phi]
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(c[j] / a[j] * math.sin(phi)))
        phis.append(phi)
    phi0 = phis[-1]
    sn, cn = math.sin(phi0), math.cos(phi0)
    if n == 0:
        return sn, cn, 1.0
    dn = cn / math.cos(phis[-2] - phi0)
    return sn, cn, dn


def jacobi_sn(u: float, m: float) -> float:
    return jacobi_ellipj(u, m)[0]


CATALOG: dict[str, Callable[..., OdeSystem]] = {
    "van_der_pol": van_der_pol,
    "duffing": duffing,
    "lorenz": lorenz,
    "neutral_damping": neutral_damping,
    "epidemic": epidemic,
    "lotka_volterra": lotka_volterra,
    "burgers": burgers,
}


def make_model(name: str, **params) -> OdeSystem:
    try:
        ctor = CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; valid: {', '.join(sorted(CATALOG))}") from None
    return ctor(**params)

