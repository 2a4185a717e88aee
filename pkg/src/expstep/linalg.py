"""Small dense linear algebra: closed-form spectra and matrix exponentials.

Matrices are plain 2-D float ``numpy`` arrays; spectra are 1-D complex arrays
listing eigenvalues with multiplicity.
"""

from __future__ import annotations

import cmath
import math
from itertools import combinations

import numpy as np

# Relative eigenvalue separation below which the repeated-eigenvalue form is used.
CONFLUENT_TOL = 1e-8
# Tolerated imaginary residue of an assembled real exponential, relative to its norm.
IMAG_TOL = 1e-9


class ConsistencyError(ArithmeticError):
    """A real-valued result came out with a non-negligible imaginary part."""


def as_square(m, n: int | None = None) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise ValueError(f"expected a {n}x{n} matrix, got {a.shape[0]}x{a.shape[0]}")
    if not np.isfinite(a).all():
        raise ValueError("matrix has non-finite entries")
    return a


def norm_inf(m: np.ndarray) -> float:
    """Max row sum norm."""
    return float(np.max(np.sum(np.abs(m), axis=1)))


def _quadratic_roots(b: float, c: float) -> tuple[complex, complex]:
    # roots of x^2 + b x + c, larger magnitude first
    half = -0.5 * b
    disc = half * half - c
    if disc >= 0.0:
        s = math.sqrt(disc)
        r1 = half + math.copysign(s, half)
        r2 = c / r1 if r1 != 0.0 else half - math.copysign(s, half)
        return complex(r1), complex(r2)
    s = math.sqrt(-disc)
    return complex(half, s), complex(half, -s)


def eigenvalues_2x2(m) -> np.ndarray:
    """Eigenvalues of a real 2x2 matrix.

    The larger-magnitude root is formed first and the other recovered from the
    determinant, which avoids cancellation when one root is tiny.
    """
    a = as_square(m, 2)
    (p, q), (r, s) = a
    # x^2 - tr x + det; discriminant written as ((p - s)/2)^2 + q r to stay accurate
    half = 0.5 * (p + s)
    disc = 0.25 * (p - s) ** 2 + q * r
    if disc >= 0.0:
        root = math.sqrt(disc)
        l1 = half + math.copysign(root, half)
        det = p * s - q * r
        l2 = det / l1 if l1 != 0.0 else half - math.copysign(root, half)
        return np.array([l1, l2], dtype=complex)
    root = math.sqrt(-disc)
    return np.array([complex(half, root), complex(half, -root)])


def _cubic_coefficients(a: np.ndarray) -> tuple[float, float, float]:
    tr = a[0, 0] + a[1, 1] + a[2, 2]
    minors = (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
              + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
              + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
    det = (a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
           - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
           + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]))
    # lambda^3 + c2 lambda^2 + c1 lambda + c0
    return -tr, minors, -det


def _polish(x: float, c2: float, c1: float, c0: float, iters: int = 4) -> float:
    # Newton on the monic cubic; a step is kept only if it lowers the residual
    def poly(v):
        return ((v + c2) * v + c1) * v + c0

    best, best_res = x, abs(poly(x))
    for _ in range(iters):
        d = (3.0 * x + 2.0 * c2) * x + c1
        if d == 0.0 or best_res == 0.0:
            break
        x = x - poly(x) / d
        res = abs(poly(x))
        if not res < best_res:
            break
        best, best_res = x, res
    return best


def eigenvalues_3x3(m) -> np.ndarray:
    """Eigenvalues of a real 3x3 matrix from its characteristic cubic.

    Uses the trigonometric form when all roots are real and Cardano's formula
    otherwise; real roots are Newton-polished, and a complex pair is obtained by
    deflating the polished real root. The real root comes first.
    """
    a = as_square(m, 3)
    # work on a / ||a|| so the cubic's coefficients neither underflow nor overflow
    scale = norm_inf(a)
    if scale == 0.0:
        return np.zeros(3, dtype=complex)
    return scale * _unit_eigenvalues_3x3(a / scale)


def _unit_eigenvalues_3x3(a: np.ndarray) -> np.ndarray:
    c2, c1, c0 = _cubic_coefficients(a)
    shift = -c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    if disc > 0.0:
        w = -q / 2.0 - math.copysign(math.sqrt(disc), q)
        u = math.copysign(abs(w) ** (1.0 / 3.0), w)
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        r = _polish(u + v + shift, c2, c1, c0)
        beta = c2 + r
        gamma = c1 + r * beta
        z1, z2 = _quadratic_roots(beta, gamma)
        if z1.imag < 0.0:
            z1, z2 = z2, z1
        return np.array([complex(r), z1, z2])

    s = math.sqrt(-p / 3.0) if p < 0.0 else 0.0
    if s ** 3 == 0.0:
        # only reachable as a (rounded) triple root
        roots = [shift] * 3
    else:
        phi = math.acos(min(1.0, max(-1.0, -q / (2.0 * s ** 3))))
        roots = [2.0 * s * math.cos((phi - 2.0 * math.pi * k) / 3.0) + shift for k in range(3)]
    roots = [_polish(x, c2, c1, c0) for x in roots]
    return np.array(roots, dtype=complex)


def eigenvalues(m) -> np.ndarray:
    a = as_square(m)
    n = a.shape[0]
    if n == 1:
        return np.array([complex(a[0, 0])])
    if n == 2:
        return eigenvalues_2x2(a)
    if n == 3:
        return eigenvalues_3x3(a)
    raise ValueError("closed-form spectra are only available for n <= 3")


def _exp_divdiff_series(z: list[complex]) -> complex:
    # e^c * sum_j h_j(z - c) / (j + k - 1)!, h_j complete homogeneous polynomials
    k = len(z)
    c = sum(z) / k
    d = [zi - c for zi in z]
    jmax = 40
    h = [d[0] ** j for j in range(jmax)]
    for di in d[1:]:
        for j in range(1, jmax):
            h[j] = h[j] + di * h[j - 1]
    # odd terms vanish for symmetric clusters, so no early exit on a small term
    total = 0j
    fact = math.factorial(k - 1)
    for j in range(jmax):
        if j > 0:
            fact *= j + k - 1
        total += h[j] / fact
    return cmath.exp(c) * total


def exp_divided_difference(z) -> complex:
    """Divided difference of ``exp`` at up to three (complex) points.

    Coincident or clustered points are handled through a series about the
    mean, so the confluent limit is reached continuously.
    """
    z = [complex(v) for v in z]
    if len(z) == 1:
        return cmath.exp(z[0])
    if len(z) > 3:
        raise ValueError("at most three points are supported")
    pairs = list(combinations(range(len(z)), 2))
    far = max(pairs, key=lambda ij: abs(z[ij[0]] - z[ij[1]]))
    if abs(z[far[0]] - z[far[1]]) < 1.0:
        return _exp_divdiff_series(z)
    if len(z) == 2:
        a, b = z
        if b.real > a.real:
            a, b = b, a
        return cmath.exp(b) * np.expm1(a - b) / (a - b)
    i, j = far
    mid = z[3 - i - j]
    return (exp_divided_difference([z[i], mid]) - exp_divided_difference([mid, z[j]])) / (z[i] - z[j])


def _to_real(result: np.ndarray) -> np.ndarray:
    real = result.real.copy()
    scale = max(norm_inf(real), np.finfo(float).tiny)
    imag = float(np.max(np.abs(result.imag)))
    if imag > IMAG_TOL * scale:
        raise ConsistencyError(f"imaginary residue {imag:.3e} in real matrix exponential")
    return real


def expm_putzer(m, t: float = 1.0) -> np.ndarray:
    """exp(m t) by Putzer's spectral formula, for n <= 3.

    ``exp(m t) = sum_k r_k(t) P_{k-1}`` with ``P_0 = I`` and
    ``P_k = (m - l_1 I) ... (m - l_k I)``. Each ``r_k(t)`` is
    ``t^(k-1)`` times the divided difference of ``exp`` at ``l_1 t, ..., l_k t``,
    which is the closed-form solution of the triangular system for the ``r_k``.
    """
    a = as_square(m)
    n = a.shape[0]
    if n > 3:
        raise ValueError("the spectral path is limited to n <= 3; use expm_series")
    lam = eigenvalues(a)
    z = [complex(v) * t for v in lam]
    eye = np.eye(n, dtype=complex)
    out = np.zeros((n, n), dtype=complex)
    p_mat = eye
    for k in range(n):
        if k > 0:
            p_mat = p_mat @ (a - lam[k - 1] * eye)
        r_k = t ** k * exp_divided_difference(z[: k + 1])
        out += r_k * p_mat
    return _to_real(out)


def expm_2x2_closed(m, h: float) -> np.ndarray:
    """exp(m h) for a 2x2 matrix via the two-eigenvalue closed form.

    Distinct eigenvalues use
    ``[(m - l2 I) e^{l1 h} - (m - l1 I) e^{l2 h}] / (l1 - l2)``, evaluated as
    ``e^{l2 h} [I + (m - l2 I) expm1((l1 - l2) h) / (l1 - l2)]``; when the
    eigenvalues agree to ``CONFLUENT_TOL`` (relative) the repeated form
    ``e^{l h} (I + h (m - l I))`` with the mean eigenvalue is used.
    """
    a = as_square(m, 2)
    (p, q), (r, s) = a
    half = 0.5 * (p + s)
    disc = 0.25 * (p - s) ** 2 + q * r
    root = math.sqrt(abs(disc))
    # |l1 - l2| = 2 root; |l| <= |half| + root
    if 2.0 * root > CONFLUENT_TOL * max(1.0, abs(half) + root):
        if disc > 0.0:
            l1, l2 = eigenvalues_2x2(a).real
            if l2 > l1:
                l1, l2 = l2, l1
            d = l1 - l2
            g = math.expm1(d * h) / d
            e2 = math.exp(l2 * h)
            return np.array([[e2 * (1.0 + (p - l2) * g), e2 * q * g],
                             [e2 * r * g, e2 * (1.0 + (s - l2) * g)]])
        # conjugate pair half +- i root: the same formula with its imaginary
        # parts cancelled analytically
        e = math.exp(half * h)
        c = math.cos(root * h)
        g = math.sin(root * h) / root
        return np.array([[e * (c + (p - half) * g), e * q * g],
                         [e * r * g, e * (c + (s - half) * g)]])
    lam = half
    e = math.exp(lam * h)
    return np.array([[e * (1.0 + h * (p - lam)), e * h * q],
                     [e * h * r, e * (1.0 + h * (s - lam))]])


def expm_series(m, t: float = 1.0) -> np.ndarray:
    """exp(m t) by scaling and squaring around a truncated Taylor series."""
    a = as_square(m) * t
    n = a.shape[0]
    nrm = norm_inf(a)
    s = 0
    if nrm > 0.5:
        s = int(math.ceil(math.log2(nrm / 0.5)))
        a = a / 2.0 ** s
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, 40):
        term = term @ a / k
        out = out + term
        if norm_inf(term) <= 1e-17 * norm_inf(out):
            break
    for _ in range(s):
        out = out @ out
    return out


def expm(m, t: float = 1.0) -> np.ndarray:
    """Dispatching exponential: scalar, closed 2x2, Putzer 3x3, series beyond."""
    a = np.asarray(m, dtype=float)
    n = a.shape[0]
    if n == 1:
        return np.array([[math.exp(a[0, 0] * t)]])
    if n == 2:
        return expm_2x2_closed(a, t)
    if n == 3:
        return expm_putzer(a, t)
    return expm_series(a, t)
