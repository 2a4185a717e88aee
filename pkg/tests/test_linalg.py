import cmath
import math

import mpmath
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from expstep.linalg import (ConsistencyError, _to_real, eigenvalues, eigenvalues_2x2,
                            eigenvalues_3x3, exp_divided_difference, expm, expm_2x2_closed,
                            expm_putzer, expm_series, norm_inf)

entries = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)
mat2 = arrays(np.float64, (2, 2), elements=entries)
mat3 = arrays(np.float64, (3, 3), elements=entries)
times = st.floats(0.0, 1.0)


def _sorted(z):
    return sorted(np.asarray(z, dtype=complex), key=lambda c: (round(c.real, 9), round(c.imag, 9)))


# --- spectra ---------------------------------------------------------------------------


def test_rotation_spectrum():
    assert np.allclose(_sorted(eigenvalues_2x2([[0, 1], [-1, 0]])), _sorted([-1j, 1j]), atol=1e-15)


def test_diagonal_spectrum():
    assert np.allclose(_sorted(eigenvalues_2x2([[2, 0], [0, 3]])), [2, 3])


def test_van_der_pol_origin_spectrum_matches_high_precision_roots():
    mp_roots = mpmath.polyroots([1, mpmath.mpf(-1) / 2, 1], extraprec=50)
    ours = _sorted(eigenvalues_2x2([[0, 1], [-1, 0.5]]))
    ref = _sorted([complex(r) for r in mp_roots])
    assert np.allclose(ours, ref, atol=1e-15, rtol=0)


def test_tiny_root_is_not_cancelled():
    # roots 1e8 and 1e-8: the small one must survive to full relative accuracy
    m = np.array([[1e8, 0.0], [1.0, 1e-8]])
    lam = sorted(eigenvalues_2x2(m).real)
    assert lam[0] == pytest.approx(1e-8, rel=1e-14)


def test_lorenz_origin_spectrum():
    lam = eigenvalues_3x3(np.diag([-10.0, -1.0, -8.0 / 3.0]))
    assert np.allclose(_sorted(lam), _sorted([-10, -8 / 3, -1]), atol=1e-13)


def test_epidemic_threshold_matrix_is_nilpotent():
    a, b = 5e-4, 0.1
    x = b / a
    m = [[0, -a * x, 0], [0, a * x - b, 0], [0, b, 0]]
    assert np.allclose(eigenvalues_3x3(m), 0, atol=1e-12)


def test_identity_spectrum():
    assert np.allclose(eigenvalues_3x3(np.eye(3)), 1)


def test_complex_pair_listed_after_real_root():
    lam = eigenvalues_3x3([[0, 1, 0], [-1, 0, 0], [0, 0, 2]])
    assert lam[0] == pytest.approx(2)
    assert lam[1] == pytest.approx(1j) and lam[2] == pytest.approx(-1j)


def test_dimension_errors():
    with pytest.raises(ValueError):
        eigenvalues_2x2(np.eye(3))
    with pytest.raises(ValueError):
        eigenvalues_3x3(np.eye(2))
    with pytest.raises(ValueError):
        eigenvalues(np.eye(4))
    with pytest.raises(ValueError):
        expm_putzer(np.eye(4))
    with pytest.raises(ValueError):
        eigenvalues_2x2([[1, np.nan], [0, 1]])


def _det(a):
    # cofactor expansion; LAPACK's LU misbehaves on subnormal input
    if a.shape[0] == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return (a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]))


@settings(max_examples=300, deadline=None)
@given(st.one_of(mat2, mat3))
def test_eigenvalue_residual(m):
    n = m.shape[0]
    bound = 1e-10 * (1 + norm_inf(m)) ** n
    for lam in eigenvalues(m):
        assert abs(_det(m - lam * np.eye(n))) <= bound


@settings(max_examples=200, deadline=None)
@given(mat3)
def test_spectrum_closed_under_conjugation(m):
    lam = eigenvalues_3x3(m)
    assert np.allclose(_sorted(lam), _sorted(np.conj(lam)), atol=1e-6 * (1 + norm_inf(m)))


# --- divided differences ----------------------------------------------------------------


def _mp_divdiff(z):
    # symmetric formula for distinct points, evaluated with 50 digits
    with mpmath.workdps(50):
        z = [mpmath.mpc(v) for v in z]
        total = 0
        for i, zi in enumerate(z):
            den = 1
            for j, zj in enumerate(z):
                if j != i:
                    den *= zi - zj
            total += mpmath.exp(zi) / den
        return complex(total)


@pytest.mark.parametrize("z", [
    [0.3, -1.2],
    [2.0 + 1j, 2.0 - 1j],
    [0.1, 0.4, -0.7],
    [3.0, -2.0 + 0.5j, -2.0 - 0.5j],
    [0.01 + 0.02j, 0.01 - 0.02j, 0.015],
])
def test_divided_difference_matches_high_precision(z):
    assert abs(exp_divided_difference(z) - _mp_divdiff(z)) <= 1e-14 * max(1, abs(_mp_divdiff(z)))


def test_divided_difference_confluent_limits():
    assert exp_divided_difference([0.5, 0.5]) == pytest.approx(math.exp(0.5), rel=1e-15)
    assert exp_divided_difference([0.5, 0.5, 0.5]) == pytest.approx(math.exp(0.5) / 2, rel=1e-15)
    assert exp_divided_difference([1.0]) == pytest.approx(math.e)


# --- exponentials -----------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_zero_matrix_exponentials(n):
    z = np.zeros((n, n))
    assert np.array_equal(expm_putzer(z, 0.7), np.eye(n))
    assert np.array_equal(expm_series(z, 0.7), np.eye(n))


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, math.pi, 10.0])
def test_rotation_exponential(t):
    r = np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]])
    m = [[0, 1], [-1, 0]]
    assert np.allclose(expm_putzer(m, t), r, atol=1e-14)
    assert np.allclose(expm_2x2_closed(m, t), r, atol=1e-14)


def test_random_3x3_against_series():
    rng = np.random.default_rng(7)
    for _ in range(50):
        m = rng.uniform(-1, 1, (3, 3))
        assert np.allclose(expm_putzer(m, 0.1), expm_series(m, 0.1), atol=1e-12, rtol=0)


def test_closed_2x2_diagonal_and_jordan():
    assert np.allclose(expm_2x2_closed(np.diag([0.3, -2.0]), 0.5), np.diag(np.exp([0.15, -1.0])), atol=1e-15)
    lam, h = -0.7, 0.4
    expected = math.exp(lam * h) * np.array([[1, h], [0, 1]])
    assert np.allclose(expm_2x2_closed([[lam, 1], [0, lam]], h), expected, atol=1e-15)


def test_closed_2x2_duffing_matrix():
    m = [[0, 1], [-2, 0]]
    assert np.allclose(expm_2x2_closed(m, 0.1), expm_series(m, 0.1), atol=1e-13, rtol=0)


def test_series_examples():
    assert expm_series([[0.7]], 2.0)[0, 0] == pytest.approx(math.exp(1.4), rel=1e-15)
    assert np.allclose(expm_series([[0, 1], [0, 0]], 3.0), [[1, 3], [0, 1]], atol=1e-15)


def test_series_against_scipy_on_large_norms():
    rng = np.random.default_rng(3)
    for n in (2, 4, 6):
        m = rng.normal(scale=5.0, size=(n, n))
        ref = scipy.linalg.expm(m)
        assert np.allclose(expm_series(m), ref, rtol=1e-11, atol=1e-11 * np.abs(ref).max())


def test_dispatch_routes_large_matrices_to_series():
    m = np.diag(np.arange(5.0)) * 0.1
    assert np.allclose(expm(m, 1.0), np.diag(np.exp(np.arange(5.0) * 0.1)), atol=1e-14)


@settings(max_examples=300, deadline=None)
@given(st.one_of(mat2, mat3), times)
def test_spectral_and_series_agree(m, t):
    ref = expm_series(m, t)
    scale = max(1.0, np.abs(ref).max())
    assert np.abs(expm_putzer(m, t) - ref).max() <= 1e-12 * scale
    if m.shape[0] == 2:
        assert np.abs(expm_2x2_closed(m, t) - ref).max() <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(st.one_of(mat2, mat3), times, times)
def test_semigroup(m, t, s):
    lhs = expm(m, t + s)
    rhs = expm(m, t) @ expm(m, s)
    assert np.abs(lhs - rhs).max() <= 1e-11 * max(1.0, np.abs(lhs).max())


@settings(max_examples=200, deadline=None)
@given(st.one_of(mat2, mat3), times)
def test_determinant_is_exp_trace(m, t):
    expected = math.exp(np.trace(m) * t)
    assert _det(expm(m, t)) == pytest.approx(expected, rel=1e-11)


@pytest.mark.parametrize("base", [[[1.0, 1.0], [0.0, 1.0]], [[2.0, 0.0], [0.0, 2.0]], [[0.0, 1.0], [0.0, 0.0]]])
def test_continuity_across_confluent_switch(base):
    base = np.array(base)
    h = 0.3
    e0 = expm_2x2_closed(base, h)
    rng = np.random.default_rng(11)
    for _ in range(20):
        pert = base + 1e-12 * rng.normal(size=(2, 2))
        assert np.abs(expm_2x2_closed(pert, h) - e0).max() < 1e-8


def test_imaginary_residue_is_rejected():
    with pytest.raises(ConsistencyError):
        _to_real(np.array([[1.0 + 1e-3j, 0], [0, 1]]))
    assert np.array_equal(_to_real(np.array([[1.0 + 1e-20j]])), [[1.0]])


def test_putzer_with_complex_lorenz_spectrum():
    m = np.array([[-10, 10, 0], [9.996 - 1.0, -1, 0], [0.5, 0, -8 / 3]])
    lam = eigenvalues_3x3([[0, -3, 0], [3, 0, 0], [0, 0, 1]])
    assert any(abs(z.imag) > 0 for z in lam)
    assert np.allclose(expm_putzer(m, 0.2), scipy.linalg.expm(0.2 * m), atol=1e-13)
    assert np.allclose(expm_putzer([[0, -3, 0], [3, 0, 0], [0, 0, 1]], 0.5),
                       scipy.linalg.expm(0.5 * np.array([[0, -3, 0], [3, 0, 0], [0, 0, 1.0]])), atol=1e-14)
    assert cmath.isclose(lam[0], 1)
