import math

import mpmath
import numpy as np
import pytest

from expstep.integrator import (DivergenceError, Grid, OdeSystem, evaluate_dense, integrate,
                                refine_sequence, step_matrix)
from expstep.metrics import observed_order
from expstep.models import van_der_pol


def rotation() -> OdeSystem:
    return OdeSystem("rotation", 2, lambda y: [[0, 1], [-1, 0]])


def riccati() -> OdeSystem:
    # y' = y^2 written as A(y) y with A(y) = [y]
    return OdeSystem("riccati", 1, lambda y: [[y[0]]])


def test_grid_nodes_and_step():
    g = Grid(0.0, 2.0, 8)
    assert g.h == 0.25
    assert g.node(3) == 0.75
    assert np.array_equal(g.nodes(), np.linspace(0, 2, 9))


def test_grid_from_step_recomputes_h():
    g = Grid.from_step(0.0, 2 * math.pi, 0.1)
    assert g.N == 63
    assert g.h == pytest.approx(2 * math.pi / 63)
    assert g.nodes()[-1] == pytest.approx(2 * math.pi, abs=1e-15)


@pytest.mark.parametrize("args", [(1.0, 1.0, 3), (0.0, 1.0, 0), (0.0, 1.0, 2.5)])
def test_grid_rejects_bad_input(args):
    with pytest.raises(ValueError):
        Grid(*args)


@pytest.mark.parametrize("N", [10, 100, 1000])
def test_constant_coefficient_system_is_exact(N):
    traj = integrate(rotation(), [1.0, 0.0], Grid(0.0, 2 * math.pi, N))
    assert np.allclose(traj.states[-1], [1.0, 0.0], atol=1e-11)


def test_riccati_single_step_against_high_precision():
    h = mpmath.mpf("0.1")
    with mpmath.workdps(40):
        expected = float(mpmath.exp(h * mpmath.exp(h / 2)))
    y1, ystar = step_matrix(riccati(), [1.0], 0.1)
    assert ystar[0] == pytest.approx(math.exp(0.05), rel=1e-15)
    assert abs(y1[0] - expected) <= 1e-14
    # the quoted value 1.1108520 is the same number to about 7 figures
    assert y1[0] == pytest.approx(1.1108520, abs=5e-7)


def test_riccati_global_order_is_two():
    pairs = []
    for h in (0.01, 0.005, 0.0025):
        traj = integrate(riccati(), [1.0], Grid.from_step(0.0, 0.5, h))
        pairs.append((traj.grid.h, abs(traj.states[-1, 0] - 2.0)))
    assert 1.7 <= observed_order(pairs) <= 2.3


def test_dense_output_at_nodes_and_between():
    traj = integrate(riccati(), [1.0], Grid(0.0, 0.3, 3))
    sys = riccati()
    for k, t in enumerate(traj.times):
        assert np.array_equal(evaluate_dense(traj, sys, t), traj.states[k])
    # inside the first interval the segment is exp(y* t) y0 with y* = e^{0.05}
    assert evaluate_dense(traj, sys, 0.05)[0] == pytest.approx(math.exp(0.05 * math.exp(0.05)), rel=1e-15)


def test_dense_output_is_continuous_at_nodes():
    sys = van_der_pol()
    traj = integrate(sys, [0.0, 2.0], Grid(0.0, 2.0, 20))
    for k in range(1, 20):
        t = traj.grid.node(k)
        left = evaluate_dense(traj, sys, t - 1e-12)
        assert np.allclose(left, traj.states[k], atol=1e-10)


def test_dense_output_outside_grid():
    traj = integrate(riccati(), [1.0], Grid(0.0, 0.3, 3))
    with pytest.raises(ValueError):
        evaluate_dense(traj, riccati(), 0.31)
    with pytest.raises(ValueError):
        evaluate_dense(traj, riccati(), -0.01)


def test_blow_up_raises_divergence_with_step():
    with pytest.raises(DivergenceError) as info:
        integrate(riccati(), [1.0], Grid(0.0, 2.0, 200))
    assert 90 <= info.value.step < 200


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        integrate(rotation(), [1.0], Grid(0.0, 1.0, 4))


def test_trajectory_is_read_only():
    traj = integrate(rotation(), [1.0, 0.0], Grid(0.0, 1.0, 4))
    with pytest.raises(ValueError):
        traj.states[0, 0] = 2.0


def test_refine_sequence():
    trajs = refine_sequence(rotation(), [1.0, 0.0], 0.0, 1.0, [4, 8, 16])
    assert [t.grid.N for t in trajs] == [4, 8, 16]
    with pytest.raises(ValueError):
        refine_sequence(rotation(), [1.0, 0.0], 0.0, 1.0, [8, 4])


def test_rhs_is_matrix_times_state():
    sys = van_der_pol(0.7)
    y = np.array([0.3, -1.1])
    assert np.array_equal(sys.rhs(y), sys.matrix_map(y) @ y)
    assert np.allclose(sys.rhs_generic(list(y)), sys.rhs(y), rtol=0, atol=1e-15)


def test_constant_matrix_step_ignores_midpoint():
    a = np.array([[0.3, -1.2], [0.8, -0.5]])
    sys = OdeSystem("linear", 2, lambda y: a)
    y1, _ = step_matrix(sys, [0.4, -1.0], 0.25)
    from expstep.linalg import expm_series

    assert np.allclose(y1, expm_series(a, 0.25) @ [0.4, -1.0], atol=1e-15)


def test_step_is_consistent_with_rhs():
    sys = van_der_pol(0.5)
    y = np.array([0.7, -0.3])
    for h in (1e-4, 1e-5):
        y1, _ = step_matrix(sys, y, h)
        assert np.allclose((y1 - y) / h, sys.rhs(y), atol=5 * h)


def test_dense_output_at_start():
    traj = integrate(van_der_pol(), [0.0, 2.0], Grid(0.0, 1.0, 10))
    assert np.array_equal(evaluate_dense(traj, van_der_pol(), 0.0), [0.0, 2.0])


def test_refinement_differences_shrink_at_second_order():
    trajs = refine_sequence(van_der_pol(0.5), [0.0, 2.0], 0.0, 20.0, [100, 200, 400])
    d1 = np.abs(trajs[0].states - trajs[1].states[::2]).max()
    d2 = np.abs(trajs[1].states[::2] - trajs[2].states[::4]).max()
    # a factor 4 per halving is second order; these steps are still pre-asymptotic
    assert 3.0 <= d1 / d2 <= 6.0


def test_refinement_of_constant_system_agrees():
    trajs = refine_sequence(rotation(), [1.0, 0.0], 0.0, 3.0, [10, 20, 40])
    assert np.abs(trajs[0].states - trajs[2].states[::4]).max() < 1e-12
    single = refine_sequence(van_der_pol(), [0.0, 2.0], 0.0, 1.0, [8])
    assert np.array_equal(single[0].states, integrate(van_der_pol(), [0.0, 2.0], Grid(0.0, 1.0, 8)).states)
