import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expstep.integrator import Grid, OdeSystem
from expstep.metrics import observed_order, sup_node_error
from expstep.models import van_der_pol
from expstep.reference import (Jet, ReferenceConfig, integrate_reference, rk_reference,
                               taylor_step)


def growth():
    return OdeSystem("growth", 1, lambda y: [[1.0]])


def riccati():
    return OdeSystem("riccati", 1, lambda y: [[y[0]]])


def rotation():
    return OdeSystem("rotation", 2, lambda y: [[0, 1], [-1, 0]])


coeffs = st.lists(st.floats(-3, 3), min_size=4, max_size=4)


@settings(max_examples=100, deadline=None)
@given(coeffs, coeffs)
def test_jet_product_is_truncated_cauchy_product(a, b):
    expected = np.polynomial.polynomial.polymul(a, b)[:4]
    assert np.allclose((Jet(a) * Jet(b)).c, expected, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(coeffs, st.floats(-2, 2))
def test_jet_mixed_arithmetic(a, s):
    j = Jet(a)
    assert np.allclose((s * j + 1.0 - j).c, np.array(a) * (s - 1) + [1, 0, 0, 0])
    assert np.allclose((j ** 2).c, (j * j).c)
    assert np.allclose((-j).c, -np.array(a))


def test_jet_errors():
    with pytest.raises(ValueError):
        Jet([1, 2]) * Jet([1, 2, 3])
    with pytest.raises(ValueError):
        Jet([1, 2]) ** 0.5


@pytest.mark.parametrize("order", range(1, 9))
def test_growth_gives_exponential_partial_sums(order):
    h = 0.1
    expected = sum(h ** i / math.factorial(i) for i in range(order + 1))
    assert taylor_step(growth(), [1.0], h, order)[0] == pytest.approx(expected, rel=1e-15)


def test_order_four_exponential_value():
    assert taylor_step(growth(), [1.0], 0.1, 4)[0] == pytest.approx(1.1051708333333333, rel=1e-15)


def test_riccati_order_two():
    assert taylor_step(riccati(), [1.0], 0.1, 2)[0] == pytest.approx(1.11, rel=1e-15)


def test_taylor2_matches_finite_difference_jacobian_expansion():
    sys = van_der_pol(0.5)
    y = np.array([0.4, 1.3])
    h, d = 0.1, 1e-6
    f = sys.rhs(y)
    jac = np.column_stack([(sys.rhs(y + d * e) - sys.rhs(y - d * e)) / (2 * d) for e in np.eye(2)])
    expected = y + h * f + 0.5 * h * h * jac @ f
    assert np.allclose(taylor_step(sys, y, h, 2), expected, atol=1e-10, rtol=0)


def test_scalar_flavor_takes_velocity_from_position_polynomial():
    # y'' = -y from (1, 0): position 1 - h^2/2 at order 3, velocity its derivative -h
    h = 0.2
    full = taylor_step(rotation(), [1.0, 0.0], h, 3)
    scalar = taylor_step(rotation(), [1.0, 0.0], h, 3, flavor="scalar")
    assert full[0] == scalar[0] == pytest.approx(1 - h * h / 2)
    assert full[1] == pytest.approx(-h + h ** 3 / 6)
    assert scalar[1] == pytest.approx(-h)


def test_scalar_flavor_needs_two_components():
    with pytest.raises(ValueError):
        taylor_step(growth(), [1.0], 0.1, 3, flavor="scalar")
    with pytest.raises(ValueError):
        taylor_step(growth(), [1.0], 0.1, 3, flavor="other")


def test_rk_reference_on_growth():
    traj = rk_reference(growth(), [1.0], Grid(0.0, 1.0, 10), 100)
    assert abs(traj.states[-1, 0] - math.e) <= 1e-12


def test_rk_reference_rotation_returns():
    traj = rk_reference(rotation(), [1.0, 0.0], Grid(0.0, 2 * math.pi, 63), 100)
    assert np.allclose(traj.states[-1], [1.0, 0.0], atol=1e-12)


def test_rk_reference_is_converged_on_van_der_pol():
    grid = Grid.from_step(0.0, 20.0, 0.1)
    a = rk_reference(van_der_pol(), [0.0, 2.0], grid, 100)
    b = rk_reference(van_der_pol(), [0.0, 2.0], grid, 200)
    assert np.abs(a.states - b.states).max() < 1e-11


@pytest.mark.parametrize("order", [2, 3, 4])
def test_taylor_observed_order(order):
    sys = van_der_pol()
    pairs = []
    for h in (0.1, 0.05, 0.025):
        grid = Grid.from_step(0.0, 2.0, h)
        ref = rk_reference(sys, [0.0, 2.0], grid, 100)
        traj = integrate_reference(sys, [0.0, 2.0], grid, ReferenceConfig(f"taylor{order}"))
        pairs.append((grid.h, sup_node_error(traj, ref)))
    assert order - 0.3 <= observed_order(pairs) <= order + 0.3


def test_integrate_reference_dispatch():
    grid = Grid(0.0, 1.0, 10)
    rk4 = integrate_reference(growth(), [1.0], grid, ReferenceConfig("rk4"))
    assert abs(rk4.states[-1, 0] - math.e) < 1e-5
    ref = integrate_reference(growth(), [1.0], grid, ReferenceConfig("rk_reference", substeps=10))
    assert abs(ref.states[-1, 0] - math.e) < 1e-9


@pytest.mark.parametrize("kw", [{"method": "euler"}, {"method": "rk4", "substeps": 0},
                                {"method": "taylor2", "flavor": "odd"}])
def test_reference_config_validation(kw):
    with pytest.raises(ValueError):
        ReferenceConfig(**kw)


def test_taylor2_on_growth():
    assert taylor_step(growth(), [1.0], 0.1, 2)[0] == pytest.approx(1.105, rel=1e-15)


def test_taylor4_duffing_magnitude():
    from expstep.experiments import PRESETS, make_grid, reference_trajectory
    from expstep.metrics import node_mse

    cfg = PRESETS["table2"]
    sys = cfg.system()
    grid = make_grid(cfg.T, 0.1)
    err = node_mse(integrate_reference(sys, cfg.initial, grid, ReferenceConfig("taylor4")),
                   reference_trajectory(sys, cfg.initial, grid))
    assert 4.12e-8 / 30 <= err <= 4.12e-8 * 30


@pytest.mark.parametrize("preset", ["table1", "table2", "table3", "table4", "table6", "table7"])
def test_package_reference_is_converged(preset):
    from expstep.experiments import PRESETS, REFERENCE_STEP, make_grid, reference_trajectory

    cfg = PRESETS[preset]
    sys = cfg.system()
    grid = make_grid(cfg.T, 0.1)
    ref = reference_trajectory(sys, cfg.initial, grid)
    doubled = rk_reference(sys, cfg.initial, grid, 2 * math.ceil(grid.h / REFERENCE_STEP - 1e-9))
    tol = 1e-12 if preset == "table1" else 1e-11
    assert np.abs(ref.states - doubled.states).max() < tol
