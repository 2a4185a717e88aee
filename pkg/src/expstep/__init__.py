"""Matrix-exponential one-step integration for systems y' = A(y) y."""

from .integrator import (DivergenceError, Grid, OdeSystem, Trajectory, evaluate_dense, integrate,
                         refine_sequence, step_matrix)
from .linalg import (ConsistencyError, eigenvalues, eigenvalues_2x2, eigenvalues_3x3, expm,
                     expm_2x2_closed, expm_putzer, expm_series)
from .metrics import (CubicSpline, ErrorReport, build_spline, first_integral_drift, node_mse,
                      observed_order, pde_mse, residual_error)
from .models import CATALOG, make_model
from .reference import Jet, ReferenceConfig, integrate_reference, rk_reference, taylor_step

__all__ = [
    "CATALOG", "ConsistencyError", "CubicSpline", "DivergenceError", "ErrorReport", "Grid", "Jet",
    "OdeSystem", "ReferenceConfig", "Trajectory", "build_spline", "eigenvalues", "eigenvalues_2x2",
    "eigenvalues_3x3", "evaluate_dense", "expm", "expm_2x2_closed", "expm_putzer", "expm_series",
    "first_integral_drift", "integrate", "integrate_reference", "make_model", "node_mse",
    "observed_order", "pde_mse", "refine_sequence", "residual_error", "rk_reference", "step_matrix",
    "taylor_step",
]
