"""Exponential asymptotics, transseries and pole locations for the inner
Riccati equation ``mu U' = -xi U/2 + U^2/2 - i/4`` of the Burgers problem."""
from .precision import DomainError, PrecisionConfig, PrecisionError
from .outer import a0_coefficients, build_outer_series, evaluate_truncated
from .lateorder import LateOrderData, classify_sector, compute_lambda, stokes_multiplier, u_exp
from .transseries import A_closed, TransseriesParams, build_coeff_table, evaluate_resummed, tau
from .locator import predict_poles, predict_zeros, residual_at_prediction
from .oracle import build_linear_solution, find_roots, kummer_m, phase_grid

__version__ = "0.1.0"
