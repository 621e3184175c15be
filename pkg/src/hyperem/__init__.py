"""Radial solutions of the Emden-Fowler equation on hyperbolic space."""

from .errors import (DegenerateComparisonError, DomainError, HyperemError,
                     InsufficientDataError, SpectralGapError, UnsupportedRegimeError)
from .geometry import (Params, Regime, RegimeTag, c_np, classify_regime, critical_exponent,
                       find_R_np, lambda_pair, phi_n, psi_p, spectral_gap)
from .ode import Trajectory, integrate, integrate_euclidean, rescale_curvature
from .diagnostics import DecayLaw, decay_fit, lyapunov_F, pohozaev_Psi
from .exact import exact_ground_state, linear_solve, residual_check
from .classify import classify_solution, count_intersections, count_zeros, find_separatrix

__version__ = "0.1.0"
