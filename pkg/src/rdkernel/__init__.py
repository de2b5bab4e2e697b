"""Fundamental solution, contraction solver and FitzHugh-Nagumo front-end for
``u_t - eps u_xx + a u + b int_0^t exp(-beta (t - tau)) u dtau = F``.

Set ``RDKERNEL_DISABLE_NUMBA=1`` before import to run the pure-numpy kernels.
"""

from ._accel import backend_name
from .convolve import Field, Grid, TimeSlab, spacetime_convolve, spatial_convolve
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    InputError,
    QuadratureError,
    RangeError,
    RDKernelError,
)
from .fhn import FHNParams, solve_fhn, steady_states, traveling_wave, wave_profile
from .kernels import kernel_bound, kernel_K, kernel_K1, kernel_K2, kernel_values, pde_residual
from .model import ModelParams, beta0, beta1, chi, decay_E, mass_K_exact, sigma
from .quadrature import QuadSpec, integrate, integrate_semi_infinite
from .solver import IVProblem, SolverConfig, apriori_bound, linear_solve, picard_solve

__version__ = "0.1.0"
