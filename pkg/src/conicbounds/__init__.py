"""Bounds on the expected logarithm of conic condition numbers.

Closed-form smoothed and local bounds for uniform-cap and Gaussian
measures, the radial decomposition of sphere-centered Gaussians, and a
Monte Carlo harness that checks the bounds statistically.
"""
__version__ = "0.1.0"

from .bounds import (K, K_BAR, c_helper, evaluate, local_gaussian_H, local_uniform_cases,
                     local_uniform_H, phi, smooth_gaussian_H, smooth_uniform)
from .exceptions import (ConfigError, ConicBoundsError, DomainError, MeasureZeroError,
                         NumericalError, PreconditionError, QuadratureError)
from .geometry import (CapSpec, angle, cap_volume, cap_volume_bounds, omega, psi,
                       sin_distance, unit_ball_volume)
from .instances import (DeterminantInstance, HyperplaneArrangement, cond, cond_from_unit,
                        dist_to_sigma, instance_from_spec)
from .montecarlo import (Estimate, ValidationRow, decomposition_mc_check, estimate_ln_cond,
                         proof_step_suite, sweep, validate_bound)
from .radial import (RadialProfile, build_profile, decomposition_rhs, eval_f, eval_G,
                     eval_G_prime)
from .samplers import (GaussianSpec, PointMass, RngHandle, SinBallSpec, sample_gaussian,
                       sample_sin_ball, sample_uniform_cap, sample_uniform_sphere)

__all__ = [
    "__version__", "CapSpec", "ConfigError", "ConicBoundsError", "DeterminantInstance",
    "DomainError", "Estimate", "GaussianSpec", "HyperplaneArrangement", "K", "K_BAR",
    "MeasureZeroError", "NumericalError", "PointMass", "PreconditionError", "QuadratureError",
    "RadialProfile", "RngHandle", "SinBallSpec", "ValidationRow", "angle", "build_profile",
    "c_helper", "cap_volume", "cap_volume_bounds", "cond", "cond_from_unit",
    "decomposition_mc_check", "decomposition_rhs", "dist_to_sigma", "estimate_ln_cond",
    "eval_G", "eval_G_prime", "eval_f", "evaluate", "instance_from_spec", "local_gaussian_H",
    "local_uniform_H", "local_uniform_cases", "omega", "phi", "proof_step_suite", "psi",
    "sample_gaussian", "sample_sin_ball", "sample_uniform_cap", "sample_uniform_sphere",
    "sin_distance", "smooth_gaussian_H", "smooth_uniform", "sweep", "unit_ball_volume",
    "validate_bound",
]
