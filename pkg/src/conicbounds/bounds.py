"""Closed-form upper bounds on E ln C(x) for uniform-cap and Gaussian measures.

Conventions for an ill-posed center (``cond_center = inf``): (1 - rho)/C := 0,
the exponent of phi := 0, and the ``ln C * min{...}`` head term of the local
Gaussian bound := 0 (its limit as C grows). Smoothed bounds return
``math.inf`` at theta = 0 or sigma = 0 rather than overflowing.
"""
import math

import numpy as np

from ._validation import check_cond_value, check_int, check_real
from .exceptions import DomainError, PreconditionError
from .radial import log_q

HALF_PI = 0.5 * math.pi
LN2 = math.log(2.0)
K = 2.0 * (LN2 + 1.0)
K_BAR = LN2 + K  # = 3 ln 2 + 2
LN12 = math.log(12.0)


def _nd(N, d):
    return check_int(N, "N", minimum=1) * check_int(d, "d", minimum=1)


def _theta(theta):
    theta = check_real(theta, "theta", low=0.0)
    if theta > HALF_PI:
        raise DomainError(f"theta={theta} is outside the validated domain [0, pi/2]")
    return theta


def _log_two_terms(N, sigma):
    """ln(2^{N-1} + sigma^{-(N+1)}) by log-sum-exp."""
    return float(np.logaddexp((N - 1) * LN2, -(N + 1) * math.log(sigma)))


def smooth_uniform(N, d, theta):
    """ln(N d / sin theta) + K for the uniform measure on a cap of radius theta."""
    nd = _nd(N, d)
    theta = _theta(theta)
    if theta == 0.0:
        return math.inf
    return math.log(nd) - math.log(math.sin(theta)) + K


def phi_exponent(cond_center):
    """ln 2 / ln(2 C), i.e. log base 1/(2C) of 1/2; 0 when C = inf."""
    cond_center = check_cond_value(cond_center)
    if math.isinf(cond_center):
        return 0.0
    return LN2 / math.log(2.0 * cond_center)


def phi(rho, N, d, cond_center):
    """2 (N d - 1) rho^e + 1 with e = ln 2 / ln(2 C)."""
    rho = check_real(rho, "rho", 0.0, 1.0)
    nd = _nd(N, d)
    e = phi_exponent(cond_center)
    power = 1.0 if e == 0.0 else rho ** e
    return 2.0 * (nd - 1) * power + 1.0


def _blend(rho, cond_center):
    # rho + (1 - rho)/C with (1 - rho)/inf := 0
    if math.isinf(cond_center):
        return rho
    return rho + (1.0 - rho) / cond_center


def local_uniform_cases(N, d, theta, cond_center):
    """Two-branch local bound for the uniform cap measure."""
    nd = _nd(N, d)
    theta = _theta(theta)
    if theta == 0.0:
        raise DomainError("theta must be > 0")
    cond_center = check_cond_value(cond_center)
    rho = math.sin(theta)
    denom = _blend(rho, cond_center)
    if rho > 1.0 / (2.0 * cond_center + 1.0):
        return math.log(nd / denom) + LN12 + 2.0
    return -math.log(denom) + math.log(4.0)


def local_uniform_H(N, d, theta, cond_center):
    """ln(phi(rho) / (rho + (1 - rho)/C)) + ln 12 + 2 with rho = sin theta."""
    _nd(N, d)
    theta = _theta(theta)
    if theta == 0.0:
        raise DomainError("theta must be > 0")
    cond_center = check_cond_value(cond_center)
    rho = math.sin(theta)
    return math.log(phi(rho, N, d, cond_center) / _blend(rho, cond_center)) + LN12 + 2.0


def smooth_gaussian_H(N, d, sigma):
    """Smoothed bound on E ln C(y) for y ~ N(center, sigma^2 Id); needs N >= 5."""
    N = check_int(N, "N", minimum=1)
    if N < 5:
        raise PreconditionError(f"smooth_gaussian requires N ≥ 5, got N={N}")
    nd = _nd(N, d)
    sigma = check_real(sigma, "sigma", low=0.0, allow_inf=True)
    if sigma == 0.0:
        return math.inf
    base = math.log(nd) + K
    if math.isinf(sigma):
        return base
    lq = log_q(sigma)
    q = math.exp(lq)
    return q / N * (1.0 + _log_two_terms(N, sigma) - lq) + base


def local_gaussian_terms(N, d, sigma, cond_center):
    """The three sigma-dependent terms of the local Gaussian bound (without K_BAR)."""
    N = check_int(N, "N", minimum=1)
    if N < 6:
        raise PreconditionError(f"local_gaussian requires N ≥ 6, got N={N}")
    nd = _nd(N, d)
    sigma = check_real(sigma, "sigma", low=0.0, allow_inf=True)
    cc = check_cond_value(cond_center)
    ln_nd = math.log(nd)
    finite = not math.isinf(cc)
    ln_c = math.log(cc) if finite else math.inf

    if sigma == 0.0:
        # point mass at the center
        if not finite:
            return math.inf, math.inf, 0.0
        return ln_c, 0.0, 0.0
    if math.isinf(sigma):
        return 0.0, 0.0, ln_nd

    lq = log_q(sigma)
    q = math.exp(lq)
    e = -math.expm1(lq)  # e^{-1/2 sigma^2}
    L = _log_two_terms(N, sigma)
    spread = 4.0 * math.pi * sigma * math.sqrt(N + 1)
    smoothed = q / N * (L - lq)

    if finite:
        head_alt = math.exp(min(L - N * math.log(2.0 * cc), 700.0))
        term1 = ln_c * min(q, head_alt)
        term2 = min(q * ln_c, spread * cc * ln_c, smoothed)
        term3 = ln_nd * min(1.0, e + spread * cc)
    else:
        term1 = 0.0
        term2 = smoothed
        term3 = ln_nd
    return term1, term2, term3


def local_gaussian_H(N, d, sigma, cond_center):
    """Local bound on E ln C(y), y ~ N(center, sigma^2 Id), depending on C(center); N >= 6."""
    t1, t2, t3 = local_gaussian_terms(N, d, sigma, cond_center)
    return t1 + t2 + t3 + K_BAR


def c_helper(N, sigma):
    """((1 - e^{-1/2s^2}) s^{N+1} / (1 + 2^{N-1} s^{N+1}))^{1/N}, in log space."""
    N = check_int(N, "N", minimum=2)
    sigma = check_real(sigma, "sigma", low=0.0, low_open=True)
    ls = (N + 1) * math.log(sigma)
    log_c = (log_q(sigma) + ls - float(np.logaddexp(0.0, (N - 1) * LN2 + ls))) / N
    return math.exp(log_c)


# name -> (callable, ordered parameter names); used by the CLI and the validator
BOUNDS = {
    "smooth_uniform": (smooth_uniform, ("N", "d", "theta")),
    "phi": (phi, ("rho", "N", "d", "cond_center")),
    "local_uniform_cases": (local_uniform_cases, ("N", "d", "theta", "cond_center")),
    "local_uniform": (local_uniform_H, ("N", "d", "theta", "cond_center")),
    "smooth_gaussian": (smooth_gaussian_H, ("N", "d", "sigma")),
    "local_gaussian": (local_gaussian_H, ("N", "d", "sigma", "cond_center")),
    "c_helper": (c_helper, ("N", "sigma")),
}

# bounds that upper-bound E ln C under a measure, keyed by the measure they accept
MEASURE_BOUNDS = {
    "smooth_uniform": "uniform_cap",
    "local_uniform": "uniform_cap",
    "local_uniform_cases": "uniform_cap",
    "smooth_gaussian": "gaussian",
    "local_gaussian": "gaussian",
}


def evaluate(name, **params):
    """Evaluate a named bound with keyword parameters."""
    try:
        fn, names = BOUNDS[name]
    except KeyError:
        raise DomainError(f"unknown bound {name!r}; choose from {sorted(BOUNDS)}") from None
    missing = [p for p in names if params.get(p) is None]
    if missing:
        raise DomainError(f"bound {name!r} needs parameters {missing}")
    return fn(*(params[p] for p in names))
