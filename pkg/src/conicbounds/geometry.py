"""Volumes, caps, angles and the half-sphere projection on S^N in R^{N+1}.

All angles are radians. Scalar entry points validate their inputs; the
``*_batch`` helpers operate row-wise on ``(n, N+1)`` arrays and are what the
samplers and the Monte Carlo layer use.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ._validation import check_int, check_point, check_real, check_unit_point
from .exceptions import DomainError, MeasureZeroError

HALF_PI = 0.5 * math.pi
# below this |<x, center>|/||x|| the point is treated as lying on center^perp
MEASURE_ZERO_TOL = 1e-300
_LOG_SPACE_MIN_N = 100


@dataclass(frozen=True)
class CapSpec:
    """Spherical cap B_S(center, theta) with theta in [0, pi]."""

    center: np.ndarray
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "center", check_unit_point(self.center))
        object.__setattr__(self, "theta", check_real(self.theta, "theta", 0.0, math.pi))

    @property
    def N(self):
        return self.center.shape[0] - 1


def _log_omega(k):
    # valid for k >= 0 (the 0-sphere has two points: Omega_0 = 2)
    return math.log(2.0) + 0.5 * (k + 1) * math.log(math.pi) - special.gammaln(0.5 * (k + 1))


def log_omega(N):
    """Natural log of the volume of S^N."""
    N = check_int(N, "N", minimum=1)
    return _log_omega(N)


def omega(N):
    """Volume Omega_N = 2 pi^((N+1)/2) / Gamma((N+1)/2) of the unit sphere S^N."""
    N = check_int(N, "N", minimum=1)
    if N > _LOG_SPACE_MIN_N:
        return math.exp(_log_omega(N))
    h = 0.5 * (N + 1)
    return 2.0 * math.pi ** h / math.gamma(h)


def unit_ball_volume(N):
    """Volume of the unit ball in R^{N+1}, i.e. Omega_N/(N+1)."""
    N = check_int(N, "N", minimum=1)
    if N > _LOG_SPACE_MIN_N:
        return math.exp(_log_omega(N) - math.log(N + 1))
    return omega(N) / (N + 1)


def sin_power_integral(N, theta):
    """Adaptive quadrature of int_0^theta sin^(N-1)(t) dt."""
    N = check_int(N, "N", minimum=1)
    theta = check_real(theta, "theta", 0.0, math.pi)
    if theta == 0.0:
        return 0.0
    if N == 1:
        return theta
    value, _ = integrate.quad(lambda t: math.sin(t) ** (N - 1), 0.0, theta,
                              epsabs=0.0, epsrel=1e-12, limit=200)
    return value


def cap_volume(N, theta):
    """Exact volume of a spherical cap of angular radius theta in S^N."""
    N = check_int(N, "N", minimum=1)
    theta = check_real(theta, "theta", 0.0, math.pi)
    return math.exp(_log_omega(N - 1)) * sin_power_integral(N, theta)


def cap_volume_bounds(N, theta):
    """Lower and upper bounds on the cap volume, valid for theta in [0, pi/2].

    Returns ``(Omega_N sin^N / sqrt(2 pi (N+1)), Omega_N sin^N / 2)``.
    """
    N = check_int(N, "N", minimum=1)
    theta = check_real(theta, "theta", 0.0, HALF_PI)
    s = math.sin(theta) ** N
    om = omega(N)
    return om * s / math.sqrt(2.0 * math.pi * (N + 1)), 0.5 * om * s


def half_cap_fraction(N, alpha):
    """vol(B_S(., alpha)) / vol(half-sphere), vectorized over alpha in [0, pi/2].

    Closed form through the regularized incomplete beta function; used where
    a per-point quadrature would be too slow (sampling, radial profiles).
    Switches to the complementary form above pi/4 to keep relative accuracy
    near the half-sphere.
    """
    alpha = np.asarray(alpha, dtype=float)
    a, b = 0.5 * N, 0.5
    s = np.sin(alpha)
    c = np.cos(alpha)
    low = special.betainc(a, b, s * s)
    high = 1.0 - special.betainc(b, a, c * c)
    out = np.where(alpha <= 0.25 * math.pi, low, high)
    return out if out.ndim else float(out)


def half_cap_density(N, alpha):
    """Derivative of half_cap_fraction in alpha: sin^(N-1)(alpha) / int_0^{pi/2} sin^(N-1)."""
    alpha = np.asarray(alpha, dtype=float)
    log_norm = special.betaln(0.5 * N, 0.5) - math.log(2.0)
    return np.sin(alpha) ** (N - 1) * math.exp(-log_norm)


def angle(x, y):
    """Angle between two nonzero vectors, in [0, pi]."""
    x = check_point(x, "x", nonzero=True)
    y = check_point(y, "y", nonzero=True)
    if x.shape != y.shape:
        raise DomainError(f"dimension mismatch: {x.shape} vs {y.shape}")
    r = np.dot(x, y) / (np.linalg.norm(x) * np.linalg.norm(y))
    return float(np.arccos(np.clip(r, -1.0, 1.0)))


def sin_distance(x, y):
    """Sine of the angle between x and y."""
    return math.sin(angle(x, y))


def psi(center, x):
    """Project x to the open half-sphere around `center`: +-x/||x||."""
    center = check_unit_point(center)
    x = check_point(x, "x", nonzero=True)
    if x.shape != center.shape:
        raise DomainError(f"dimension mismatch: {x.shape} vs {center.shape}")
    nx = np.linalg.norm(x)
    ip = float(np.dot(x, center)) / nx
    if abs(ip) <= MEASURE_ZERO_TOL:
        raise MeasureZeroError("x lies on the hyperplane orthogonal to the center")
    return (x if ip > 0 else -x) / nx


def cos_angle_batch(X, center):
    """Row-wise cosine of the angle between each row of X and a unit center."""
    X = np.asarray(X, dtype=float)
    return np.clip(X @ center / np.linalg.norm(X, axis=1), -1.0, 1.0)


def angle_batch(X, center):
    return np.arccos(cos_angle_batch(X, center))


def psi_batch(X, center):
    """Row-wise psi. Returns ``(Y, ok)``; rows with ok=False hit center^perp."""
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    ip = X @ center
    ok = np.abs(ip) > MEASURE_ZERO_TOL * norms
    sign = np.where(ip > 0, 1.0, -1.0)
    return X * (sign / norms)[:, None], ok
