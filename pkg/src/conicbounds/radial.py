"""Radial decomposition of a Gaussian centered on the sphere.

For y ~ N(center, sigma^2 Id) in R^{N+1} and any scale-invariant F,

    E F(y) = (1 - e^{-1/2s^2}) E_{theta~f} E_{B_S(center, theta)} F + e^{-1/2s^2} E_{half-sphere} F,

where the density f on [0, pi/2] is built from the radial mass

    G(a) = (2 pi s^2)^{-(N+1)/2} int_R exp(-(l^2 + 1 - 2 l cos a)/2s^2) |l|^N dl

through f(theta) = -vol(B_S(theta)) G'(theta) / (1 - e^{-1/2s^2}).

G and G' are evaluated by adaptive quadrature in log space. Folding the
negative half-line onto the positive one turns the integrands into
l^N e^{-(l-c)^2/2s^2} (1 + e^{-2lc/s^2}) and l^{N+1} e^{-(l-c)^2/2s^2} (1 - e^{-2lc/s^2}),
so G' needs no cancellation between the two lobes.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import fft, integrate

from ._validation import check_int, check_real
from .exceptions import PreconditionError, QuadratureError
from .geometry import HALF_PI, _log_omega, cap_volume, half_cap_fraction

MASS_TOL = 1e-6
CHECK_SLACK = 1e-9
_QUAD_EPSREL = 1e-11
_TAIL_REL = 1e-9
_MAX_GRID = 2**14 + 1
_DOMAIN = (0.0, HALF_PI)


def _log1mexp(x):
    """log(1 - e^{-x}) for x > 0."""
    return math.log(-math.expm1(-x)) if x < 0.693 else math.log1p(-math.exp(-x))


def log_q(sigma):
    """log(1 - e^{-1/(2 sigma^2)})."""
    s2 = sigma * sigma
    return _log1mexp(0.5 / s2) if s2 > 0.0 else 0.0


def _truncation(N, sigma):
    return sigma * (12.0 + math.sqrt(2.0 * N))


def _log_folded_integral(power, c, sigma, N, odd):
    """log int_0^inf l^power exp(-(l-c)^2/2s^2) (1 +- exp(-2lc/s^2)) dl."""
    if odd and c <= 0.0:
        return -math.inf
    s2 = sigma * sigma
    T = _truncation(N, sigma)
    lo, hi = max(0.0, c - T), c + T
    mode = 0.5 * (c + math.sqrt(c * c + 4.0 * power * s2))
    mode = min(max(mode, lo), hi)
    k = 2.0 * c / s2

    def log_integrand(lam):
        if lam <= 0.0:
            return -math.inf
        base = power * math.log(lam) - (lam - c) ** 2 / (2.0 * s2)
        x = k * lam
        if odd:
            return base + _log1mexp(x) if x > 0.0 else -math.inf
        return base + math.log1p(math.exp(-x))

    shift = log_integrand(mode)
    if not math.isfinite(shift):
        # odd integrand vanishes at the clamped mode only if c*mode == 0
        shift = log_integrand(0.5 * (lo + hi))

    def integrand(lam):
        return math.exp(log_integrand(lam) - shift)

    points = [mode] if lo < mode < hi else None
    value, _ = integrate.quad(integrand, lo, hi, points=points, epsabs=0.0,
                              epsrel=_QUAD_EPSREL, limit=400)
    if not value > 0.0:
        raise QuadratureError("radial integral vanished", {"c": c, "sigma": sigma, "power": power})
    return shift + math.log(value)


def _check_args(alpha, N, sigma):
    N = check_int(N, "N", minimum=1)
    sigma = check_real(sigma, "sigma", low=0.0, low_open=True)
    alpha = check_real(alpha, "alpha", 0.0, HALF_PI)
    return alpha, N, sigma


def log_G(alpha, N, sigma):
    """Natural log of G(alpha)."""
    alpha, N, sigma = _check_args(alpha, N, sigma)
    c, s = math.cos(alpha), math.sin(alpha)
    if alpha == HALF_PI:
        c, s = 0.0, 1.0
    pref = -0.5 * (N + 1) * math.log(2.0 * math.pi * sigma * sigma)
    return pref - s * s / (2.0 * sigma * sigma) + _log_folded_integral(N, c, sigma, N, odd=False)


def eval_G(alpha, N, sigma):
    """Radial Gaussian mass G(alpha) along the ray at angle alpha from the center."""
    return math.exp(log_G(alpha, N, sigma))


def log_abs_G_prime(alpha, N, sigma):
    """log |G'(alpha)|; -inf at alpha in {0, pi/2} where G' vanishes."""
    alpha, N, sigma = _check_args(alpha, N, sigma)
    if alpha == 0.0 or alpha == HALF_PI:
        return -math.inf
    c, s = math.cos(alpha), math.sin(alpha)
    s2 = sigma * sigma
    pref = -0.5 * (N + 1) * math.log(2.0 * math.pi * s2)
    return (math.log(s) - math.log(s2) + pref - s * s / (2.0 * s2)
            + _log_folded_integral(N + 1, c, sigma, N, odd=True))


def eval_G_prime(alpha, N, sigma):
    """dG/dalpha, by differentiation under the integral sign. Always <= 0."""
    return -math.exp(log_abs_G_prime(alpha, N, sigma))


def eval_f(theta, N, sigma):
    """Radial density f(theta) = -vol(B_S(theta)) G'(theta) / (1 - e^{-1/2s^2})."""
    N = check_int(N, "N", minimum=2)
    sigma = check_real(sigma, "sigma", low=0.0, low_open=True)
    theta = check_real(theta, "theta", 0.0, HALF_PI, low_open=True, high_open=True)
    v = cap_volume(N, theta)
    if v == 0.0:  # underflow for tiny theta; f vanishes there
        return 0.0
    return math.exp(math.log(v) + log_abs_G_prime(theta, N, sigma) - log_q(sigma))


def gamma_coefficient(N):
    """2^{N+1/2} e^{(N-1)/2} / (sqrt(pi) (N-1)^{N/2} (N+1)); at most 1 for N >= 5."""
    N = check_int(N, "N", minimum=2)
    log_val = ((N + 0.5) * math.log(2.0) + 0.5 * (N - 1) - 0.5 * math.log(math.pi)
               - 0.5 * N * math.log(N - 1) - math.log(N + 1))
    return math.exp(log_val)


def chebyshev_grid(n):
    """Chebyshev-Lobatto points on [0, pi/2], increasing."""
    k = np.arange(n)
    x = -np.cos(np.pi * k / (n - 1))
    x[0], x[-1] = -1.0, 1.0
    return 0.25 * math.pi * (1.0 + x)


def _cheb_coefficients(values):
    # values at x_k = -cos(pi k/(n-1)); DCT-I maps Lobatto samples to coefficients
    n = values.shape[0]
    a = fft.dct(values[::-1], type=1) / (n - 1)
    a[0] *= 0.5
    a[-1] *= 0.5
    return a


@dataclass(frozen=True)
class RadialProfile:
    """Tabulated G, G', f and CDF on a Chebyshev grid over [0, pi/2].

    ``f_values`` and ``cdf`` are normalized by the computed mass (stored in
    ``raw_mass``). Off-grid evaluation goes through the Chebyshev
    interpolant of f and its antiderivative.
    """

    N: int
    sigma: float
    theta_grid: np.ndarray
    g_values: np.ndarray
    log_g_values: np.ndarray
    g_prime_values: np.ndarray
    f_values: np.ndarray
    cdf: np.ndarray
    raw_mass: float
    _f_cheb: C.Chebyshev = field(repr=False)
    _cdf_cheb: C.Chebyshev = field(repr=False)

    @property
    def q(self):
        """1 - e^{-1/2 sigma^2}, the weight of the cap mixture."""
        return math.exp(log_q(self.sigma))

    @property
    def half_sphere_weight(self):
        return -math.expm1(log_q(self.sigma))

    def density(self, theta):
        out = self._f_cheb(np.asarray(theta, dtype=float))
        return out if np.ndim(out) else float(out)

    def cdf_at(self, t):
        out = np.clip(self._cdf_cheb(np.asarray(t, dtype=float)), 0.0, 1.0)
        return out if np.ndim(out) else float(out)

    def quantile(self, p):
        """Grid-interpolated inverse CDF (used for quadrature breakpoints)."""
        return np.interp(p, self.cdf, self.theta_grid)

    def breakpoints(self, lo=0.0, hi=HALF_PI):
        qs = self.quantile([1e-9, 1e-4, 0.01, 0.1, 0.5, 0.9, 0.99, 1 - 1e-4, 1 - 1e-9])
        return sorted({float(x) for x in qs if lo < x < hi})


def build_profile(N, sigma, grid_size=257, g_prime=None):
    """Tabulate the radial profile for (N, sigma).

    The grid starts at `grid_size` Chebyshev-Lobatto points and is doubled
    (reusing the nested nodes) until the interpolant of f is resolved, so
    the final grid can be larger than requested for very small sigma.
    `g_prime` replaces :func:`eval_G_prime` (used for mutation self-tests).

    Raises QuadratureError when the mass of f is off by more than 1e-6.
    """
    N = check_int(N, "N", minimum=2)
    sigma = check_real(sigma, "sigma", low=0.0, low_open=True)
    grid_size = check_int(grid_size, "grid_size", minimum=129)
    lq = log_q(sigma)
    log_half = _log_omega(N) - math.log(2.0)

    if g_prime is None:
        def f_at(theta):
            if theta <= 0.0 or theta >= HALF_PI:
                return 0.0, 0.0
            lg = log_abs_G_prime(theta, N, sigma)
            lv = math.log(half_cap_fraction(N, theta)) + log_half
            return -math.exp(lg), math.exp(lv + lg - lq)
    else:
        def f_at(theta):
            if theta <= 0.0 or theta >= HALF_PI:
                return 0.0, 0.0
            gp = float(g_prime(theta, N, sigma))
            v = half_cap_fraction(N, theta) * math.exp(log_half)
            return gp, -v * gp / math.exp(lq)

    n = grid_size
    grid = chebyshev_grid(n)
    pairs = [f_at(t) for t in grid]
    while True:
        f_vals = np.array([p[1] for p in pairs])
        coef = _cheb_coefficients(f_vals)
        scale = np.max(np.abs(coef))
        tail = np.max(np.abs(coef[-max(8, n // 10):]))
        if scale == 0.0 or tail <= _TAIL_REL * scale or 2 * n - 1 > _MAX_GRID:
            break
        finer = chebyshev_grid(2 * n - 1)
        new = [f_at(t) for t in finer[1::2]]
        merged = [None] * (2 * n - 1)
        merged[0::2] = pairs
        merged[1::2] = new
        pairs, grid, n = merged, finer, 2 * n - 1

    gp_vals = np.array([p[0] for p in pairs])
    f_cheb = C.Chebyshev(coef, domain=_DOMAIN)
    F = f_cheb.integ(lbnd=0.0)
    mass = float(F(HALF_PI))
    diagnostics = {"N": N, "sigma": sigma, "grid": n, "mass": mass,
                   "tail": float(tail / scale) if scale else None}
    if not math.isfinite(mass) or abs(mass - 1.0) > MASS_TOL:
        raise QuadratureError(f"density mass {mass!r} is not within {MASS_TOL} of 1", diagnostics)
    f_cheb = f_cheb / mass
    F = F / mass
    cdf = np.maximum.accumulate(np.clip(F(grid), 0.0, None))
    log_g = np.array([log_G(t, N, sigma) for t in grid])
    return RadialProfile(N=N, sigma=sigma, theta_grid=grid, g_values=np.exp(log_g),
                         log_g_values=log_g, g_prime_values=gp_vals, f_values=f_vals / mass,
                         cdf=cdf, raw_mass=mass, _f_cheb=f_cheb, _cdf_cheb=F)


def _quad(func, lo, hi, points):
    pts = [p for p in points if lo < p < hi] or None
    value, err = integrate.quad(func, lo, hi, points=pts, epsabs=1e-13, epsrel=1e-10, limit=500)
    return value


def expect_under_f(profile, g, cut=None):
    """E_{theta~f} g(theta) by adaptive quadrature against the profile interpolant.

    With `cut`, the integral is split into [0, cut] and [cut, pi/2]; use it
    for g with an integrable singularity at 0 such as ln(1/sin theta).
    """
    def integrand(theta):
        val = float(g(theta))
        if not math.isfinite(val):
            raise QuadratureError(f"g is not finite at theta={theta!r}")
        return val * float(profile._f_cheb(theta))

    points = profile.breakpoints()
    if cut is None:
        return _quad(integrand, 0.0, HALF_PI, points)
    cut = check_real(cut, "cut", 0.0, HALF_PI)
    return _quad(integrand, 0.0, cut, points) + _quad(integrand, cut, HALF_PI, points)


def ln_inv_sin(theta):
    return -math.log(math.sin(theta))


def check_head_mass(profile, t):
    """Compare CDF(t) with its bound for t in [0, pi/4] (needs N >= 5)."""
    if profile.N < 5:
        raise PreconditionError("the head-mass bound requires N ≥ 5")
    t = check_real(t, "t", 0.0, 0.25 * math.pi)
    N, sigma = profile.N, profile.sigma
    mass = profile.cdf_at(t) if t > 0 else 0.0
    if t == 0.0:
        bound = 0.0
    else:
        # (1/q)(sin(2t)^N / 2 + sin(t)^N / sigma^{N+1}) in log space
        a = N * math.log(math.sin(2 * t)) - math.log(2.0)
        b = N * math.log(math.sin(t)) - (N + 1) * math.log(sigma)
        bound = math.exp(min(0.0, np.logaddexp(a, b) - log_q(sigma)))
    return mass, bound, mass <= bound + CHECK_SLACK


def check_tail_mass(profile, t):
    """Compare 1 - CDF(t) with the Markov-type bound for t in (0, pi/2]."""
    t = check_real(t, "t", 0.0, HALF_PI, low_open=True)
    N, sigma = profile.N, profile.sigma
    mass = 1.0 - profile.cdf_at(t)
    log_b = math.log(2 * math.pi * sigma * math.sqrt(N + 1)) - log_q(sigma) - math.log(t)
    bound = math.exp(min(0.0, log_b))
    return mass, bound, mass <= bound + CHECK_SLACK


def check_log_split(profile, t):
    """Check int_t^{pi/2} ln(1/sin) f <= ln sqrt2 + int_{sin t}^{sqrt2/2} (CDF(asin s) - CDF(t))/s ds."""
    t = check_real(t, "t", 0.0, 0.25 * math.pi)
    points = profile.breakpoints(t, HALF_PI)

    def lhs_integrand(theta):
        return ln_inv_sin(theta) * float(profile._f_cheb(theta))

    lhs = _quad(lhs_integrand, t, HALF_PI, points)
    cdf_t = profile.cdf_at(t) if t > 0 else 0.0
    s_lo, s_hi = math.sin(t), math.sqrt(0.5)

    def rhs_integrand(s):
        return (profile.cdf_at(math.asin(s)) - cdf_t) / s

    rhs = 0.5 * math.log(2.0)
    if s_lo < s_hi:
        rhs += _quad(rhs_integrand, s_lo, s_hi, [math.sin(p) for p in points])
    return lhs, rhs, lhs <= rhs + 1e-6


def log_expectation_bound(N, sigma):
    """(1/N)(1 + ln(2^{N-1} + sigma^{-(N+1)}) - ln(1 - e^{-1/2 sigma^2}))."""
    L = np.logaddexp((N - 1) * math.log(2.0), -(N + 1) * math.log(sigma))
    return (1.0 + L - log_q(sigma)) / N


def check_log_expectation(profile):
    """E_f ln(1/sin theta) against its closed-form bound (needs N >= 5)."""
    if profile.N < 5:
        raise PreconditionError("the log-expectation bound requires N ≥ 5")
    value = expect_under_f(profile, ln_inv_sin, cut=0.25 * math.pi)
    bound = log_expectation_bound(profile.N, profile.sigma)
    return value, bound, value <= bound + 1e-6


def decomposition_rhs(profile, t):
    """Cap-mixture side of the decomposition for F = 1{angle(psi(y), center) <= t}.

    q int min(1, v(min(t, theta))/v(theta)) f(theta) dtheta + (1 - q) v(t)/(Omega_N/2).
    """
    t = check_real(t, "t", 0.0, HALF_PI, low_open=True)
    N = profile.N
    frac_t = half_cap_fraction(N, t)
    head = profile.cdf_at(t)
    if t < HALF_PI:
        def integrand(theta):
            return frac_t / half_cap_fraction(N, theta) * float(profile._f_cheb(theta))
        tail = _quad(integrand, t, HALF_PI, profile.breakpoints(t, HALF_PI))
    else:
        tail = 0.0
    return profile.q * (head + tail) + profile.half_sphere_weight * frac_t


__all__ = [
    "RadialProfile", "build_profile", "check_head_mass", "check_log_expectation",
    "check_log_split", "check_tail_mass", "chebyshev_grid", "decomposition_rhs",
    "eval_G", "eval_G_prime", "eval_f", "expect_under_f", "gamma_coefficient",
    "log_G", "log_abs_G_prime", "log_expectation_bound", "log_q", "ln_inv_sin",
]
