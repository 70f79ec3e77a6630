"""Seeded samplers for the three measures: Gaussian, uniform cap, uniform sine-ball.

Every sampler takes an :class:`RngHandle` and an optional ``size``; with
``size=None`` one point of shape ``(N+1,)`` is returned, otherwise an array
of shape ``(size, N+1)``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._validation import check_int, check_real, check_unit_point
from .exceptions import DomainError
from .geometry import HALF_PI, CapSpec, half_cap_density, half_cap_fraction

_NEWTON_STEPS = 4


class RngHandle:
    """A (seed, stream) pair owning one numpy Generator.

    Identical (seed, stream) pairs reproduce identical sequences; distinct
    streams come from distinct SeedSequence spawn keys and are independent.
    """

    def __init__(self, seed=0, stream=0, _key=None):
        self.seed = int(seed)
        self.stream = int(stream)
        if not (0 <= self.seed < 2**64 and 0 <= self.stream < 2**64):
            raise DomainError("seed and stream must be 64-bit unsigned integers")
        self._key = tuple(_key) if _key is not None else (self.stream,)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self._key)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def spawn(self, index):
        """Independent child handle, deterministic in (seed, stream, index)."""
        return RngHandle(self.seed, self.stream, _key=self._key + (int(index),))

    def __repr__(self):
        return f"RngHandle(seed={self.seed}, stream={self.stream}, key={self._key})"


def as_rng(rng):
    if isinstance(rng, RngHandle):
        return rng
    if rng is None:
        return RngHandle()
    if isinstance(rng, (int, np.integer)):
        return RngHandle(int(rng))
    raise TypeError(f"expected an RngHandle or an integer seed, got {type(rng).__name__}")


@dataclass(frozen=True)
class GaussianSpec:
    """Isotropic Gaussian N(center, sigma^2 Id) on R^{N+1}."""

    center: np.ndarray
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "center", check_unit_point(self.center))
        object.__setattr__(self, "sigma", check_real(self.sigma, "sigma", low=0.0, low_open=True))

    @property
    def N(self):
        return self.center.shape[0] - 1


@dataclass(frozen=True)
class SinBallSpec:
    """Uniform measure on B_sin(center, rho) = B_S(center, theta) U B_S(-center, theta)."""

    center: np.ndarray
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "center", check_unit_point(self.center))
        object.__setattr__(self, "rho", check_real(self.rho, "rho", 0.0, 1.0, low_open=True))

    @property
    def N(self):
        return self.center.shape[0] - 1


@dataclass(frozen=True)
class PointMass:
    """Dirac mass at the center (the sigma = 0 / theta = 0 limit)."""

    center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", check_unit_point(self.center))

    @property
    def N(self):
        return self.center.shape[0] - 1


def _shape(size):
    return 1 if size is None else check_int(size, "size", minimum=0)


def _squeeze(X, size):
    return X[0] if size is None else X


def sample_gaussian(spec, rng, size=None):
    rng = as_rng(rng)
    n = _shape(size)
    Z = rng.generator.standard_normal((n, spec.center.shape[0]))
    return _squeeze(spec.center + spec.sigma * Z, size)


def sample_uniform_sphere(N, rng, size=None):
    N = check_int(N, "N", minimum=1)
    rng = as_rng(rng)
    n = _shape(size)
    Z = rng.generator.standard_normal((n, N + 1))
    return _squeeze(Z / np.linalg.norm(Z, axis=1, keepdims=True), size)


def cap_angle_quantile(N, theta, u):
    """Inverse CDF of the angle to the center under the uniform cap measure.

    The angle has density proportional to sin^(N-1) on [0, theta]. The
    closed-form incomplete-beta inverse gives a starting point that is then
    polished by safeguarded Newton steps on the exact CDF, so the result is
    accurate near pi/2 where the sin^2 parametrization loses resolution.
    """
    u = np.asarray(u, dtype=float)
    total = half_cap_fraction(N, theta)
    target = u * total
    a, b = 0.5 * N, 0.5
    with np.errstate(invalid="ignore"):
        s2 = special.betaincinv(a, b, np.clip(target, 0.0, 1.0))
    alpha = np.arcsin(np.sqrt(np.clip(s2, 0.0, 1.0)))
    alpha = np.clip(np.nan_to_num(alpha, nan=0.5 * theta), 0.0, theta)
    for _ in range(_NEWTON_STEPS):
        dens = half_cap_density(N, alpha)
        resid = half_cap_fraction(N, alpha) - target
        step = np.where(dens > 0, resid / np.where(dens > 0, dens, 1.0), 0.0)
        alpha = np.clip(alpha - step, 0.0, theta)
    return alpha


def _orthogonal_directions(center, n, gen):
    Z = gen.standard_normal((n, center.shape[0]))
    Z -= np.outer(Z @ center, center)
    norms = np.linalg.norm(Z, axis=1, keepdims=True)
    # a zero row has probability zero; redraw to keep the law exact
    bad = norms[:, 0] == 0
    while np.any(bad):
        W = gen.standard_normal((int(bad.sum()), center.shape[0]))
        W -= np.outer(W @ center, center)
        Z[bad] = W
        norms = np.linalg.norm(Z, axis=1, keepdims=True)
        bad = norms[:, 0] == 0
    return Z / norms


def sample_uniform_cap(cap, rng, size=None):
    """Uniform point(s) on the cap B_S(center, theta), 0 < theta <= pi/2."""
    if not isinstance(cap, CapSpec):
        raise TypeError("cap must be a CapSpec")
    n = _shape(size)
    if cap.theta == 0.0:
        return _squeeze(np.tile(cap.center, (n, 1)), size)
    if cap.theta > HALF_PI:
        raise DomainError("sample_uniform_cap supports theta in (0, pi/2]")
    rng = as_rng(rng)
    gen = rng.generator
    u = gen.random(n)
    alpha = cap_angle_quantile(cap.N, cap.theta, u)
    V = _orthogonal_directions(cap.center, n, gen)
    X = np.cos(alpha)[:, None] * cap.center + np.sin(alpha)[:, None] * V
    return _squeeze(X, size)


def sample_sin_ball(center, rho, rng, size=None):
    """Uniform on B_sin(center, rho): a cap sample negated with probability 1/2."""
    spec = SinBallSpec(center, rho)
    rng = as_rng(rng)
    n = _shape(size)
    X = sample_uniform_cap(CapSpec(spec.center, math.asin(spec.rho)), rng, n)
    flip = rng.generator.random(n) < 0.5
    X[flip] *= -1.0
    return _squeeze(X, size)


def sample_measure(measure, rng, size):
    """Dispatch on the measure type; always returns a 2-D batch."""
    if isinstance(measure, GaussianSpec):
        return sample_gaussian(measure, rng, size)
    if isinstance(measure, CapSpec):
        return sample_uniform_cap(measure, rng, size)
    if isinstance(measure, SinBallSpec):
        return sample_sin_ball(measure.center, measure.rho, rng, size)
    if isinstance(measure, PointMass):
        return np.tile(measure.center, (size, 1))
    raise TypeError(f"unsupported measure {type(measure).__name__}")
