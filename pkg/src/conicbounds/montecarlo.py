"""Monte Carlo estimates of E ln C(x) and statistical checks against the bounds.

Work is split across ``workers`` units; unit ``i`` draws from the child
stream ``rng.spawn(i)`` in fixed-size batches, and the per-unit
(count, mean, M2) accumulators are merged in unit order. Results therefore
depend on (seed, stream, workers) only, not on scheduling.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import bounds as _bounds
from ._validation import check_int, check_real
from .exceptions import ConfigError, DomainError, NumericalError, PreconditionError
from .geometry import HALF_PI, CapSpec, psi_batch
from .instances import CENSOR_TOL
from .radial import build_profile, decomposition_rhs
from .samplers import (GaussianSpec, PointMass, SinBallSpec, as_rng, sample_gaussian,
                       sample_measure, sample_uniform_cap)

SIGMA_RULE = 3.0
MAX_CENSORED_FRACTION = 1e-4
BATCH = 1 << 16
RHS_SLACK = 1e-9


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int
    censored: int = 0
    p99: float = math.nan

    @property
    def reliable(self):
        total = self.n + self.censored
        return total > 0 and self.censored / total <= MAX_CENSORED_FRACTION


class _Accumulator:
    """Associative (count, mean, M2) accumulator (Chan et al. pairwise update)."""

    def __init__(self, count=0, mean=0.0, m2=0.0):
        self.count, self.mean, self.m2 = count, mean, m2

    @classmethod
    def of(cls, values):
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(values.size, mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other):
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return _Accumulator(n, mean, m2)

    @property
    def stderr(self):
        if self.count < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.count - 1) / self.count)


def _split(n, workers):
    base, extra = divmod(n, workers)
    return [base + (i < extra) for i in range(workers)]


def _run_units(fn, n, rng, workers):
    """Call fn(count, child_rng) for each unit; returns results in unit order."""
    workers = check_int(workers, "workers", minimum=1)
    counts = _split(n, workers)
    children = [rng.spawn(i) for i in range(workers)]
    if workers == 1:
        return [fn(counts[0], children[0])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, counts, children))


def mc_mean(sample_values, n, rng, workers=1):
    """Generic estimator: `sample_values(count, rng)` returns a 1-D array of draws.

    Non-finite draws are counted as censored and excluded.
    """
    n = check_int(n, "n", minimum=1)
    rng = as_rng(rng)

    def unit(count, child):
        acc, censored, kept = _Accumulator(), 0, []
        done = 0
        while done < count:
            m = min(BATCH, count - done)
            vals = np.asarray(sample_values(m, child), dtype=float)
            ok = np.isfinite(vals)
            censored += int(m - ok.sum())
            acc = acc.merge(_Accumulator.of(vals[ok]))
            kept.append(vals[ok])
            done += m
        return acc, censored, kept

    acc, censored, kept = _Accumulator(), 0, []
    for a, c, k in _run_units(unit, n, rng, workers):
        acc = acc.merge(a)
        censored += c
        kept.extend(k)
    if acc.count == 0:
        raise NumericalError("every sample was censored")
    p99 = float(np.percentile(np.concatenate(kept), 99))
    return Estimate(acc.mean, acc.stderr, acc.count, censored, p99)


def estimate_ln_cond(instance, measure, n, rng, workers=1):
    """Sample mean and standard error of ln C(x) under `measure`.

    `measure` is a CapSpec, SinBallSpec, GaussianSpec or PointMass; a
    Gaussian with sigma = 0 is not constructible, use PointMass.
    """
    n = check_int(n, "n", minimum=1)
    if n < 100:
        raise DomainError("n must be at least 100")
    if isinstance(measure, PointMass):
        value = float(instance.ln_cond(measure.center)[0])
        if not math.isfinite(value):
            raise NumericalError("the point mass sits on Sigma: ln C is infinite")
        return Estimate(value, 0.0, n, 0, value)
    if measure.center.shape[0] != instance.dim:
        raise ConfigError("measure and instance dimensions differ")

    def draw(m, child):
        return instance.ln_cond(sample_measure(measure, child, m))

    return mc_mean(draw, n, rng, workers)


def measure_descriptor(measure):
    """(kind, nu) for a measure: nu is theta, rho or sigma."""
    if isinstance(measure, CapSpec):
        return "uniform_cap", measure.theta
    if isinstance(measure, SinBallSpec):
        return "sin_ball", measure.rho
    if isinstance(measure, GaussianSpec):
        return "gaussian", measure.sigma
    if isinstance(measure, PointMass):
        return "point_mass", 0.0
    raise TypeError(f"unsupported measure {type(measure).__name__}")


@dataclass(frozen=True)
class ValidationRow:
    instance_id: str
    measure_kind: str
    nu: float
    center_id: str
    cond_center: float
    mean: float
    stderr: float
    n: int
    censored: int
    p99: float
    bound_name: str
    bound_value: float
    margin: float
    verdict: str

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    def as_dict(self):
        return asdict(self)


def verdict_for(estimate, bound_value):
    if estimate.mean - SIGMA_RULE * estimate.stderr > bound_value:
        return "violation"
    if not estimate.reliable:
        return "unreliable"
    return "pass"


def bound_for_measure(instance, bound_name, measure, cond_center):
    """Evaluate `bound_name` with the parameters implied by `measure`."""
    if bound_name not in _bounds.MEASURE_BOUNDS:
        raise ConfigError(f"{bound_name!r} is not a bound on E ln C; choose from "
                          f"{sorted(_bounds.MEASURE_BOUNDS)}")
    kind, nu = measure_descriptor(measure)
    wanted = _bounds.MEASURE_BOUNDS[bound_name]
    if kind == "sin_ball" and wanted == "uniform_cap":
        nu = math.asin(nu)
    elif kind == "point_mass":
        nu = 0.0
    elif kind != wanted:
        raise ConfigError(f"bound {bound_name!r} needs a {wanted} measure, got {kind}")
    params = {"N": instance.ambient_dim, "d": instance.degree, "cond_center": cond_center,
              "theta" if wanted == "uniform_cap" else "sigma": nu}
    try:
        if kind == "point_mass" and wanted == "uniform_cap":
            # theta -> 0 limits: phi(0) = 1 and the small-rho branch
            if bound_name == "local_uniform":
                return math.log(cond_center) + _bounds.LN12 + 2.0
            if bound_name == "local_uniform_cases":
                return math.log(cond_center) + math.log(4.0)
            return math.inf
        return _bounds.evaluate(bound_name, **params)
    except PreconditionError as exc:
        raise ConfigError(str(exc)) from None


def validate_bound(instance, center, measure, bound_name, n, rng, workers=1,
                   instance_id="instance", center_id="center", bound_offset=0.0):
    """Estimate E ln C under `measure` and compare with the named bound (3-sigma rule).

    `bound_offset` shifts the bound value; a negative offset plants a
    violation for harness self-tests.
    """
    cond_center = float(instance.cond(center))
    bound_value = bound_for_measure(instance, bound_name, measure, cond_center) + bound_offset
    est = estimate_ln_cond(instance, measure, n, rng, workers)
    kind, nu = measure_descriptor(measure)
    return ValidationRow(
        instance_id=instance_id, measure_kind=kind, nu=float(nu), center_id=center_id,
        cond_center=cond_center, mean=est.mean, stderr=est.stderr, n=est.n,
        censored=est.censored, p99=est.p99, bound_name=bound_name,
        bound_value=float(bound_value), margin=float(bound_value - est.mean),
        verdict=verdict_for(est, bound_value))


def make_measure(kind, center, nu):
    if kind == "uniform_cap":
        return CapSpec(center, nu) if nu > 0 else PointMass(center)
    if kind == "gaussian":
        return GaussianSpec(center, nu) if nu > 0 else PointMass(center)
    if kind == "sin_ball":
        return SinBallSpec(center, nu)
    if kind == "point_mass":
        return PointMass(center)
    raise ConfigError(f"unknown measure kind {kind!r}")


def sweep(instance, center, nu_grid, bound_name, n, rng, workers=1, measure_kind=None,
          instance_id="instance", center_id="center", bound_offset=0.0):
    """One ValidationRow per grid value (theta or sigma), in grid order.

    Grid point i draws from ``rng.spawn(i)``.
    """
    nu_grid = list(nu_grid)
    if not nu_grid:
        raise DomainError("nu_grid must be nonempty")
    if measure_kind is None:
        measure_kind = _bounds.MEASURE_BOUNDS.get(bound_name)
        if measure_kind is None:
            raise ConfigError(f"cannot infer a measure for bound {bound_name!r}")
    rng = as_rng(rng)
    rows = []
    for i, nu in enumerate(nu_grid):
        measure = make_measure(measure_kind, center, float(nu))
        rows.append(validate_bound(instance, center, measure, bound_name, n, rng.spawn(i),
                                   workers, instance_id, center_id, bound_offset))
    return rows


def _unit_center(N):
    e = np.zeros(N + 1)
    e[0] = 1.0
    return e


def decomposition_mc_check(N, sigma, t, n, rng, workers=1, profile=None):
    """Monte Carlo P(angle(psi(y), center) <= t) against the radial decomposition.

    Returns ``(lhs_estimate, rhs, ok)`` with ok iff |lhs - rhs| <= 3 stderr
    (plus RHS_SLACK for the quadrature side).
    """
    N = check_int(N, "N", minimum=2)
    sigma = check_real(sigma, "sigma", low=0.0, low_open=True)
    t = check_real(t, "t", 0.0, HALF_PI, low_open=True)
    center = _unit_center(N)
    spec = GaussianSpec(center, sigma)
    cos_t = math.cos(t)

    def draw(m, child):
        Y = sample_gaussian(spec, child, m)
        P, ok = psi_batch(Y, center)
        hit = (P @ center >= cos_t).astype(float)
        hit[~ok] = np.nan
        return hit

    lhs = mc_mean(draw, n, as_rng(rng), workers)
    if profile is None:
        profile = build_profile(N, sigma)
    rhs = decomposition_rhs(profile, t)
    # the slack covers quadrature error when the indicator is constant (stderr = 0)
    return lhs, rhs, abs(lhs.mean - rhs) <= SIGMA_RULE * lhs.stderr + RHS_SLACK


def proof_step_suite(N, sigma, theta, n, rng, workers=1):
    """Check the two expectation inequalities behind the tail-mass bound.

    * E_{x in B_S(center, theta)} ||x - center|| >= (sqrt2 / 2pi) theta  (N >= 6)
    * E_{y ~ N(center, sigma^2)} ||psi(y) - center|| <= sqrt2 sigma sqrt(N+1)
    """
    N = check_int(N, "N", minimum=1)
    if N < 6:
        raise PreconditionError("the cap-distance inequality requires N ≥ 6")
    sigma = check_real(sigma, "sigma", low=0.0, low_open=True)
    theta = check_real(theta, "theta", 0.0, HALF_PI, low_open=True)
    rng = as_rng(rng)
    center = _unit_center(N)
    cap = CapSpec(center, theta)

    def cap_draw(m, child):
        X = sample_uniform_cap(cap, child, m)
        return np.linalg.norm(X - center, axis=1)

    def psi_draw(m, child):
        P, ok = psi_batch(sample_gaussian(GaussianSpec(center, sigma), child, m), center)
        d = np.linalg.norm(P - center, axis=1)
        d[~ok] = np.nan
        return d

    cap_est = mc_mean(cap_draw, n, rng.spawn(0), workers)
    psi_est = mc_mean(psi_draw, n, rng.spawn(1), workers)
    cap_bound = math.sqrt(2.0) / (2.0 * math.pi) * theta
    psi_bound = math.sqrt(2.0) * sigma * math.sqrt(N + 1)
    return {
        "cap_distance": {"estimate": cap_est, "bound": cap_bound,
                         "ok": cap_est.mean + SIGMA_RULE * cap_est.stderr >= cap_bound},
        "psi_distance": {"estimate": psi_est, "bound": psi_bound,
                         "ok": psi_est.mean - SIGMA_RULE * psi_est.stderr <= psi_bound},
    }


__all__ = [
    "Estimate", "ValidationRow", "CENSOR_TOL", "decomposition_mc_check", "estimate_ln_cond",
    "make_measure", "mc_mean", "measure_descriptor", "proof_step_suite", "sweep",
    "validate_bound", "verdict_for",
]
