"""Input validation helpers."""
import math
import numbers

import numpy as np

from .exceptions import DomainError

UNIT_NORM_TOL = 1e-12


def check_int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, numbers.Real) and float(value).is_integer():
            value = int(value)
        else:
            raise DomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_real(value, name, low=None, high=None, low_open=False, high_open=False,
               allow_inf=False):
    """Coerce `value` to float and check it lies in the given interval."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {value!r}") from None
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise DomainError(f"{name} must be finite, got {value}")
    if low is not None and (value < low or (low_open and value == low)):
        raise DomainError(f"{name}={value} below its domain {'(' if low_open else '['}{low}, ...")
    if high is not None and (value > high or (high_open and value == high)):
        raise DomainError(f"{name}={value} above its domain ..., {high}{')' if high_open else ']'}")
    return value


def check_cond_value(value, name="cond_center"):
    """Condition values live in [1, inf]."""
    value = check_real(value, name, low=1.0, allow_inf=True)
    return value


def check_point(x, name="x", nonzero=False):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DomainError(f"{name} must be a vector of length >= 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} has non-finite entries")
    if nonzero and not np.any(x):
        raise DomainError(f"{name} must be nonzero")
    return x


def check_unit_point(x, name="center"):
    x = check_point(x, name)
    if abs(np.linalg.norm(x) - 1.0) > UNIT_NORM_TOL:
        raise DomainError(f"{name} must have unit norm, got {np.linalg.norm(x)!r}")
    return x


def check_points(X, name="X"):
    """Accept a single point or an (n, N+1) batch; always return 2-D."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] < 2:
        raise DomainError(f"{name} must be (n, N+1) with N >= 1, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError(f"{name} has non-finite entries")
    return X
