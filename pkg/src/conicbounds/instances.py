"""Concrete conic condition numbers C(x) = ||x|| / d(x, Sigma).

Two families whose ill-posed set lies in a degree-d homogeneous hypersurface:

* :class:`HyperplaneArrangement` -- Sigma is a union of m hyperplanes
  (zero set of a product of m linear forms, so d = m).
* :class:`DeterminantInstance` -- Sigma is the set of singular n x n matrices
  (zero set of det, d = n), with the Frobenius norm on R^{n^2}.

Distances are exact in closed form, so bound validation is free of
distance-solver error. Distances at or below ``CENSOR_TOL`` are reported as
0 and the condition number as ``inf``.
"""
import math

import numpy as np

from ._validation import check_cond_value, check_int, check_point, check_points, check_unit_point
from .exceptions import ConfigError, DomainError

CENSOR_TOL = 1e-300


class ConditionInstance:
    """Base class. Subclasses implement :meth:`_distance` on (n, N+1) arrays."""

    kind = None
    ambient_dim = None  # sphere dimension N; vectors live in R^{N+1}
    degree = None

    @property
    def dim(self):
        return self.ambient_dim + 1

    def _distance(self, X):
        raise NotImplementedError

    def _sin_distance_unit(self, X):
        # generic fallback: ||x|| = 1 so d_sin = d / ||x||
        return self._distance(X)

    def _check(self, X):
        X = check_points(X)
        if X.shape[1] != self.dim:
            raise DomainError(f"expected vectors of length {self.dim}, got {X.shape[1]}")
        return X

    def dist_to_sigma(self, x):
        single = np.ndim(x) == 1
        d = self._distance(self._check(x))
        d = np.where(d <= CENSOR_TOL, 0.0, d)
        return float(d[0]) if single else d

    def cond(self, x):
        single = np.ndim(x) == 1
        X = self._check(x)
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms == 0):
            raise DomainError("the condition number is undefined at x = 0")
        c = _safe_ratio(norms, self._distance(X))
        return float(c[0]) if single else c

    def cond_from_unit(self, x):
        single = np.ndim(x) == 1
        X = self._check(x)
        if np.any(np.abs(np.linalg.norm(X, axis=1) - 1.0) > 1e-12):
            raise DomainError("cond_from_unit needs unit vectors")
        c = _safe_ratio(np.ones(X.shape[0]), self._sin_distance_unit(X))
        return float(c[0]) if single else c

    def ln_cond(self, X):
        """Row-wise ln C(x); ``inf`` marks censored rows."""
        X = self._check(X)
        d = self._distance(X)
        with np.errstate(divide="ignore"):
            out = np.log(np.linalg.norm(X, axis=1)) - np.log(d)
        out[d <= CENSOR_TOL] = np.inf
        return np.maximum(out, 0.0)

    # -- centers with prescribed condition --------------------------------
    def center_on_sigma(self):
        raise NotImplementedError

    def center_at_condition(self, target):
        raise NotImplementedError

    def to_spec(self):
        raise NotImplementedError


def _safe_ratio(num, den):
    den = np.asarray(den, dtype=float)
    out = np.full(den.shape, np.inf)
    ok = den > CENSOR_TOL
    out[ok] = num[ok] / den[ok]
    # C >= 1 holds exactly; clip rounding in the last ulp
    return np.maximum(out, 1.0)


class HyperplaneArrangement(ConditionInstance):
    """Sigma = union of the hyperplanes <a_i, x> = 0 for unit normals a_i."""

    kind = "hyperplanes"

    def __init__(self, normals):
        A = np.atleast_2d(np.asarray(normals, dtype=float))
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 2:
            raise DomainError(f"normals must be an (m, N+1) array, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise DomainError("normals must be finite")
        if np.any(np.abs(np.linalg.norm(A, axis=1) - 1.0) > 1e-12):
            raise DomainError("every normal must have unit norm")
        self.normals = A
        self.normals.setflags(write=False)
        self.ambient_dim = A.shape[1] - 1
        self.degree = A.shape[0]

    @classmethod
    def coordinate(cls, N, degree):
        """Arrangement of the first `degree` coordinate hyperplanes in R^{N+1}."""
        N = check_int(N, "N", minimum=1)
        degree = check_int(degree, "degree", minimum=1)
        if degree > N + 1:
            raise DomainError("degree cannot exceed N + 1 for coordinate hyperplanes")
        return cls(np.eye(N + 1)[:degree])

    def _distance(self, X):
        return np.min(np.abs(X @ self.normals.T), axis=1)

    def _sin_distance_unit(self, X):
        return np.min(np.abs(X @ self.normals.T), axis=1)

    def _well_posed_direction(self):
        # least-norm w with <a_i, w> = 1 for all i, normalized; every
        # hyperplane is then at the same sine distance from w
        w, *_ = np.linalg.lstsq(self.normals, np.ones(self.degree), rcond=None)
        nw = np.linalg.norm(w)
        if nw == 0:
            return self.normals[0].copy()
        return w / nw

    def center_on_sigma(self):
        a = self.normals[0]
        w = self._well_posed_direction()
        p = w - np.dot(w, a) * a
        if np.linalg.norm(p) < 1e-8:
            # w parallel to a: any unit vector orthogonal to a
            e = np.zeros(self.dim)
            e[np.argmin(np.abs(a))] = 1.0
            p = e - np.dot(e, a) * a
        return p / np.linalg.norm(p)

    def center_at_condition(self, target):
        """Unit center with cond(center) equal to `target` (to ~1e-12 relative).

        Moves along the great circle from a well-posed direction w towards a
        point of Sigma and bisects on the sine distance; for a single
        hyperplane this is exactly cos(tau) u + sin(tau) a with sin(tau) = 1/target.
        """
        target = check_cond_value(target, "target")
        if math.isinf(target):
            return self.center_on_sigma()
        w = self._well_posed_direction()
        p = self.center_on_sigma()
        goal = 1.0 / target
        top = float(self._sin_distance_unit(w[None, :])[0])
        if goal > top * (1 + 1e-12):
            raise ConfigError(
                f"cond {target} is below the smallest condition ({1 / top:.6g}) this "
                "construction reaches for the arrangement")
        if self.degree == 1:
            # exact closed form
            a = self.normals[0]
            return math.sqrt(1.0 - goal * goal) * p + goal * a * np.sign(np.dot(w, a))

        def point(s):
            v = (1.0 - s) * w + s * p
            return v / np.linalg.norm(v)

        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._sin_distance_unit(point(mid)[None, :])[0] >= goal:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-17:
                break
        return point(lo)

    def to_spec(self):
        return {"kind": self.kind, "normals": self.normals.tolist()}


class DeterminantInstance(ConditionInstance):
    """Sigma = singular n x n matrices; x is the row-major flattening of A.

    C(A) = ||A||_F / sigma_min(A) (Eckart-Young in the Frobenius metric).
    """

    kind = "determinant"

    def __init__(self, n):
        self.n = check_int(n, "n", minimum=2)
        self.ambient_dim = self.n * self.n - 1
        self.degree = self.n

    def _distance(self, X):
        mats = X.reshape(-1, self.n, self.n)
        return np.linalg.svd(mats, compute_uv=False)[:, -1]

    def center_on_sigma(self):
        d = np.ones(self.n)
        d[-1] = 0.0
        return np.diag(d).ravel() / math.sqrt(self.n - 1)

    def center_at_condition(self, target):
        """diag(1, ..., 1, s) normalized, with s chosen so that the condition is `target`."""
        target = check_cond_value(target, "target")
        if math.isinf(target):
            return self.center_on_sigma()
        if target < math.sqrt(self.n) * (1 - 1e-12):
            raise ConfigError(f"cond {target} is below sqrt(n) = {math.sqrt(self.n):.6g}, "
                              "the minimum over n x n matrices")
        s = math.sqrt((self.n - 1) / max(target * target - 1.0, 1e-300))
        s = min(s, 1.0)
        d = np.ones(self.n)
        d[-1] = s
        A = np.diag(d).ravel()
        return A / np.linalg.norm(A)

    def to_spec(self):
        return {"kind": self.kind, "n": self.n}


def dist_to_sigma(instance, x):
    return instance.dist_to_sigma(check_point(x))


def cond(instance, x):
    return instance.cond(check_point(x, nonzero=True))


def cond_from_unit(instance, x):
    return instance.cond_from_unit(check_unit_point(x, "x"))


def instance_from_spec(spec):
    """Build an instance from a config mapping (``kind`` plus parameters)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("instance spec needs a 'kind' field")
    kind = spec["kind"]
    try:
        if kind == "hyperplanes":
            if "normals" in spec:
                return HyperplaneArrangement(spec["normals"])
            return HyperplaneArrangement.coordinate(spec["N"], spec["degree"])
        if kind == "determinant":
            return DeterminantInstance(spec["n"])
    except KeyError as exc:
        raise ConfigError(f"instance kind {kind!r} is missing field {exc}") from None
    except DomainError as exc:
        raise ConfigError(f"invalid instance: {exc}") from None
    raise ConfigError(f"unknown instance kind {kind!r}")
