"""Lorentzian linear algebra on R^{n,1} and the hyperboloid model of H^n.

Vectors are plain numpy arrays with the ``n`` spatial components first and the
time component last; the metric is ``diag(+1, ..., +1, -1)``.  Hyperbolic
space of sectional curvature ``-k^2`` is the upper sheet ``<X, X> = -1/k^2``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AmbientSpace:
    n: int = 3
    k: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"dimension n must be an integer >= 3, got {self.n}")
        if not self.k > 0:
            raise ValueError(f"curvature scale k must be positive, got {self.k}")

    @property
    def dim(self) -> int:
        """Number of components of a vector in R^{n,1}."""
        return self.n + 1


class CausalClass(enum.Enum):
    FUTURE_TIMELIKE = "FutureTimelike"
    FUTURE_NULL = "FutureNull"
    PAST_TIMELIKE = "PastTimelike"
    PAST_NULL = "PastNull"
    SPACELIKE = "Spacelike"
    ZERO = "Zero"

    def reflected(self) -> "CausalClass":
        """Class of ``-x`` given the class of ``x``."""
        return _TIME_REFLECTION[self]

    @property
    def future_causal(self) -> bool:
        return self in (CausalClass.FUTURE_TIMELIKE, CausalClass.FUTURE_NULL)

    @property
    def past_causal(self) -> bool:
        return self in (CausalClass.PAST_TIMELIKE, CausalClass.PAST_NULL)


_TIME_REFLECTION = {
    CausalClass.FUTURE_TIMELIKE: CausalClass.PAST_TIMELIKE,
    CausalClass.PAST_TIMELIKE: CausalClass.FUTURE_TIMELIKE,
    CausalClass.FUTURE_NULL: CausalClass.PAST_NULL,
    CausalClass.PAST_NULL: CausalClass.FUTURE_NULL,
    CausalClass.SPACELIKE: CausalClass.SPACELIKE,
    CausalClass.ZERO: CausalClass.ZERO,
}


@dataclass(frozen=True)
class Classification:
    cls: CausalClass
    eps: float


def lorentz_inner(x, y) -> np.ndarray:
    """Minkowski product over the last axis; broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    if x.shape[-1] < 2:
        raise ValueError("a Lorentz vector needs at least one spatial component")
    out = np.sum(x[..., :-1] * y[..., :-1], axis=-1) - x[..., -1] * y[..., -1]
    return out[()] if np.ndim(out) == 0 else out


def classify_causal(x, eps: float = 1e-12) -> Classification:
    if eps < 0:
        raise ValueError("eps must be non-negative")
    x = np.asarray(x, dtype=float)
    q = float(lorentz_inner(x, x))
    norm2 = float(np.dot(x, x))
    tol = eps * norm2
    future = x[-1] > 0
    if abs(q) <= tol and np.sqrt(norm2) <= eps:
        cls = CausalClass.ZERO
    elif q < -tol:
        cls = CausalClass.FUTURE_TIMELIKE if future else CausalClass.PAST_TIMELIKE
    elif abs(q) <= tol:
        cls = CausalClass.FUTURE_NULL if future else CausalClass.PAST_NULL
    else:
        cls = CausalClass.SPACELIKE
    return Classification(cls, eps)


def causal_labels(X, eps: float = 1e-12) -> np.ndarray:
    """Vectorised ``classify_causal`` over the leading axes; returns class names."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    X = np.asarray(X, dtype=float)
    q = lorentz_inner(X, X)
    norm2 = np.sum(X * X, axis=-1)
    tol = eps * norm2
    future = X[..., -1] > 0
    small = np.abs(q) <= tol
    conds = [small & (np.sqrt(norm2) <= eps), (q < -tol) & future, q < -tol,
             small & future, small]
    names = [c.value for c in (CausalClass.ZERO, CausalClass.FUTURE_TIMELIKE,
                               CausalClass.PAST_TIMELIKE, CausalClass.FUTURE_NULL,
                               CausalClass.PAST_NULL)]
    return np.select(conds, names, default=CausalClass.SPACELIKE.value)


def hyperboloid_point(amb: AmbientSpace, unit_dir, r: float) -> np.ndarray:
    """Point at geodesic distance ``r`` from the vertex in direction ``unit_dir``."""
    d = np.asarray(unit_dir, dtype=float)
    if d.shape != (amb.n,):
        raise ValueError(f"direction must have {amb.n} components")
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError("direction is not a unit vector")
    if r < 0:
        raise ValueError("geodesic radius must be non-negative")
    k = amb.k
    return np.append(np.sinh(k * r) / k * d, np.cosh(k * r) / k)


def is_future_null(zeta, rtol: float = 1e-10) -> bool:
    zeta = np.asarray(zeta, dtype=float)
    return zeta[-1] > 0 and abs(lorentz_inner(zeta, zeta)) <= rtol * float(np.dot(zeta, zeta))


def spinor_weight(amb: AmbientSpace, X, zeta, rtol: float = 1e-9) -> float:
    """Norm squared of the Killing spinor attached to a future null ``zeta``.

    Equals ``-2k <X, zeta>``, which is positive on the hyperboloid.
    """
    X = np.asarray(X, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if not is_future_null(zeta):
        raise ValueError("zeta must be a future-directed null vector")
    k = amb.k
    q = float(lorentz_inner(X, X))
    if X[-1] <= 0 or abs(q * k * k + 1.0) > rtol * max(1.0, float(np.dot(X, X)) * k * k):
        raise ValueError("X is not on the upper hyperboloid <X,X> = -1/k^2")
    return -2.0 * k * float(lorentz_inner(X, zeta))


def null_vector(direction) -> np.ndarray:
    """Future null vector ``(d/|d|; 1)``."""
    d = np.asarray(direction, dtype=float)
    return np.append(d / np.linalg.norm(d), 1.0)


def zeta_set(n: int, seed: int = 0, n_random: int = 8) -> np.ndarray:
    """Axis null vectors ``(+-e_i; 1)`` followed by seeded random null directions."""
    rows = []
    for i in range(n):
        for sign in (1.0, -1.0):
            e = np.zeros(n)
            e[i] = sign
            rows.append(null_vector(e))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        rows.append(null_vector(rng.standard_normal(n)))
    return np.array(rows)
