"""Tridiagonal operators on the polar cell grid and the semi-implicit stepper.

Every parabolic equation in the construction has the shape

    du/dtau = c(u) * L u + B u + f(u)

with ``L`` the finite-volume Laplace-Beltrami operator of the current slice,
``B`` a (possibly zero) linear advection/reaction part and ``f`` an explicit
reaction.  The stepper solves for increments, so any state with ``L u = 0``,
``B u = 0`` and ``f(u) = 0`` is reproduced bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Band:
    """Tridiagonal matrix; ``lower[j]`` multiplies ``u[j-1]``, ``upper[j]`` multiplies ``u[j+1]``."""
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    @classmethod
    def zeros(cls, N: int) -> "Band":
        return cls(np.zeros(N), np.zeros(N), np.zeros(N))

    @classmethod
    def diagonal(cls, d) -> "Band":
        d = np.asarray(d, dtype=float)
        return cls(np.zeros_like(d), d, np.zeros_like(d))

    def __matmul__(self, u):
        u = np.asarray(u, dtype=float)
        out = self.diag.reshape((-1,) + (1,) * (u.ndim - 1)) * u
        lo = self.lower.reshape((-1,) + (1,) * (u.ndim - 1))
        up = self.upper.reshape((-1,) + (1,) * (u.ndim - 1))
        out[1:] += lo[1:] * u[:-1]
        out[:-1] += up[:-1] * u[1:]
        return out

    def __add__(self, other: "Band") -> "Band":
        return Band(self.lower + other.lower, self.diag + other.diag, self.upper + other.upper)

    def __sub__(self, other: "Band") -> "Band":
        return Band(self.lower - other.lower, self.diag - other.diag, self.upper - other.upper)

    def scale_rows(self, c) -> "Band":
        c = np.asarray(c, dtype=float)
        return Band(c * self.lower, c * self.diag, c * self.upper)

    def __mul__(self, scalar: float) -> "Band":
        return Band(scalar * self.lower, scalar * self.diag, scalar * self.upper)

    __rmul__ = __mul__

    def identity_minus(self, dt: float) -> np.ndarray:
        """Banded storage of ``I - dt * self`` for ``scipy.linalg.solve_banded``."""
        N = self.diag.size
        ab = np.zeros((3, N))
        ab[0, 1:] = -dt * self.upper[:-1]
        ab[1] = 1.0 - dt * self.diag
        ab[2, :-1] = -dt * self.lower[1:]
        return ab

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower[1:], -1) + np.diag(self.upper[:-1], 1)


def laplacian_band(face_coef: np.ndarray, vol: np.ndarray, h: float) -> Band:
    """Flux-form Laplace-Beltrami operator with zero flux through the poles."""
    N = vol.size
    up = np.zeros(N)
    lo = np.zeros(N)
    up[:-1] = face_coef / (h * vol[:-1])
    lo[1:] = face_coef / (h * vol[1:])
    return Band(lo, -(up + lo), up)


def advection_band(velocity: np.ndarray, h: float, odd: bool = False) -> Band:
    """``velocity * d/dtheta`` with centred differences and reflection ghosts."""
    N = velocity.size
    sign = -1.0 if odd else 1.0
    up = np.zeros(N)
    lo = np.zeros(N)
    d = np.zeros(N)
    up[:-1] = 1.0 / (2 * h)
    lo[1:] = -1.0 / (2 * h)
    d[0] = -sign / (2 * h)
    d[-1] = sign / (2 * h)
    return Band(lo, d, up).scale_rows(velocity)


def _solve(A: Band, dt: float, rhs: np.ndarray, tol: float) -> np.ndarray:
    ab = A.identity_minus(dt)
    if not (np.all(np.isfinite(ab)) and np.all(np.isfinite(rhs))):
        raise SolverError("non-finite coefficients in the implicit solve")
    delta = solve_banded((1, 1), ab, rhs)
    if not np.all(np.isfinite(delta)):
        raise SolverError("non-finite increment in the implicit solve")
    if tol is not None:
        resid = delta - dt * (A @ delta) - rhs
        scale = max(1.0, float(np.max(np.abs(rhs))))
        if float(np.max(np.abs(resid))) > tol * scale:
            raise SolverError(f"implicit solve residual {np.max(np.abs(resid)):.3e} above tolerance")
    return delta


def quasilinear_step(u, dt, L0: Band, L1: Band, B0: Band, B1: Band, coef, reaction,
                     tol: float | None = 1e-10):
    """One second-order step of ``u' = c(u) L u + B u + f(u)``.

    ``coef(u, side)`` and ``reaction(u, side)`` are evaluated at the start
    (``side=0``) or end (``side=1``) of the step.  A backward-Euler predictor
    supplies the end-of-step coefficient, which is then frozen in a
    trapezoidal corrector.
    """
    c0 = coef(u, 0)
    f0 = reaction(u, 0)
    A0 = L0.scale_rows(c0) + B0
    Ap = L1.scale_rows(c0) + B1
    u_pred = u + _solve(Ap, dt, dt * (Ap @ u + f0), tol)
    A1 = L1.scale_rows(coef(u_pred, 1)) + B1
    rhs = 0.5 * dt * (A0 @ u + A1 @ u + f0 + reaction(u_pred, 1))
    return u + _solve(A1, 0.5 * dt, rhs, tol)


def linear_step(U, dt, A0: Band, A1: Band, tol: float | None = 1e-10):
    """Trapezoidal step of the linear system ``U' = A U`` (columns solved together)."""
    rhs = 0.5 * dt * (A0 @ U + A1 @ U)
    return U + _solve(A1, 0.5 * dt, rhs, tol)
