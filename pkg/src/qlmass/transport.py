"""Backward transport of the Lorentz-vector weight W.

Both the exterior equation

    (H_rho / v) dW/drho = -Lap W + (n-1) k^2 W

and the interior collar equation

    -(H1 / (u eta)) dW/dt = Lap W - (n-1) k^2 W

are backward parabolic in their foliation parameter, so they are integrated
from the outer end inwards with a trapezoidal scheme.  The Laplacian acts on
each Lorentz component as a scalar; in the axial frame the perpendicular
component is a first azimuthal harmonic and picks up ``-(n-2)/P^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exterior import ExteriorFoliation
from .icf import CollarFoliation, Foliation
from .lapse import LapseField
from .minkowski import lorentz_inner
from .parabolic import Band, advection_band, laplacian_band, linear_step

EPS_CAUSAL = 1e-8


class CausalViolation(RuntimeError):
    pass


@dataclass
class TransportField:
    """W in the axial frame ``(perp, z, t)`` per (slice, cell)."""
    times: np.ndarray
    W: np.ndarray
    terminal: np.ndarray

    @property
    def causal_margin(self) -> float:
        return causal_margin(self.W)


def causal_margin(W) -> float:
    W = np.asarray(W)
    n2 = np.sum(W ** 2, axis=-1)
    q = lorentz_inner(W, W)
    live = n2 > 0
    if not np.any(live):
        return 0.0
    return float(np.min(-q[live] / n2[live]))


def past_causal_mask(W, eps: float = EPS_CAUSAL) -> np.ndarray:
    """Pointwise past-directed non-spacelike test (zero vectors pass)."""
    W = np.asarray(W)
    n2 = np.sum(W ** 2, axis=-1)
    q = lorentz_inner(W, W)
    return (n2 == 0) | ((W[..., -1] < 0) & (q <= eps * n2))


def min_null_pairing(W, zeta) -> np.ndarray:
    """Minimum over azimuth of ``W . zeta`` for a full-dimensional ``zeta``."""
    W = np.asarray(W)
    zeta = np.asarray(zeta, dtype=float)
    perp = np.linalg.norm(zeta[:-2])
    return -np.abs(W[..., 0]) * perp + W[..., 1] * zeta[-2] - W[..., 2] * zeta[-1]


def transport(fol: Foliation, weight: np.ndarray, terminal, advect: bool = True,
              shift: float = 0.0, tol: float | None = 1e-10) -> np.ndarray:
    """Integrate ``dW/dtau = weight (Lap W - (n-1)k^2 W) + drift dW/dtheta`` from the last slice down.

    ``terminal`` has shape ``(N, 3)`` or ``(N, 3, K)`` for K independent
    profiles solved together.  ``shift`` rescales the unknown by
    ``exp(shift * tau)`` during the solve; it removes the bulk exponential
    decay without changing the solution.
    """
    n, k = fol.amb.n, fol.amb.k
    m = n - 2
    h = fol.h
    terminal = np.asarray(terminal, dtype=float)
    if terminal.shape[:2] != (fol.N, 3) or terminal.ndim not in (2, 3):
        raise ValueError("terminal data must be axial-frame vectors per cell")
    N = fol.N

    def ops(i):
        g = fol.slices[i]
        lap = laplacian_band(g.face_coef, g.vol, h)
        base = lap.scale_rows(weight[i])
        react = -(n - 1) * k ** 2 * weight[i] + shift
        scalar = base + Band.diagonal(react)
        perp = base + Band.diagonal(react - m * weight[i] / g.par2)
        if advect:
            scalar = scalar + advection_band(fol.drift[i], h)
            perp = perp + advection_band(fol.drift[i], h, odd=True)
        return scalar, perp

    W = np.empty((fol.M + 1,) + terminal.shape)
    W[-1] = terminal
    Y = terminal.copy()
    tau = 0.0
    hi = ops(fol.M)
    for i in range(fol.M - 1, -1, -1):
        dtau = fol.times[i + 1] - fol.times[i]
        lo = ops(i)
        Y[:, 1:] = linear_step(Y[:, 1:].reshape(N, -1), dtau, hi[0], lo[0], tol).reshape(Y[:, 1:].shape)
        Y[:, 0] = linear_step(Y[:, 0], dtau, hi[1], lo[1], tol)
        tau += dtau
        W[i] = np.exp(-shift * tau) * Y
        hi = lo
    return W


def _components_last(W):
    """Move a trailing batch axis (if any) in front so the Lorentz components come last."""
    W = np.asarray(W)
    return np.moveaxis(W, -1, 0) if W.ndim == 4 else W


def check_causal(W, eps: float = EPS_CAUSAL, where: str = "grid"):
    W = _components_last(W)
    ok = past_causal_mask(W, eps)
    if not np.all(ok):
        idx = tuple(int(i) for i in np.argwhere(~ok)[0])
        raise CausalViolation(f"W is not past-directed non-spacelike on {where} at {idx}: "
                              f"{np.asarray(W)[idx]}")


def solve_exterior_W(ext: ExteriorFoliation, terminal=None, eps: float = EPS_CAUSAL,
                     check: bool = True) -> TransportField:
    """Exterior weight with ``W = -k X`` imposed at the outermost level."""
    fol = ext.fol
    k = fol.amb.k
    if terminal is None:
        terminal = -k * fol.slices[-1].X
    W = transport(fol, ext.v / fol.H, terminal, advect=False, shift=k)
    if check:
        check_causal(W, eps, "exterior levels")
    return TransportField(fol.times.copy(), W, np.asarray(terminal, dtype=float).copy())


def solve_interior_W(c: CollarFoliation, lapse: LapseField, W_T, eps: float = EPS_CAUSAL,
                     check: bool = True) -> TransportField:
    if np.any(lapse.u <= 0) or np.any(c.eta <= 0):
        raise ValueError("interior transport needs positive u and eta")
    weight = lapse.u * c.eta / c.H_one
    W = transport(c, weight, W_T, advect=True)
    if check:
        check_causal(W, eps, "collar slices")
    return TransportField(c.times.copy(), W, np.asarray(W_T, dtype=float).copy())


def W0_vector(interior: TransportField) -> np.ndarray:
    """Future-directed weight on the original surface, ``W0 = -W(., 0)``."""
    return -interior.W[0]
