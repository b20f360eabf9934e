"""Exterior end: distance foliation outside the convex slice and the v equation.

Outside a strictly convex surface the hyperbolic metric is ``drho^2 + g_rho``
with ``rho`` the distance to the surface.  The level sets are parallel
surfaces, available in closed form in the hyperboloid model:

    X(rho) = cosh(k rho) X + sinh(k rho)/k N,
    kappa(rho) = (kappa cosh(k rho) + k sinh(k rho)) / (cosh(k rho) + kappa/k sinh(k rho)).

Cells keep their labels along the normal geodesics, so no drift term
appears.  On this foliation

    2 H dv/drho = 2 v^2 Lap v + (v - v^3)(R_rho + n(n-1)k^2)

gives ``v^2 drho^2 + g_rho`` constant scalar curvature -n(n-1)k^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SurfaceGeometry
from .icf import Foliation
from .parabolic import Band, SolverError, laplacian_band, quasilinear_step

BLOWUP_FACTOR = 10.0


class ConvexityError(RuntimeError):
    pass


def parallel_level(geo: SurfaceGeometry, rho: float) -> SurfaceGeometry:
    """Geometry of the surface at distance ``rho`` outside ``geo``."""
    k = geo.amb.k
    m = geo.mult
    ch, sh = np.cosh(k * rho), np.sinh(k * rho)
    k1, k2 = geo.kappa1, geo.kappa2
    f1 = ch + sh * k1 / k
    f2 = ch + sh * k2 / k
    if np.any(f1 <= 0) or np.any(f2 <= 0):
        raise ConvexityError(f"parallel surface at rho={rho:.4g} is singular")
    k1f = 0.5 * (k1[1:] + k1[:-1])
    k2f = 0.5 * (k2[1:] + k2[:-1])
    f1f = ch + sh * k1f / k
    f2f = ch + sh * k2f / k
    X = ch * geo.X + (sh / k) * geo.normal
    normal = (k * sh) * geo.X + ch * geo.normal
    r = np.arccosh(np.maximum(k * X[:, 2], 1.0)) / k
    return SurfaceGeometry(
        amb=geo.amb, theta=geo.theta, r=r, r_theta=np.zeros_like(r),
        kappa1=(k1 * ch + k * sh) / f1, kappa2=(k2 * ch + k * sh) / f2,
        g_tt=geo.g_tt * f1 ** 2, par2=geo.par2 * f2 ** 2,
        vol=geo.vol * f1 * f2 ** m, face_coef=geo.face_coef * f2f ** m / f1f,
        X=X, normal=normal, graph_factor=np.ones_like(r))


def build_distance_foliation(geo_T: SurfaceGeometry, rho_max: float, levels: int) -> Foliation:
    if np.min(geo_T.principal) <= 0:
        raise ConvexityError("the inner boundary of the exterior must be strictly convex")
    if rho_max <= 0 or levels < 1:
        raise ValueError("need rho_max > 0 and at least one level")
    rho = np.linspace(0.0, rho_max, levels + 1)
    slices = [geo_T] + [parallel_level(geo_T, p) for p in rho[1:]]
    for p, g in zip(rho, slices):
        if np.min(g.principal) <= 0:
            raise ConvexityError(f"distance surface lost convexity at rho={p:.4g}")
    N = geo_T.N
    return Foliation(geo_T.amb, rho, slices, np.ones((levels + 1, N)),
                     np.zeros((levels + 1, N)))


@dataclass
class ExteriorFoliation:
    """Distance foliation with the solved ``v``, stored as the deviation ``w = v - 1``.

    Far out ``v - 1`` decays faster than the area grows, so keeping the
    deviation (rather than ``v`` itself) avoids round-off that the mass
    integrand would otherwise amplify.
    """
    fol: Foliation
    w: np.ndarray

    @property
    def v(self) -> np.ndarray:
        return 1.0 + self.w

    @property
    def rho(self) -> np.ndarray:
        return self.fol.times

    @property
    def H_rho(self) -> np.ndarray:
        return self.fol.H

    @property
    def H_v(self) -> np.ndarray:
        return self.fol.H / self.v

    @property
    def H_gap(self) -> np.ndarray:
        """``H_rho - H_v`` computed without cancellation."""
        return self.fol.H * self.w / self.v


def exterior_reaction_coefficient(fol: Foliation) -> np.ndarray:
    n, k = fol.amb.n, fol.amb.k
    return (fol.R + n * (n - 1) * k ** 2) / (2 * fol.H)


def solve_exterior_v(fol: Foliation, v0, tol: float = 1e-10) -> ExteriorFoliation:
    """March ``v`` outward from ``v0``; the unknown is ``w = v - 1``.

    With ``v = 1 + w`` the reaction ``(v - v^3) c`` becomes ``-w (1 + w)(2 + w) c``,
    so ``v0 = 1`` is reproduced exactly.
    """
    v0 = np.asarray(v0, dtype=float)
    if v0.shape != (fol.N,) or np.any(v0 <= 0):
        raise ValueError("v0 must be a positive profile on the level grid")
    H = fol.H
    react = exterior_reaction_coefficient(fol)
    h = fol.h
    laps = [laplacian_band(g.face_coef, g.vol, h) for g in fol.slices]
    zero = Band.zeros(fol.N)
    cap = BLOWUP_FACTOR * float(np.max(v0))
    w = np.empty((fol.M + 1, fol.N))
    w[0] = v0 - 1.0
    for i in range(fol.M):
        dr = fol.times[i + 1] - fol.times[i]
        idx = (i, i + 1)

        def coef(x, side):
            return (1.0 + x) ** 2 / H[idx[side]]

        def reaction(x, side):
            return -x * (1.0 + x) * (2.0 + x) * react[idx[side]]

        w[i + 1] = quasilinear_step(w[i], dr, laps[i], laps[i + 1], zero, zero,
                                    coef, reaction, tol)
        if not np.all(np.isfinite(w[i + 1])) or np.any(w[i + 1] <= -1.0):
            raise SolverError(f"v lost positivity at rho={fol.times[i + 1]:.6g}")
        if 1.0 + np.max(w[i + 1]) > cap:
            raise SolverError(f"v blew up past {cap:.4g} at rho={fol.times[i + 1]:.6g}")
    return ExteriorFoliation(fol, w)


def tail_rate(rho, w) -> float:
    """Exponential decay rate of ``max |w|`` (``w = v - 1``) over the last half of the levels."""
    rho = np.asarray(rho)
    dev = np.max(np.abs(np.asarray(w)), axis=-1)
    keep = (rho >= 0.5 * rho[-1]) & (dev > 1e-300)
    if keep.sum() < 3:
        return float("inf")
    return float(-np.polyfit(rho[keep], np.log(dev[keep]), 1)[0])

