"""Expanding inverse curvature flow and the collar foliation it sweeps out.

The flow moves a star-shaped surface outward with normal speed
``eta = (n-2)/(n-1) * H / (H^2 - |A|^2)``.  It is integrated in graph form,
``dr/dt = eta * v`` at fixed polar angle, with Heun's method.  Downstream
equations are posed in flow coordinates (points moving along the normal), so
the collar also records the angular drift of those trajectories.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .geometry import (RadialSurface, SurfaceGeometry, compute_geometry, grad_theta,
                       in_gamma2)
from .minkowski import AmbientSpace

log = logging.getLogger(__name__)


class FlowError(RuntimeError):
    pass


def flow_speed(geo: SurfaceGeometry) -> np.ndarray:
    n = geo.amb.n
    return (n - 2) / (n - 1) * geo.H / (geo.H ** 2 - geo.A2)


def _diffusivity(geo: SurfaceGeometry) -> np.ndarray:
    """Coefficient of r_theta_theta in the graph equation (parabolicity monitor)."""
    n = geo.amb.n
    m = n - 2
    c = (n - 2) / (n - 1)
    s1 = geo.H
    s2 = 0.5 * (geo.H ** 2 - geo.A2)
    d_eta = c * (s2 - s1 * m * geo.kappa2) / (2 * s2 ** 2)
    return np.abs(d_eta) / geo.g_tt


def _check_slice(geo: SurfaceGeometry, t: float, where: str = "slice"):
    inside = in_gamma2(geo.principal)
    if not np.all(inside):
        j = int(np.argmin(inside))
        raise FlowError(f"Gamma_2 violated on {where} t={t:.6g} at cell {j} "
                        f"(kappa={geo.principal[j]})")
    if not np.all(geo.H ** 2 - geo.A2 > 0):
        raise FlowError(f"H^2 - |A|^2 <= 0 on {where} t={t:.6g}")


@dataclass
class Foliation:
    """A family of slices with lapse ``eta`` on a common cell grid.

    ``drift`` is the polar-angle velocity of the flow trajectories (zero when
    the cell labels already move along the normal).
    """
    amb: AmbientSpace
    times: np.ndarray
    slices: list
    eta: np.ndarray
    drift: np.ndarray

    @property
    def N(self) -> int:
        return self.slices[0].N

    @property
    def M(self) -> int:
        return len(self.times) - 1

    @property
    def h(self) -> float:
        return np.pi / self.N

    def stack(self, name: str) -> np.ndarray:
        return np.array([getattr(g, name) for g in self.slices])

    @property
    def H(self) -> np.ndarray:
        return self.stack("H")

    @property
    def A2(self) -> np.ndarray:
        return self.stack("A2")

    @property
    def R(self) -> np.ndarray:
        return self.stack("R_intrinsic")

    @property
    def area_element(self) -> np.ndarray:
        return self.stack("area_element")

    @property
    def H_one(self) -> np.ndarray:
        """Mean curvature of the slices in the unit-lapse metric, ``eta * H_eta``."""
        return self.eta * self.H

    @property
    def A2_one(self) -> np.ndarray:
        return self.eta ** 2 * self.A2

    def lagrangian_dt(self, F: np.ndarray) -> np.ndarray:
        """Time derivative at fixed flow label of a field sampled on the slices."""
        if self.M == 0:
            return np.zeros_like(F)
        edge = 2 if self.M >= 2 else 1
        dF = np.gradient(F, self.times, axis=0, edge_order=edge)
        return dF + self.drift * np.array([grad_theta(f, self.h) for f in F])

    @property
    def dt_H_one(self) -> np.ndarray:
        return self.lagrangian_dt(self.H_one)


@dataclass
class CollarFoliation(Foliation):
    surface: RadialSurface = None
    radii: np.ndarray = field(default=None, repr=False)
    dt_nominal: float = 0.0
    dt_halvings: int = 0

    def truncate(self, T: float) -> "CollarFoliation":
        idx = int(np.searchsorted(self.times, T, side="right"))
        return self.subset(idx)

    def subset(self, stop: int) -> "CollarFoliation":
        return CollarFoliation(self.amb, self.times[:stop].copy(), self.slices[:stop],
                               self.eta[:stop].copy(), self.drift[:stop].copy(),
                               surface=self.surface, radii=self.radii[:stop].copy(),
                               dt_nominal=self.dt_nominal, dt_halvings=self.dt_halvings)

    @property
    def T(self) -> float:
        return float(self.times[-1])


def collar_from_radii(surface: RadialSurface, times, radii) -> CollarFoliation:
    """Rebuild the collar (geometry, lapse, drift) from stored radial profiles."""
    times = np.asarray(times, dtype=float)
    radii = np.asarray(radii, dtype=float)
    slices = [compute_geometry(surface.with_radii(r)) for r in radii]
    eta = np.array([flow_speed(g) for g in slices])
    drift = np.array([-e * g.r_theta * g.graph_factor / g.g_tt for e, g in zip(eta, slices)])
    return CollarFoliation(surface.amb, times, slices, eta, drift, surface=surface,
                           radii=radii)


def run_icf(s0: RadialSurface, t_end: float, dt: float, cfl: float = 0.4,
            max_halvings: int = 12) -> CollarFoliation:
    if dt <= 0 or t_end < 0:
        raise ValueError("need dt > 0 and t_end >= 0")
    geo = compute_geometry(s0)
    _check_slice(geo, 0.0, "initial surface")
    h = np.pi / s0.N
    r = s0.radii.copy()
    t = 0.0
    times = [0.0]
    radii = [r.copy()]
    halvings = 0
    step = dt

    def speed(g):
        return flow_speed(g) * g.graph_factor

    while t < t_end - 1e-12 * max(1.0, t_end):
        if not s0.exact_sphere:
            D = float(np.max(_diffusivity(geo)))
            while step > cfl * h * h / D:
                step *= 0.5
                halvings += 1
                if halvings > max_halvings:
                    raise FlowError(f"time step underflow at t={t:.6g} (CFL monitor)")
                log.info("CFL monitor tripped at t=%.4g, dt -> %.3g", t, step)
        this = min(step, t_end - t)
        k1 = speed(geo)
        g1 = compute_geometry(s0.with_radii(r + this * k1))
        _check_slice(g1, t + this, "stage")
        r_new = r + 0.5 * this * (k1 + speed(g1))
        if np.any(r_new <= r):
            raise FlowError(f"radius failed to increase at t={t + this:.6g}")
        geo = compute_geometry(s0.with_radii(r_new))
        _check_slice(geo, t + this)
        r = r_new
        t += this
        times.append(t)
        radii.append(r.copy())
    collar = collar_from_radii(s0, times, radii)
    collar.dt_nominal = dt
    collar.dt_halvings = halvings
    return collar


def sphere_radius_law(amb: AmbientSpace, r0: float, t) -> np.ndarray:
    """Closed-form radius of a geodesic sphere under the flow."""
    k, n = amb.k, amb.n
    return np.arcsinh(np.sinh(k * r0) * np.exp(np.asarray(t) / (n - 1))) / k


@dataclass(frozen=True)
class FlowDiagnostics:
    times: np.ndarray
    umbilicity_series: np.ndarray
    fitted_decay_rate: float
    convexity_time: float | None


def umbilicity(c: Foliation) -> np.ndarray:
    k = c.amb.k
    return np.array([max(np.max(np.abs(g.kappa1 / k - 1)), np.max(np.abs(g.kappa2 / k - 1)))
                     for g in c.slices])


def fit_decay_rate(times, series) -> float:
    """Least-squares exponential rate over the final half of the series."""
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    half = times >= 0.5 * (times[0] + times[-1])
    y = series[half]
    if np.all(y == 0):
        return float("inf")
    if np.any(y <= 0):
        raise ValueError("decay fit needs a positive series")
    slope = np.polyfit(times[half], np.log(y), 1)[0]
    return float(-slope)


def flow_diagnostics(c: Foliation, delta_convex: float = 0.5) -> FlowDiagnostics:
    if c.M + 1 < 10:
        raise ValueError("flow diagnostics need at least 10 slices")
    umb = umbilicity(c)
    try:
        tc = select_T(c, delta_convex)
    except FlowError:
        tc = None
    return FlowDiagnostics(c.times.copy(), umb, fit_decay_rate(c.times, umb), tc)


def select_T(c: Foliation, delta_convex: float) -> float:
    """First slice time at which every principal curvature exceeds ``delta_convex * k``."""
    k = c.amb.k
    for t, g in zip(c.times, c.slices):
        if np.min(g.principal) > delta_convex * k:
            return float(t)
    raise FlowError(f"slices never became {delta_convex}-convex by t={c.times[-1]:.4g}; "
                    "run the flow longer")
