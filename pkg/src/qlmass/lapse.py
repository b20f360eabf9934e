"""Lapse u on the collar making u^2 dt^2 + g_t a metric of scalar curvature -n(n-1)k^2.

In flow coordinates the lapse satisfies

    du/dt = (u^2/H1) Lap u + u/(2 H1) (H1^2 + |A1|^2 + 2 dH1/dt)
            - u^3/(2 H1) (R_t + n(n-1)k^2),

where ``H1 = eta H_eta`` and ``|A1|^2 = eta^2 |A_eta|^2`` describe the slices
in the unit-lapse gauge.  The cell grid is Eulerian in the polar angle, so the
time derivative picks up the drift of the flow trajectories.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import grad_theta
from .icf import CollarFoliation, Foliation
from .parabolic import SolverError, advection_band, laplacian_band, quasilinear_step

BARRIER_MARGIN = 1.1
GAMMA_FLOOR = 0.1


class BarrierViolation(SolverError):
    pass


@dataclass(frozen=True)
class Barriers:
    C: float
    beta: float
    gamma: float
    gamma_clamped: bool

    def lower(self, t) -> np.ndarray:
        return self.beta * np.exp(-self.gamma * np.asarray(t))


@dataclass
class LapseField:
    times: np.ndarray
    u: np.ndarray
    u0: np.ndarray
    barriers: Barriers

    @property
    def barrier_C(self) -> float:
        return self.barriers.C

    @property
    def barrier_beta(self) -> float:
        return self.barriers.beta

    @property
    def barrier_gamma(self) -> float:
        return self.barriers.gamma


def _scalar_curvature_gap(c: Foliation) -> np.ndarray:
    n, k = c.amb.n, c.amb.k
    return c.R + n * (n - 1) * k ** 2


def compute_barriers(c: CollarFoliation, u0) -> Barriers:
    u0 = np.asarray(u0, dtype=float)
    denom = _scalar_curvature_gap(c)
    if np.any(denom <= 0):
        raise ValueError("R_t + n(n-1)k^2 must be positive on the collar")
    H1, A1, dH1 = c.H_one, c.A2_one, c.dt_H_one
    forcing = H1 ** 2 + A1 + 2 * dH1
    q = float(np.max(forcing / denom))
    C = BARRIER_MARGIN * max(float(np.max(u0)), np.sqrt(max(q, 0.0)))
    beta = 0.9 * float(np.min(u0))
    g = float(np.max(beta ** 2 * denom / (2 * H1) - forcing / (2 * H1)))
    gamma = BARRIER_MARGIN * g if g > 0 else 0.0
    clamped = gamma < GAMMA_FLOOR
    return Barriers(C, beta, max(gamma, GAMMA_FLOOR), clamped)


def check_barriers(lapse: LapseField):
    """First grid point outside ``(beta e^{-gamma t}, C)``, or None."""
    lower = lapse.barriers.lower(lapse.times)[:, None]
    bad = (lapse.u <= lower) | (lapse.u >= lapse.barriers.C)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        return int(i), int(j), float(lapse.u[i, j])
    return None


def boundary_lapse(c: Foliation, H_boundary) -> np.ndarray:
    """Initial lapse giving the slice t=0 mean curvature ``H_boundary`` in g_u."""
    H_boundary = np.asarray(H_boundary, dtype=float)
    if np.any(H_boundary <= 0):
        raise ValueError("boundary mean curvature must be positive")
    return c.eta[0] * (c.slices[0].H / H_boundary)


def solve_lapse(c: CollarFoliation, u0, tol: float = 1e-10, check: bool = True) -> LapseField:
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (c.N,) or np.any(u0 <= 0):
        raise ValueError("u0 must be a positive profile on the collar grid")
    barriers = compute_barriers(c, u0)
    H1 = c.H_one
    forcing = H1 ** 2 + c.A2_one + 2 * c.dt_H_one
    gap = _scalar_curvature_gap(c)
    h = c.h
    laps = [laplacian_band(g.face_coef, g.vol, h) for g in c.slices]
    advs = [advection_band(-d, h) for d in c.drift]

    u = np.empty((c.M + 1, c.N))
    u[0] = u0
    for i in range(c.M):
        dt = c.times[i + 1] - c.times[i]
        idx = (i, i + 1)

        def coef(w, side):
            return w ** 2 / H1[idx[side]]

        def reaction(w, side):
            j = idx[side]
            return w / (2 * H1[j]) * forcing[j] - w ** 3 / (2 * H1[j]) * gap[j]

        u[i + 1] = quasilinear_step(u[i], dt, laps[i], laps[i + 1], advs[i], advs[i + 1],
                                    coef, reaction, tol)
        if not np.all(np.isfinite(u[i + 1])) or np.any(u[i + 1] <= 0):
            raise SolverError(f"lapse lost positivity at t={c.times[i + 1]:.6g}")
    lapse = LapseField(c.times.copy(), u, u0.copy(), barriers)
    if check:
        bad = check_barriers(lapse)
        if bad is not None:
            i, j, val = bad
            raise BarrierViolation(f"lapse u={val:.6g} leaves the barrier band at "
                                   f"t={c.times[i]:.6g}, cell {j}")
    return lapse


def mean_curvature_of_lapse(c: Foliation, u) -> np.ndarray:
    """Slice mean curvature in g_u: ``H_u = eta H_eta / u``."""
    return c.H_one / np.asarray(u)


def principal_of_lapse(c: Foliation, u) -> np.ndarray:
    """Principal curvatures in g_u (the shape operator scales like the mean curvature)."""
    u = np.asarray(u)
    return (c.eta / u)[..., None] * c.stack("principal")


def Hu_evolution_residual(c: Foliation, u) -> np.ndarray:
    """Residual of the mean-curvature variation formula in g_u on interior slices.

    Vanishes when g_u has scalar curvature -n(n-1)k^2; returned on slices
    ``1 .. M-1``.
    """
    n, k = c.amb.n, c.amb.k
    u = np.asarray(u, dtype=float)
    H1 = c.H_one
    Q = H1 ** 2 + c.A2_one
    Hu = H1 / u
    dHu = np.gradient(Hu, c.times, axis=0, edge_order=2)
    h = c.h
    out = []
    for i in range(1, c.M):
        g = c.slices[i]
        lhs = dHu[i] + c.drift[i] * grad_theta(Hu[i], h)
        lap = laplacian_band(g.face_coef, g.vol, h) @ u[i]
        rhs = (-lap + 0.5 * u[i] * (g.R_intrinsic + n * (n - 1) * k ** 2)
               - Q[i] / (2 * u[i]))
        out.append(lhs - rhs)
    return np.array(out)


def verify_Hu_evolution(c: Foliation, u) -> float:
    res = Hu_evolution_residual(c, u)
    return float(np.max(np.abs(res))) if res.size else 0.0

