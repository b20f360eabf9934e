"""Axisymmetric star-shaped hypersurfaces of H^n_{-k^2} and their curvature.

A surface is a radial graph ``r = r(theta)`` over the geodesic sphere about
the hyperboloid vertex, sampled on the cell-centred polar grid
``theta_j = (j + 1/2) pi / N``.  The symmetry axis is the last spatial
coordinate.  Hyperbolic space is written as ``dr^2 + s(r)^2 g_{S^{n-1}}`` with
``s(r) = sinh(kr)/k``.

The meridian direction carries principal curvature ``kappa1``; the ``n-2``
rotational directions share ``kappa2``.  Lorentz-valued fields on a surface
are stored in the reduced axial frame ``(perp, z, t)``: at azimuthal unit
vector ``omega`` in S^{n-2} the full vector is ``(perp * omega, z; t)``.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_legendre

from .minkowski import AmbientSpace

MIN_PROFILE_CELLS = 16


def cell_centers(N: int) -> np.ndarray:
    return (np.arange(N) + 0.5) * np.pi / N


def cell_faces(N: int) -> np.ndarray:
    return np.arange(N + 1) * np.pi / N


@functools.lru_cache(maxsize=64)
def _cell_sin_weights(N: int, m: int) -> np.ndarray:
    faces = cell_faces(N)
    if m == 1:
        w = np.cos(faces[:-1]) - np.cos(faces[1:])
    else:
        # 16-point Gauss-Legendre per cell is exact to round-off for smooth sin^m
        x, wt = np.polynomial.legendre.leggauss(16)
        a, b = faces[:-1, None], faces[1:, None]
        pts = 0.5 * (b - a) * x + 0.5 * (a + b)
        w = 0.5 * (b - a)[:, 0] * (np.sin(pts) ** m @ wt)
    w.setflags(write=False)
    return w


def cell_sin_weights(N: int, m: int) -> np.ndarray:
    """Exact cell integrals of ``sin(theta)^m``."""
    return _cell_sin_weights(int(N), int(m))


def unit_sphere_area(m: int) -> float:
    """Area of the unit m-sphere S^m."""
    return 2.0 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2)


def grad_theta(f: np.ndarray, h: float, odd: bool = False) -> np.ndarray:
    """Centred theta-derivative with reflection ghosts at the poles.

    ``odd`` selects the ghost parity for fields that change sign through the
    axis (the perpendicular Lorentz component).
    """
    sign = -1.0 if odd else 1.0
    padded = np.concatenate(([sign * f[0]], f, [sign * f[-1]]))
    return (padded[2:] - padded[:-2]) / (2.0 * h)


@dataclass(frozen=True)
class RadialSurface:
    amb: AmbientSpace
    radii: np.ndarray
    exact_sphere: bool = False

    def __post_init__(self):
        radii = np.array(self.radii, dtype=float)
        radii.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        if radii.ndim != 1:
            raise ValueError("radii must be one-dimensional")
        if np.any(radii <= 0):
            raise ValueError("radii must be positive (star-shaped about the vertex)")
        if self.exact_sphere:
            if np.ptp(radii) != 0:
                raise ValueError("an exact sphere has constant radius")
        else:
            if self.amb.n != 3:
                raise ValueError("profile surfaces are supported for n = 3 only")
            if self.N < MIN_PROFILE_CELLS or self.N % 2:
                raise ValueError(f"profile grid needs an even N >= {MIN_PROFILE_CELLS}, got {self.N}")

    @property
    def N(self) -> int:
        return self.radii.size

    @property
    def theta(self) -> np.ndarray:
        return cell_centers(self.N)

    @classmethod
    def sphere(cls, amb: AmbientSpace, r: float, N: int = 128) -> "RadialSurface":
        return cls(amb, np.full(N, float(r)), exact_sphere=True)

    @classmethod
    def profile(cls, amb: AmbientSpace, radii) -> "RadialSurface":
        return cls(amb, np.asarray(radii, dtype=float))

    @classmethod
    def perturbed_sphere(cls, amb: AmbientSpace, r0: float, amp: float, mode: int,
                         N: int = 128) -> "RadialSurface":
        theta = cell_centers(N)
        return cls(amb, r0 * (1.0 + amp * eval_legendre(mode, np.cos(theta))))

    def with_radii(self, radii) -> "RadialSurface":
        if self.exact_sphere:
            radii = np.asarray(radii, dtype=float)
            r = radii[0] if np.ptp(radii) == 0 else np.mean(radii)
            return RadialSurface(self.amb, np.full(self.N, float(r)), True)
        return RadialSurface(self.amb, radii)


@dataclass(frozen=True)
class SurfaceGeometry:
    """Per-cell geometry of one slice, plus the face data of its Laplacian.

    ``vol`` is the cell integral of the volume density with the azimuthal
    sphere factored out, so ``area = omega_{n-2} * vol``; ``face_coef`` holds
    ``sqrt(g) g^{theta theta}`` (same normalisation) on the N-1 interior
    faces.  Pole faces carry zero flux.
    """
    amb: AmbientSpace
    theta: np.ndarray
    r: np.ndarray
    r_theta: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    g_tt: np.ndarray
    par2: np.ndarray
    vol: np.ndarray
    face_coef: np.ndarray
    X: np.ndarray
    normal: np.ndarray
    graph_factor: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.theta.size

    @property
    def h(self) -> float:
        return np.pi / self.N

    @property
    def mult(self) -> int:
        return self.amb.n - 2

    @property
    def H(self) -> np.ndarray:
        return self.kappa1 + self.mult * self.kappa2

    @property
    def A2(self) -> np.ndarray:
        return self.kappa1 ** 2 + self.mult * self.kappa2 ** 2

    @property
    def R_intrinsic(self) -> np.ndarray:
        # traced Gauss equation
        n, k = self.amb.n, self.amb.k
        return self.H ** 2 - self.A2 - (n - 1) * (n - 2) * k ** 2

    @property
    def principal(self) -> np.ndarray:
        cols = [self.kappa1] + [self.kappa2] * self.mult
        return np.stack(cols, axis=-1)

    @property
    def area_element(self) -> np.ndarray:
        return unit_sphere_area(self.amb.n - 2) * self.vol

    @property
    def area(self) -> float:
        return float(np.sum(self.area_element))

    @property
    def metric_g(self) -> tuple[np.ndarray, np.ndarray]:
        """``(g_theta_theta, g_phi_phi)``; the latter is the squared parallel radius."""
        return self.g_tt, self.par2


class Gamma2(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def elementary_symmetric(principal) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(principal, dtype=float)
    s1 = p.sum(axis=-1)
    s2 = 0.5 * (s1 ** 2 - (p ** 2).sum(axis=-1))
    return s1, s2


def gamma2_membership(principal, eps: float = 1e-12) -> Gamma2:
    p = np.asarray(principal, dtype=float)
    s1, s2 = elementary_symmetric(p)
    scale = max(1.0, float(np.sum(p ** 2)))
    if s1 > eps * scale and s2 > eps * scale:
        return Gamma2.INSIDE
    if s1 < -eps * scale or s2 < -eps * scale:
        return Gamma2.OUTSIDE
    return Gamma2.BOUNDARY


def in_gamma2(principal, eps: float = 0.0) -> np.ndarray:
    """Vectorised strict membership over leading axes."""
    p = np.asarray(principal, dtype=float)
    s1, s2 = elementary_symmetric(p)
    scale = np.maximum(1.0, np.sum(p ** 2, axis=-1))
    return (s1 > eps * scale) & (s2 > eps * scale)


def scalar_condition_check(geo: SurfaceGeometry) -> np.ndarray:
    n, k = geo.amb.n, geo.amb.k
    gauss_form = geo.H ** 2 - geo.A2
    intrinsic_form = geo.R_intrinsic + (n - 1) * (n - 2) * k ** 2
    ok_a = gauss_form > 0
    ok_b = intrinsic_form > 0
    if np.any(ok_a != ok_b):
        raise ArithmeticError("Gauss-equation forms of the scalar condition disagree in sign")
    return ok_a


def _axial_frame(s, r, theta, k):
    X = np.stack([s * np.sin(theta), s * np.cos(theta), np.cosh(k * r) / k], axis=-1)
    d_r = np.stack([np.cosh(k * r) * np.sin(theta), np.cosh(k * r) * np.cos(theta),
                    np.sinh(k * r)], axis=-1)
    d_theta = np.stack([s * np.cos(theta), -s * np.sin(theta), np.zeros_like(theta)], axis=-1)
    return X, d_r, d_theta


def compute_geometry(surf: RadialSurface) -> SurfaceGeometry:
    amb = surf.amb
    n, k = amb.n, amb.k
    m = n - 2
    N = surf.N
    h = np.pi / N
    theta = cell_centers(N)
    r = surf.radii
    s = np.sinh(k * r) / k
    c = np.cosh(k * r)
    w = cell_sin_weights(N, m)
    faces = cell_faces(N)[1:-1]

    if surf.exact_sphere:
        r0 = float(r[0])
        kap = np.full(N, k / np.tanh(k * r0))
        r_theta = np.zeros(N)
        v = np.ones(N)
        kappa1 = kappa2 = kap
        s_f = np.full(N - 1, s[0])
        g_tt_f = s_f ** 2
    else:
        padded = np.concatenate(([r[0]], r, [r[-1]]))
        r_theta = (padded[2:] - padded[:-2]) / (2 * h)
        r_tt = (padded[2:] - 2 * r + padded[:-2]) / h ** 2
        v = np.sqrt(1.0 + (r_theta / s) ** 2)
        phi2 = r_tt / s - r_theta ** 2 * c / s ** 2
        kappa1 = (c - phi2 / v ** 2) / (s * v)
        kappa2 = (c / s - r_theta / (np.tan(theta) * s ** 2)) / v
        r_f = 0.5 * (r[1:] + r[:-1])
        rt_f = (r[1:] - r[:-1]) / h
        s_f = np.sinh(k * r_f) / k
        g_tt_f = s_f ** 2 + rt_f ** 2

    g_tt = s ** 2 * v ** 2
    par2 = (s * np.sin(theta)) ** 2
    vol = np.sqrt(g_tt) * s ** m * w
    face_coef = (s_f * np.sin(faces)) ** m / np.sqrt(g_tt_f)
    X, d_r, d_theta = _axial_frame(s, r, theta, k)
    normal = (d_r - (r_theta / s ** 2)[:, None] * d_theta) / v[:, None]
    return SurfaceGeometry(amb=amb, theta=theta, r=r.copy(), r_theta=r_theta,
                           kappa1=kappa1, kappa2=kappa2, g_tt=g_tt, par2=par2, vol=vol,
                           face_coef=face_coef, X=X, normal=normal, graph_factor=v)


def lift_axial(W, omega) -> np.ndarray:
    """Full R^{n,1} vector(s) from axial-frame values at azimuth ``omega``."""
    W = np.asarray(W, dtype=float)
    omega = np.asarray(omega, dtype=float)
    perp = W[..., :1] * omega
    return np.concatenate([perp, W[..., 1:]], axis=-1)
