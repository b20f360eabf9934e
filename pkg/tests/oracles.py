"""Independent reference computations used by the tests.

Nothing here imports the solver modules: every value is built from closed
forms, a symbolic embedding in Minkowski space, or scipy's ODE integrator.
"""
from __future__ import annotations

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp


# geometry via the hyperboloid embedding

def embedding_curvatures(r_of_theta, k: float, thetas):
    """Diagonal shape-operator entries (meridional, azimuthal) of an axisymmetric
    radial graph ``r(theta)`` embedded in the hyperboloid of R^{3,1}.

    ``r_of_theta`` maps a sympy symbol to a sympy expression.
    """
    th, ph = sp.symbols("theta phi", real=True)
    kk = sp.nsimplify(k)
    r = r_of_theta(th)
    s = sp.sinh(kk * r) / kk
    X = sp.Matrix([s * sp.sin(th) * sp.cos(ph), s * sp.sin(th) * sp.sin(ph),
                   s * sp.cos(th), sp.cosh(kk * r) / kk])
    f = sp.lambdify((th, ph), [X, X.diff(th), X.diff(ph), X.diff(th, 2), X.diff(ph, 2),
                               X.diff(th, ph)], "numpy")
    G = np.diag([1.0, 1.0, 1.0, -1.0])
    out = []
    for t in thetas:
        Xv, a1, a2, att, app, atp = [np.array(v, dtype=float).ravel() for v in f(t, 0.0)]
        _, _, Vt = np.linalg.svd(np.array([G @ Xv, G @ a1, G @ a2]))
        nv = Vt[-1] / np.sqrt(Vt[-1] @ G @ Vt[-1])
        if nv[:3] @ Xv[:3] < 0:
            nv = -nv
        first = np.array([[a1 @ G @ a1, a1 @ G @ a2], [a2 @ G @ a1, a2 @ G @ a2]])
        second = -np.array([[att @ G @ nv, atp @ G @ nv], [atp @ G @ nv, app @ G @ nv]])
        out.append(np.diag(np.linalg.solve(first, second)))
    return np.array(out)


# round spheres

def sphere_radius(r0, t, n=3, k=1.0):
    return np.arcsinh(np.sinh(k * r0) * np.exp(np.asarray(t) / (n - 1))) / k


def sphere_eta(r, n=3, k=1.0):
    return np.tanh(k * np.asarray(r)) / ((n - 1) * k)


def area_radius(r, k=1.0):
    return np.sinh(k * np.asarray(r)) / k


def sphere_lapse(r0, u0, times, n=3, k=1.0):
    """Lapse on the collar of a round sphere: with H1 = 1 and |A1|^2 = 1/(n-1),

    u' = (u/2)(1 + 1/(n-1)) - (u^3/2)((n-1)(n-2)/s^2 + n(n-1)k^2).
    """
    def rhs(t, u):
        s = area_radius(sphere_radius(r0, t, n, k), k)
        return 0.5 * u * (1 + 1 / (n - 1)) - 0.5 * u ** 3 * ((n - 1) * (n - 2) / s ** 2
                                                             + n * (n - 1) * k ** 2)
    sol = solve_ivp(rhs, (times[0], times[-1]), [u0], t_eval=times, rtol=1e-12, atol=1e-14)
    return sol.y[0]


# hyperbolic Schwarzschild end

def schwarzschild_mass(s0, v0, n=3, k=1.0):
    return 0.5 * s0 ** (n - 2) * (1 + k * k * s0 * s0) * (1 - 1 / v0 ** 2)


def schwarzschild_w(s, m, n=3, k=1.0):
    """``v - 1`` for v^2 = (1 + k^2 s^2)/(1 + k^2 s^2 - 2m/s^(n-2)), without cancellation."""
    s = np.asarray(s, dtype=float)
    a = 2 * m / s ** (n - 2)
    d = a / (1 + k * k * s * s - a)
    return d / (np.sqrt(1 + d) + 1)


def schwarzschild_residual(rT, m, rhos, n=3, k=1.0):
    """Residual of 2 H v' = (v - v^3)(R + n(n-1)k^2) on the level spheres at ``rT + rho``,
    with v' from exact symbolic differentiation."""
    rho = sp.symbols("rho", real=True)
    kk, mm = sp.nsimplify(k), sp.nsimplify(m)
    s = sp.sinh(kk * (sp.nsimplify(rT) + rho)) / kk
    v = sp.sqrt((1 + kk ** 2 * s ** 2) / (1 + kk ** 2 * s ** 2 - 2 * mm / s ** (n - 2)))
    H = (n - 1) * sp.sqrt(1 + kk ** 2 * s ** 2) / s
    R = (n - 1) * (n - 2) / s ** 2
    expr = 2 * H * sp.diff(v, rho) - (v - v ** 3) * (R + n * (n - 1) * kk ** 2)
    f = sp.lambdify(rho, expr, "mpmath")
    return np.array([float(abs(f(float(x)))) for x in rhos])


# transport on round spheres

def sphere_exterior_weight(rT, m, rho_max, rhos, n=3, k=1.0):
    """Time component b and first-harmonic amplitude a of the exterior weight.

    With v from the Schwarzschild form and H = (n-1)k coth(k r):
        b' = (v/H)(n-1)k^2 b,  a' = (v/H)((n-1)/s^2 + (n-1)k^2) a,
    terminal data b = -cosh(k r), a = -k s at rho_max.
    """
    def rhs(rho, y):
        r = rT + rho
        s = area_radius(r, k)
        v = 1 + schwarzschild_w(s, m, n, k)
        H = (n - 1) * k / np.tanh(k * r)
        return [(v / H) * (n - 1) * k * k * y[0],
                (v / H) * ((n - 1) / s ** 2 + (n - 1) * k * k) * y[1]]
    rmax = rT + rho_max
    y0 = [-np.cosh(k * rmax), -k * area_radius(rmax, k)]
    sol = solve_ivp(rhs, (rho_max, 0.0), y0, dense_output=True, rtol=1e-12, atol=1e-12)
    y = sol.sol(np.asarray(rhos))
    return y[0], y[1]


def sphere_interior_weight(r0, lapse_u, times, bT, aT, n=3, k=1.0):
    """Backward collar transport for a round sphere with lapse samples ``lapse_u``.

    H1/(u eta) = H/u, so b' = (u/H)(n-1)k^2 b and a' = (u/H)((n-1)/s^2 + (n-1)k^2) a.
    The lapse is interpolated with a cubic spline through its samples.
    """
    from scipy.interpolate import CubicSpline
    u = CubicSpline(times, lapse_u)

    def rhs(t, y):
        r = sphere_radius(r0, t, n, k)
        s = area_radius(r, k)
        H = (n - 1) * k / np.tanh(k * r)
        w = u(t) / H
        return [w * (n - 1) * k * k * y[0], w * ((n - 1) / s ** 2 + (n - 1) * k * k) * y[1]]
    sol = solve_ivp(rhs, (times[-1], times[0]), [bT, aT], dense_output=True,
                    rtol=1e-12, atol=1e-14)
    y = sol.sol(np.asarray(times))
    return y[0], y[1]
