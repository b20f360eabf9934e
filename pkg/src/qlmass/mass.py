"""Mass functionals along the collar and the exterior end, and the final mass vector.

For a future null ``zeta`` the interior series

    m(t) = sum over cells of (H_eta - H_u) (W . zeta) dsigma_t

and its exterior analogue with ``(H_rho - H_v)`` and the exterior weight are
non-increasing in the foliation parameter.  All fields are axisymmetric, so the
azimuthal integral of the perpendicular part of ``W`` vanishes and only the
axial and time components of ``zeta`` enter.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exterior import ExteriorFoliation
from .icf import Foliation
from .lapse import LapseField
from .minkowski import CausalClass, classify_causal, is_future_null, lorentz_inner
from .transport import TransportField

MONOTONE_BASE_TOL = 1e-8
# discretisation allowance per unit of (dt + N^-2); see tests/test_mass.py for the calibration
MONOTONE_ALLOWANCE = 2e-3
JUNCTION_TOL = 1e-10
CLASSIFY_EPS = 1e-9


def axial_pairing(W, zeta) -> np.ndarray:
    """Azimuthal average of ``W . zeta`` for axial-frame ``W``."""
    zeta = np.asarray(zeta, dtype=float)
    W = np.asarray(W)
    return W[..., 1] * zeta[-2] - W[..., 2] * zeta[-1]


@dataclass
class MassSeries:
    zeta: np.ndarray
    times: np.ndarray
    values: np.ndarray
    areas: np.ndarray

    @property
    def slack(self) -> float:
        """Largest upward jump between consecutive values (0 for a non-increasing series)."""
        if self.values.size < 2:
            return 0.0
        return float(max(0.0, np.max(np.diff(self.values))))

    def scaled(self, lam: float) -> "MassSeries":
        return MassSeries(lam * self.zeta, self.times, lam * self.values, self.areas)


def _series(fol: Foliation, gap, W, zeta) -> MassSeries:
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape != (fol.amb.dim,):
        raise ValueError(f"zeta must have {fol.amb.dim} components")
    if not is_future_null(zeta):
        raise ValueError("zeta must be future-directed null")
    W = np.asarray(W)
    shape = (fol.M + 1, fol.N)
    for name, a in (("curvature gap", gap), ("W", W[..., 0])):
        if np.shape(a) != shape:
            raise ValueError(f"grid mismatch: {name} has shape {np.shape(a)}, expected {shape}")
    dsigma = fol.area_element
    vals = np.sum(gap * axial_pairing(W, zeta) * dsigma, axis=1)
    return MassSeries(zeta, fol.times.copy(), vals, dsigma.sum(axis=1))


def mass_series(c: Foliation, lapse: LapseField, Wf: TransportField, zeta,
                swap: bool = False) -> MassSeries:
    """Interior series ``m(t)``; ``swap`` exchanges H_eta and H_u (negative control)."""
    u = lapse.u
    gap = c.H * (u - c.eta) / u
    return _series(c, -gap if swap else gap, Wf.W, zeta)


def exterior_mass_series(ext: ExteriorFoliation, Wf: TransportField, zeta) -> MassSeries:
    return _series(ext.fol, ext.H_gap, Wf.W, zeta)


def position_series(ext: ExteriorFoliation, zeta) -> MassSeries:
    """Exterior series with ``X`` in place of the weight (expected to end up non-positive)."""
    X = ext.fol.stack("X")
    return _series(ext.fol, ext.H_gap, X, zeta)


def monotone_tolerance(dt: float, N: int, allowance: float = MONOTONE_ALLOWANCE,
                       base: float = MONOTONE_BASE_TOL) -> float:
    return base + allowance * (dt + N ** -2.0)


@dataclass(frozen=True)
class MonotoneVerdict:
    passed: bool
    tol: float
    worst_excess: float
    worst_index: int | None


def verify_monotonicity(series: MassSeries, tol: float) -> MonotoneVerdict:
    """Every forward difference must stay below ``tol * (1 + |m|)``."""
    v = series.values
    if v.size < 2:
        return MonotoneVerdict(True, tol, 0.0, None)
    if not np.all(np.isfinite(v)):
        return MonotoneVerdict(False, tol, float("inf"), int(np.argmin(np.isfinite(v))))
    jumps = np.diff(v)
    allowed = tol * (1.0 + np.maximum(np.abs(v[:-1]), np.abs(v[1:])))
    excess = jumps - allowed
    i = int(np.argmax(excess))
    return MonotoneVerdict(bool(excess[i] <= 0), tol, float(excess[i]), i if excess[i] > 0 else None)


@dataclass
class ZetaRecord:
    zeta: np.ndarray
    interior: MassSeries
    exterior: MassSeries
    interior_verdict: MonotoneVerdict
    exterior_verdict: MonotoneVerdict
    junction_gap: float
    position_end: float

    @property
    def chain_ok(self) -> bool:
        return (self.interior_verdict.passed and self.exterior_verdict.passed
                and self.junction_gap <= JUNCTION_TOL * (1 + abs(self.interior.values[-1])))


@dataclass
class MassReport:
    mass_vector: np.ndarray
    causal_class: CausalClass
    records: list
    tolerances: dict
    provenance: dict = field(default_factory=dict)

    @property
    def all_monotone(self) -> bool:
        return all(r.interior_verdict.passed and r.exterior_verdict.passed for r in self.records)

    @property
    def junction_ok(self) -> bool:
        return all(r.junction_gap <= JUNCTION_TOL * (1 + abs(r.interior.values[-1]))
                   for r in self.records)

    @property
    def is_future_causal(self) -> bool:
        """Future causal (or zero) mass vector; only meaningful when every check passed."""
        return self.causal_class in (CausalClass.FUTURE_TIMELIKE, CausalClass.FUTURE_NULL,
                                     CausalClass.ZERO)

    @property
    def ok(self) -> bool:
        return self.all_monotone and self.junction_ok and self.is_future_causal

    def to_json(self) -> dict:
        grid = self.provenance.get("grid", {})
        return {
            "config_hash": self.provenance.get("config_hash", ""),
            "n": self.provenance.get("n"),
            "k": self.provenance.get("k"),
            "grid": grid,
            "zetas": [{
                "zeta": r.zeta.tolist(),
                "interior_monotone": r.interior_verdict.passed,
                "exterior_monotone": r.exterior_verdict.passed,
                "m0": float(r.interior.values[0]),
                "mT": float(r.interior.values[-1]),
                "m_ext0": float(r.exterior.values[0]),
                "m_ext_end": float(r.exterior.values[-1]),
                "interior_slack": r.interior.slack,
                "exterior_slack": r.exterior.slack,
                "junction_gap": r.junction_gap,
                "position_series_end": r.position_end,
            } for r in self.records],
            "mass_vector": self.mass_vector.tolist(),
            "causal_class": self.causal_class.value,
            "tolerances": self.tolerances,
            "all_monotone": self.all_monotone,
            "junction_ok": self.junction_ok,
        }


def mass_vector(c: Foliation, lapse: LapseField, Wf: TransportField) -> np.ndarray:
    """``sum (H0 - H) W0 dsigma`` with ``W0 = -W(., 0)`` as a full Lorentz vector."""
    g0 = c.slices[0]
    u0 = lapse.u[0]
    W0 = -Wf.W[0]
    w = c.H[0] * (u0 - c.eta[0]) / u0 * g0.area_element
    out = np.zeros(c.amb.dim)
    out[-2] = np.sum(w * W0[:, 1])
    out[-1] = np.sum(w * W0[:, 2])
    return out


def final_mass(c: Foliation, lapse: LapseField, Wf: TransportField, ext: ExteriorFoliation,
               Wext: TransportField, zetas, dt_interior: float, dt_exterior: float,
               allowance: float = MONOTONE_ALLOWANCE, eps: float = CLASSIFY_EPS) -> MassReport:
    N = c.N
    tol_in = monotone_tolerance(dt_interior, N, allowance)
    tol_ex = monotone_tolerance(dt_exterior, N, allowance)
    records = []
    for z in np.asarray(zetas, dtype=float):
        mi = mass_series(c, lapse, Wf, z)
        me = exterior_mass_series(ext, Wext, z)
        pos = position_series(ext, z)
        records.append(ZetaRecord(
            z, mi, me, verify_monotonicity(mi, tol_in), verify_monotonicity(me, tol_ex),
            float(abs(mi.values[-1] - me.values[0])), float(pos.values[-1])))
    vec = mass_vector(c, lapse, Wf)
    cls = classify_causal(vec, eps).cls
    tolerances = {"monotone_interior": tol_in, "monotone_exterior": tol_ex,
                  "monotone_allowance": allowance, "junction": JUNCTION_TOL,
                  "classify_eps": eps}
    return MassReport(vec, cls, records, tolerances)


def zeta_sweep(vec, count: int = 16) -> np.ndarray:
    """``inner(vec, zeta)`` over ``count`` future null directions in the axial plane and beyond."""
    vec = np.asarray(vec, dtype=float)
    n = vec.size - 1
    rng = np.random.default_rng(12345)
    dirs = rng.normal(size=(count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    zetas = np.concatenate([dirs, np.ones((count, 1))], axis=1)
    return lorentz_inner(zetas, vec)
