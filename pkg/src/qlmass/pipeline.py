"""Stage runners and their CSV/JSON dumps.

Stages run in the order flow -> lapse -> exterior -> transport -> mass.  Each
dump starts with a ``# config_hash=...`` line and stores enough to rebuild the
stage exactly (floats are written with 17 significant digits), so stage-wise
runs reproduce the all-in-one pipeline bit for bit.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, Scenario, read_columns
from .exterior import ExteriorFoliation, build_distance_foliation, solve_exterior_v, tail_rate
from .icf import CollarFoliation, FlowError, collar_from_radii, run_icf, select_T
from .lapse import LapseField, boundary_lapse, compute_barriers, Hu_evolution_residual, solve_lapse
from .mass import MassReport, final_mass, zeta_sweep
from .minkowski import causal_labels, lorentz_inner, zeta_set
from .transport import TransportField, causal_margin, solve_exterior_W, solve_interior_W

log = logging.getLogger(__name__)

FILES = {
    "collar": "collar.csv",
    "lapse": "lapse.csv",
    "exterior": "exterior.csv",
    "transport": "transport.csv",
    "series": "mass_series.csv",
    "report": "report.json",
}


class StageError(RuntimeError):
    """A stage failed; carries the stage name for the command line."""

    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return "%.17g" % x


def write_csv(path: Path, sc: Scenario, stage: str, columns: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    amb = sc.ambient
    names = list(columns)
    cols = [np.asarray(columns[nm]).ravel() if not isinstance(columns[nm], list) else columns[nm]
            for nm in names]
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={sc.config_hash} n={amb.n} k={_fmt(amb.k)} stage={stage}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])


def _check_header(path: Path, sc: Scenario):
    with open(path) as fh:
        first = fh.readline()
    if f"config_hash={sc.config_hash}" not in first:
        raise ConfigError(f"{path} was produced by a different configuration")


def _grid(M1: int, N: int, param, theta):
    return np.repeat(np.asarray(param), N), np.tile(np.asarray(theta), M1)


# flow

def run_flow(sc: Scenario) -> CollarFoliation:
    f = sc.section("flow")
    c = run_icf(sc.surface(), float(f["t_end"]), float(f["dt"]))
    tc = select_T(c, float(f["delta_convex"]))
    log.info("slices %.3g-convex from t=%.4g; collar runs to T=%.4g", f["delta_convex"], tc, c.T)
    return c


def write_collar(path, sc: Scenario, c: CollarFoliation):
    t, theta = _grid(c.M + 1, c.N, c.times, c.slices[0].theta)
    write_csv(path, sc, "collar", {
        "t": t, "theta": theta, "r": c.radii, "eta": c.eta, "H_eta": c.H,
        "kappa1": c.stack("kappa1"), "kappa2": c.stack("kappa2"), "R_t": c.R,
        "area_element": c.area_element})


def read_collar(path, sc: Scenario) -> CollarFoliation:
    path = Path(path)
    _check_header(path, sc)
    cols = read_columns(path, ["t", "r"])
    s = sc.surface()
    radii = cols["r"].reshape(-1, s.N)
    times = cols["t"].reshape(-1, s.N)[:, 0]
    c = collar_from_radii(s, times, radii)
    c.dt_nominal = float(sc.section("flow")["dt"])
    return c


# lapse

def run_lapse(sc: Scenario, c: CollarFoliation) -> LapseField:
    H = sc.boundary_H(c.H[0])
    u0 = boundary_lapse(c, H)
    return solve_lapse(c, u0, tol=float(sc.section("solver")["tolerance"]))


def write_lapse(path, sc: Scenario, c: CollarFoliation, lapse: LapseField):
    res = np.full_like(lapse.u, np.nan)
    if c.M >= 2:
        res[1:-1] = Hu_evolution_residual(c, lapse.u)
    t, theta = _grid(c.M + 1, c.N, c.times, c.slices[0].theta)
    write_csv(path, sc, "lapse", {"t": t, "theta": theta, "u": lapse.u,
                                  "H_u": c.H_one / lapse.u, "residual": res})


def read_lapse(path, sc: Scenario, c: CollarFoliation) -> LapseField:
    path = Path(path)
    _check_header(path, sc)
    u = read_columns(path, ["u"])["u"].reshape(-1, c.N)
    if u.shape[0] != c.M + 1:
        raise ConfigError(f"{path} does not match the collar grid")
    return LapseField(c.times.copy(), u, u[0].copy(), compute_barriers(c, u[0]))


# exterior

def exterior_v0(c: CollarFoliation, lapse: LapseField) -> np.ndarray:
    """``v0 = H_rho(0) / H_u(T) = u(T) / eta(T)``."""
    return lapse.u[-1] / c.eta[-1]


def run_exterior(sc: Scenario, c: CollarFoliation, lapse: LapseField) -> ExteriorFoliation:
    e = sc.section("exterior")
    fol = build_distance_foliation(c.slices[-1], float(e["rho_max"]), int(e["levels"]))
    return solve_exterior_v(fol, exterior_v0(c, lapse), tol=float(sc.section("solver")["tolerance"]))


def write_exterior(path, sc: Scenario, ext: ExteriorFoliation):
    fol = ext.fol
    k = fol.amb.k
    rho, theta = _grid(fol.M + 1, fol.N, fol.times, fol.slices[0].theta)
    write_csv(path, sc, "exterior", {
        "rho": rho, "theta": theta, "s": np.sinh(k * fol.stack("r")) / k, "v": ext.v,
        "v_minus_1": ext.w, "H_rho": ext.H_rho, "H_v": ext.H_v, "R_rho": fol.R})


def read_exterior(path, sc: Scenario, c: CollarFoliation) -> ExteriorFoliation:
    path = Path(path)
    _check_header(path, sc)
    e = sc.section("exterior")
    fol = build_distance_foliation(c.slices[-1], float(e["rho_max"]), int(e["levels"]))
    w = read_columns(path, ["v_minus_1"])["v_minus_1"].reshape(-1, c.N)
    if w.shape[0] != fol.M + 1:
        raise ConfigError(f"{path} does not match the exterior grid")
    return ExteriorFoliation(fol, w)


# transport

@dataclass
class Transport:
    exterior: TransportField
    interior: TransportField


def run_transport(sc: Scenario, c: CollarFoliation, lapse: LapseField,
                  ext: ExteriorFoliation) -> Transport:
    eps = float(sc.section("solver")["eps_causal"])
    We = solve_exterior_W(ext, eps=eps)
    Wi = solve_interior_W(c, lapse, We.W[0], eps=eps)
    return Transport(We, Wi)


def _full_components(W: np.ndarray, n: int) -> np.ndarray:
    """Axial-frame W lifted at azimuth zero: ``(perp, 0, ..., 0, z, t)``."""
    out = np.zeros(W.shape[:-1] + (n + 1,))
    out[..., 0] = W[..., 0]
    out[..., -2] = W[..., 1]
    out[..., -1] = W[..., 2]
    return out


def write_transport(path, sc: Scenario, tr: Transport, theta):
    n = sc.ambient.n
    eps = float(sc.section("solver")["eps_causal"])
    cols = {"domain": [], "param": [], "theta": []}
    comps = []
    for name, f in (("exterior", tr.exterior), ("interior", tr.interior)):
        M1, N = f.W.shape[:2]
        p, th = _grid(M1, N, f.times, theta)
        cols["domain"] += [name] * (M1 * N)
        cols["param"] += list(p)
        cols["theta"] += list(th)
        comps.append(_full_components(f.W, n).reshape(-1, n + 1))
    full = np.concatenate(comps)
    for i in range(n):
        cols[f"W_{i + 1}"] = full[:, i]
    cols["W_t"] = full[:, n]
    cols["inner"] = lorentz_inner(full, full)
    cols["class"] = list(causal_labels(full, eps))
    write_csv(path, sc, "transport", cols)


def read_transport(path, sc: Scenario, c: CollarFoliation, ext: ExteriorFoliation) -> Transport:
    path = Path(path)
    _check_header(path, sc)
    n = sc.ambient.n
    cols = read_columns(path, ["W_1", f"W_{n}", "W_t"])
    W = np.stack([cols["W_1"], cols[f"W_{n}"], cols["W_t"]], axis=1)
    ne = (ext.fol.M + 1) * c.N
    ni = (c.M + 1) * c.N
    if W.shape[0] != ne + ni:
        raise ConfigError(f"{path} does not match the exterior and collar grids")
    We = W[:ne].reshape(ext.fol.M + 1, c.N, 3)
    Wi = W[ne:].reshape(c.M + 1, c.N, 3)
    return Transport(TransportField(ext.fol.times.copy(), We, We[-1].copy()),
                     TransportField(c.times.copy(), Wi, We[0].copy()))


# mass

def zetas_for(sc: Scenario) -> np.ndarray:
    m = sc.section("mass")
    return zeta_set(sc.ambient.n, int(m["zeta_seed"]), int(m["zeta_count"]))


def run_mass(sc: Scenario, c: CollarFoliation, lapse: LapseField, ext: ExteriorFoliation,
             tr: Transport) -> MassReport:
    f = sc.section("flow")
    dt_in = float(np.max(np.diff(c.times))) if c.M else float(f["dt"])
    dt_ex = float(np.max(np.diff(ext.rho)))
    rep = final_mass(c, lapse, tr.interior, ext, tr.exterior, zetas_for(sc), dt_in, dt_ex,
                     allowance=float(sc.section("solver")["monotone_allowance"]))
    amb = sc.ambient
    sweep = zeta_sweep(rep.mass_vector)
    scale = max(1.0, float(np.max(np.abs(rep.mass_vector))))
    sweep_nonpositive = bool(np.all(sweep <= 1e-9 * scale))
    b = lapse.barriers
    rep.provenance = {
        "config_hash": sc.config_hash, "n": amb.n, "k": amb.k,
        "grid": {"N": c.N, "M": c.M, "levels": ext.fol.M},
    }
    rep.tolerances.update({
        "solver": float(sc.section("solver")["tolerance"]),
        "eps_causal": float(sc.section("solver")["eps_causal"]),
    })
    rep.provenance["diagnostics"] = {
        "T": c.T,
        "convexity_time": select_T(c, float(f["delta_convex"])),
        "dt_interior_max": dt_in,
        "drho": dt_ex,
        "barriers": {"C": b.C, "beta": b.beta, "gamma": b.gamma, "gamma_clamped": b.gamma_clamped},
        "exterior_tail_rate": tail_rate(ext.rho, ext.w),
        "causal_margin_exterior": causal_margin(tr.exterior.W),
        "causal_margin_interior": causal_margin(tr.interior.W),
        "zeta_sweep_nonpositive": sweep_nonpositive,
        "zeta_sweep_consistent": sweep_nonpositive == rep.is_future_causal,
        "position_series_nonpositive": all(r.position_end <= 1e-8 * max(1.0, abs(r.position_end))
                                           for r in rep.records),
    }
    return rep


def report_json(rep: MassReport) -> dict:
    out = rep.to_json()
    out["diagnostics"] = rep.provenance.get("diagnostics", {})
    out["ok"] = rep.ok
    return out


def _finite(obj):
    """JSON has no infinities; non-finite floats become their string names."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_report(path, rep: MassReport):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_finite(report_json(rep)), indent=2) + "\n")


def write_series(path, sc: Scenario, rep: MassReport):
    cols = {"zeta_index": [], "domain": [], "param": [], "value": []}
    for i, r in enumerate(rep.records):
        for name, s in (("interior", r.interior), ("exterior", r.exterior)):
            cols["zeta_index"] += [str(i)] * s.values.size
            cols["domain"] += [name] * s.values.size
            cols["param"] += list(s.times)
            cols["value"] += list(s.values)
    write_csv(path, sc, "mass_series", cols)


@dataclass
class PipelineResult:
    collar: CollarFoliation
    lapse: LapseField
    exterior: ExteriorFoliation
    transport: Transport
    report: MassReport


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except (FlowError, RuntimeError, ValueError, ArithmeticError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise StageError(name, exc) from exc


def run_pipeline(sc: Scenario, out_dir=None, write: bool = True) -> PipelineResult:
    out = Path(out_dir) if out_dir is not None else sc.output_dir
    c = _stage("flow", run_flow, sc)
    lapse = _stage("lapse", run_lapse, sc, c)
    ext = _stage("exterior", run_exterior, sc, c, lapse)
    tr = _stage("transport", run_transport, sc, c, lapse, ext)
    rep = _stage("mass", run_mass, sc, c, lapse, ext, tr)
    if write:
        write_collar(out / FILES["collar"], sc, c)
        write_lapse(out / FILES["lapse"], sc, c, lapse)
        write_exterior(out / FILES["exterior"], sc, ext)
        write_transport(out / FILES["transport"], sc, tr, c.slices[0].theta)
        write_series(out / FILES["series"], sc, rep)
        write_report(out / FILES["report"], rep)
    return PipelineResult(c, lapse, ext, tr, rep)
