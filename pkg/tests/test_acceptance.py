"""Acceptance criteria 1-11 at desk scale (n = 3, k = 1, N = 128).

Each test records one PASS/FAIL line (printed in the terminal summary) and then
asserts the same condition.
"""
import numpy as np
import pytest

from conftest import record_criterion, scenario
from oracles import schwarzschild_mass, schwarzschild_residual, schwarzschild_w, sphere_radius
from qlmass.exterior import build_distance_foliation, solve_exterior_v
from qlmass.geometry import RadialSurface, compute_geometry
from qlmass.icf import fit_decay_rate, flow_diagnostics, run_icf
from qlmass.lapse import (check_barriers, mean_curvature_of_lapse,
                          principal_of_lapse, solve_lapse, verify_Hu_evolution)
from qlmass.mass import mass_series, monotone_tolerance, verify_monotonicity
from qlmass.minkowski import AmbientSpace, CausalClass
from qlmass.pipeline import FILES, run_pipeline, zetas_for
from qlmass.transport import min_null_pairing, past_causal_mask, solve_exterior_W, solve_interior_W
from test_transport import random_past_causal

N = 128
AMB = AmbientSpace(3, 1.0)
RANDOM_SEED = 20261016
N_RANDOM = 20


def check(number, title, passed, detail):
    record_criterion(number, title, passed, detail)
    assert passed, detail


def random_scenarios():
    rng = np.random.default_rng(RANDOM_SEED)
    out = []
    for _ in range(N_RANDOM):
        amp = float(rng.uniform(0.005, 0.05))
        mode = int(rng.choice([2, 3]))
        alpha = float(rng.uniform(0.7, 1.0))
        out.append(scenario(surface={"kind": "perturbed_sphere", "amp": amp, "mode": mode, "N": N},
                            boundary={"alpha": alpha}))
    return out


@pytest.fixture(scope="module")
def random_runs():
    return [(sc, run_pipeline(sc, write=False)) for sc in random_scenarios()]


@pytest.fixture(scope="module")
def sphere_runs():
    return {a: run_pipeline(scenario(surface={"N": N}, boundary={"alpha": a}), write=False)
            for a in (0.9, 1.0)}


def label(sc):
    s, b = sc.section("surface"), sc.section("boundary")
    return f"amp={s['amp']:.3f} mode={s['mode']} alpha={b['alpha']:.3f}"


def test_01_sphere_flow_law():
    exact = float(sphere_radius(1.0, 2.0))
    errs = []
    for dt in (1e-2, 5e-3):
        c = run_icf(RadialSurface.sphere(AMB, 1.0, N), 2.0, dt)
        errs.append(abs(c.slices[-1].r[0] / exact - 1))
    ratio = errs[0] / errs[1]
    check(1, "sphere flow law", errs[0] <= 1e-6 and 3.6 <= ratio <= 4.4,
          f"rel err {errs[0]:.2e} (<= 1e-6) at t=2, dt halving ratio {ratio:.3f} (~4)")


def test_02_umbilicity_decay():
    c = run_icf(RadialSurface.perturbed_sphere(AMB, 1.0, 0.05, 2, N), 4.0, 1e-2)
    rate = flow_diagnostics(c).fitted_decay_rate
    t = np.linspace(0, 4, 401)
    closed = fit_decay_rate(t, 1 / np.tanh(sphere_radius(1.0, t)) - 1)
    target = 1 / (AMB.n - 1)
    ok = rate >= 0.9 * target and abs(closed / (2 * target) - 1) <= 0.1
    check(2, "umbilicity decay", ok,
          f"perturbed rate {rate:.4f} (>= 0.9 x {target}), sphere closed-form rate {closed:.4f} "
          f"(2/(n-1) = {2 * target} within 10%)")


def test_03_lapse_fixed_point():
    res = []
    dev = None
    for n_cells in (32, 64, N):
        c = run_icf(RadialSurface.perturbed_sphere(AMB, 1.0, 0.05, 2, n_cells), 1.0, 1e-2)
        res.append(verify_Hu_evolution(c, c.eta))
        if n_cells == N:
            lapse = solve_lapse(c, c.eta[0].copy())
            dev = float(np.max(np.abs(lapse.u / c.eta - 1)))
            res_u = verify_Hu_evolution(c, lapse.u)
    ratios = [res[0] / res[1], res[1] / res[2]]
    ok = dev <= 1e-4 and res[-1] <= 1e-4 and res_u <= 1e-4 and min(ratios) > 3.0
    check(3, "lapse fixed point", ok,
          f"max |u/eta - 1| = {dev:.2e} (<= 1e-4); residual {res[-1]:.2e} for eta, {res_u:.2e} "
          f"for solved u (<= 1e-4); refinement ratios {ratios[0]:.2f}, {ratios[1]:.2f}")


def test_04_barrier_containment(random_runs):
    bad = []
    for sc, r in random_runs:
        if check_barriers(r.lapse) is not None:
            bad.append(label(sc))
    check(4, "barrier containment", not bad,
          f"{N_RANDOM - len(bad)}/{N_RANDOM} randomized scenarios inside (beta e^-gt, C)"
          + (f"; outside: {bad}" if bad else ""))


def test_05_scaling_identities(random_runs):
    worst_H = worst_A = 0.0
    for _, r in random_runs[:5]:
        c, u = r.collar, r.lapse.u
        ref = c.eta * c.H
        worst_H = max(worst_H, float(np.max(np.abs(u * mean_curvature_of_lapse(c, u) - ref) / ref)))
        refA = c.eta[..., None] * c.stack("principal")
        got = u[..., None] * principal_of_lapse(c, u)
        worst_A = max(worst_A, float(np.max(np.abs(got - refA) / np.abs(refA))))
    check(5, "scaling identities", worst_H <= 1e-12 and worst_A <= 1e-12,
          f"max rel |uH_u - eta H_eta| = {worst_H:.1e}, |uA_u - eta A_eta| = {worst_A:.1e} (<= 1e-12)")


def test_06_exterior_fixed_point_and_schwarzschild(random_runs):
    c = random_runs[0][1].collar
    fol = build_distance_foliation(c.slices[-1], 10.0, 2000)
    ones = solve_exterior_v(fol, np.ones(N))
    exact_one = bool(np.array_equal(ones.v, np.ones_like(ones.v)))

    rT = float(sphere_radius(1.0, 2.0))
    v0 = 1.05
    m = schwarzschild_mass(np.sinh(rT), v0)
    resid = float(np.max(schwarzschild_residual(rT, m, np.linspace(0, 10, 41))))
    sfol = build_distance_foliation(compute_geometry(RadialSurface.sphere(AMB, rT, N)), 10.0, 4000)
    ext = solve_exterior_v(sfol, np.full(N, v0))
    ref = 1 + schwarzschild_w(np.sinh(rT + ext.rho), m)
    err = float(np.max(np.abs(ext.v - ref[:, None])))
    check(6, "exterior fixed point and Schwarzschild oracle",
          exact_one and resid <= 1e-8 and err <= 1e-6,
          f"v0=1 gives v=1 exactly: {exact_one}; substitution residual {resid:.1e} (<= 1e-8); "
          f"numeric vs closed form {err:.1e} (<= 1e-6)")


def test_07_transport_causal_and_linear(random_runs):
    sc, r = random_runs[1]
    c, lapse, ext = r.collar, r.lapse, r.exterior
    theta = c.slices[0].theta
    rng = np.random.default_rng(7)
    WT = np.stack([random_past_causal(theta, rng) for _ in range(100)], axis=-1)
    We = solve_exterior_W(ext, WT, check=False).W
    Wi = solve_interior_W(c, lapse, We[0], check=False).W
    violations = sum(int(np.sum(~past_causal_mask(np.moveaxis(W, -1, 0), 1e-8))) for W in (We, Wi))
    a, b = rng.normal(size=(2, N, 3))
    Wa = solve_interior_W(c, lapse, a, check=False).W
    Wb = solve_interior_W(c, lapse, b, check=False).W
    Wab = solve_interior_W(c, lapse, a + b, check=False).W
    lin = float(np.max(np.abs(Wab - Wa - Wb)) / np.max(np.abs(Wab)))
    check(7, "transport causal preservation and linearity", violations == 0 and lin <= 1e-12,
          f"100 random past-causal profiles on {label(sc)}: {violations} violating grid points; "
          f"superposition error {lin:.1e} (<= 1e-12)")


def test_08_monotonicity(random_runs, sphere_runs):
    failing = []
    worst = 0.0
    for sc, r in random_runs:
        rep = r.report
        if not rep.all_monotone:
            failing.append(label(sc))
        for rec in rep.records:
            worst = max(worst, rec.interior_verdict.worst_excess, rec.exterior_verdict.worst_excess)
    s = sphere_runs[0.9]
    tol = monotone_tolerance(float(np.max(np.diff(s.collar.times))), N)
    swapped_fail = all(
        not verify_monotonicity(mass_series(s.collar, s.lapse, s.transport.interior, z, swap=True),
                                tol).passed
        for z in zetas_for(scenario()))
    nz = len(zetas_for(scenario()))
    check(8, "monotonicity", not failing and swapped_fail,
          f"{N_RANDOM - len(failing)}/{N_RANDOM} scenarios monotone for all {nz} test zetas "
          f"(worst excess over tolerance {worst:.1e}); swapped control fails: {swapped_fail}"
          + (f"; failing: {failing}" if failing else ""))


def test_09_junction(random_runs, sphere_runs):
    gaps = [rec.junction_gap / (1 + abs(rec.interior.values[-1]))
            for _, r in random_runs + [(None, s) for s in sphere_runs.values()]
            for rec in r.report.records]
    worst = max(gaps)
    check(9, "junction consistency", worst <= 1e-10,
          f"max |m(T) - m_ext(0)| / (1 + |m|) = {worst:.1e} over {len(gaps)} series (<= 1e-10)")


def test_10_mass_vector_future_causal(sphere_runs):
    zero = sphere_runs[1.0].report
    timelike = sphere_runs[0.9].report
    vec = timelike.mass_vector
    spatial = float(np.max(np.abs(vec[:-1])) / vec[-1])
    pert = run_pipeline(scenario(surface={"kind": "perturbed_sphere", "amp": 0.05, "mode": 2,
                                          "N": N}, boundary={"alpha": 0.8}), write=False).report
    ok = (zero.causal_class is CausalClass.ZERO and not np.any(zero.mass_vector)
          and timelike.causal_class is CausalClass.FUTURE_TIMELIKE and spatial <= 1e-10
          and pert.causal_class in (CausalClass.FUTURE_TIMELIKE, CausalClass.FUTURE_NULL)
          and pert.all_monotone and pert.junction_ok)
    check(10, "mass vector future causal", ok,
          f"alpha=1: {zero.causal_class.value}; alpha=0.9: {timelike.causal_class.value} "
          f"tau={vec[-1]:.6f}, spatial/tau={spatial:.1e} (<= 1e-10); perturbed alpha=0.8: "
          f"{pert.causal_class.value} tau={pert.mass_vector[-1]:.6f}")


def test_11_determinism(tmp_path):
    sc = scenario(surface={"kind": "perturbed_sphere", "amp": 0.04, "mode": 3, "N": N},
                  boundary={"alpha": 0.8})
    run_pipeline(sc, tmp_path / "a")
    run_pipeline(sc, tmp_path / "b")
    same = [(tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
            for f in FILES.values()]
    check(11, "determinism", all(same), f"{sum(same)}/{len(same)} output files bit-identical")


def test_07b_null_pairing_maximum_principle(random_runs):
    # supplementary to 7: W.zeta >= 0 at the outer end stays >= 0 inward
    _, r = random_runs[2]
    We = r.transport.exterior.W
    Wi = r.transport.interior.W
    rng = np.random.default_rng(11)
    for _ in range(20):
        z = np.append(rng.normal(size=3), 0.0)
        z[-1] = np.linalg.norm(z[:-1])
        if np.all(min_null_pairing(We[-1], z) >= 0):
            scale = np.abs(We).max()
            assert np.min(min_null_pairing(We, z)) >= -1e-10 * scale
            assert np.min(min_null_pairing(Wi, z)) >= -1e-10 * scale
