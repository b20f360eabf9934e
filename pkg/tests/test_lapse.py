import numpy as np
import pytest

from oracles import sphere_lapse
from qlmass.geometry import RadialSurface
from qlmass.icf import run_icf
from qlmass.lapse import (BarrierViolation, boundary_lapse, check_barriers, mean_curvature_of_lapse,
                          principal_of_lapse, solve_lapse, verify_Hu_evolution)


@pytest.fixture(scope="module")
def perturbed_128(amb):
    return run_icf(RadialSurface.perturbed_sphere(amb, 1.0, 0.05, 2, 128), 1.0, 1e-2)


def test_fixed_point_reproduces_eta(perturbed_128):
    c = perturbed_128
    lapse = solve_lapse(c, c.eta[0].copy())
    assert np.max(np.abs(lapse.u / c.eta - 1)) <= 1e-4


@pytest.fixture(scope="module")
def fine_spheres(amb):
    return {dt: run_icf(RadialSurface.sphere(amb, 1.0, 16), 2.0, dt) for dt in (1e-2, 5e-3)}


def test_fixed_point_on_sphere(sphere_collar):
    c = sphere_collar
    lapse = solve_lapse(c, c.eta[0].copy())
    assert np.max(np.abs(lapse.u / c.eta - 1)) < 1e-5


def test_Hu_residual_second_order(amb):
    res = []
    for N in (32, 64, 128):
        c = run_icf(RadialSurface.perturbed_sphere(amb, 1.0, 0.05, 2, N), 1.0, 1e-2)
        res.append(verify_Hu_evolution(c, c.eta))
    assert res[-1] <= 1e-4
    assert res[0] / res[1] > 3.0 and res[1] / res[2] > 3.0


def test_Hu_residual_small_for_solved_lapse(perturbed_128):
    c = perturbed_128
    lapse = solve_lapse(c, 0.9 * c.eta[0])
    assert verify_Hu_evolution(c, lapse.u) <= 1e-4


def test_Hu_residual_detects_wrong_lapse(perturbed_128, rng):
    c = perturbed_128
    bogus = c.eta * (1 + 0.05 * rng.uniform(-1, 1, size=c.eta.shape))
    assert verify_Hu_evolution(c, bogus) > 100 * verify_Hu_evolution(c, c.eta)


def test_sphere_lapse_matches_ode(fine_spheres):
    c = fine_spheres[5e-3]
    u0 = boundary_lapse(c, 0.9 * c.slices[0].H)
    lapse = solve_lapse(c, u0)
    ref = sphere_lapse(1.0, float(u0[0]), c.times)
    assert np.max(np.abs(lapse.u[:, 0] / ref - 1)) <= 1e-6
    assert np.ptp(lapse.u, axis=1).max() < 1e-13


def test_sphere_Hu_residual_second_order_in_dt(fine_spheres):
    res = []
    for dt, c in sorted(fine_spheres.items(), reverse=True):
        lapse = solve_lapse(c, boundary_lapse(c, 0.9 * c.slices[0].H))
        res.append(verify_Hu_evolution(c, lapse.u))
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.15)


def test_scaling_identities(perturbed_128):
    c = perturbed_128
    lapse = solve_lapse(c, boundary_lapse(c, 0.8 * c.slices[0].H))
    u = lapse.u
    Hu = mean_curvature_of_lapse(c, u)
    assert np.max(np.abs(u * Hu - c.eta * c.H) / (c.eta * c.H)) <= 1e-12
    Au = principal_of_lapse(c, u)
    ref = c.eta[..., None] * c.stack("principal")
    assert np.max(np.abs(u[..., None] * Au - ref) / np.abs(ref)) <= 1e-12


def test_boundary_lapse_gives_prescribed_H(perturbed_collar):
    c = perturbed_collar
    H_b = 0.85 * c.slices[0].H
    u0 = boundary_lapse(c, H_b)
    assert np.max(np.abs(mean_curvature_of_lapse(c, u0)[0] / H_b - 1)) <= 1e-12
    assert np.array_equal(boundary_lapse(c, c.slices[0].H), c.eta[0])
    assert np.allclose(mean_curvature_of_lapse(c, 2 * c.eta), c.H / 2, rtol=1e-15)
    with pytest.raises(ValueError):
        boundary_lapse(c, -H_b)


def test_barriers_contain_solution(perturbed_collar):
    c = perturbed_collar
    for alpha in (0.7, 0.85, 1.0):
        lapse = solve_lapse(c, boundary_lapse(c, alpha * c.slices[0].H))
        b = lapse.barriers
        assert check_barriers(lapse) is None
        assert np.all(lapse.u < b.C)
        assert np.all(lapse.u > b.lower(lapse.times)[:, None])


def test_barrier_violation_raised(perturbed_collar):
    c = perturbed_collar
    lapse = solve_lapse(c, c.eta[0].copy())
    lapse.u[5, 3] = 10 * lapse.barriers.C
    assert check_barriers(lapse)[:2] == (5, 3)
    assert issubclass(BarrierViolation, RuntimeError)


def test_lapse_rejects_bad_u0(sphere_collar):
    with pytest.raises(ValueError):
        solve_lapse(sphere_collar, -sphere_collar.eta[0])
    with pytest.raises(ValueError):
        solve_lapse(sphere_collar, np.ones(3))
