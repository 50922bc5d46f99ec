"""Stochastic integrator: determinism, physics checks against closed forms
on synthetic coefficient tables, step-size consistency, interpolation."""
import math

import numpy as np
import pytest

from conftest import THREADS, make_synthetic_table
from nemclock.langevin import (
    ExcursionError,
    SimConfig,
    column_interpolant,
    integrate_trajectory,
    interpolate,
    sample_stationary_ensemble,
    _integrate_block,
)
from nemclock.params import default_params
from nemclock.transport import GridSpec, build_coefficient_table

TWO_PI = 2.0 * math.pi


def _sim(periods, *, burn=0.0, seed=7, members=1, stride=1, dt=math.pi / 100):
    return SimConfig(
        time_step=dt,
        burn_in=burn * TWO_PI,
        duration=(burn + periods) * TWO_PI,
        seed=seed,
        ensemble_size=members,
        record_stride=stride,
    )


# ------------------------------------------------------------ bookkeeping --


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(time_step=0.0)
    with pytest.raises(ValueError):
        SimConfig(burn_in=10.0, duration=5.0)
    with pytest.raises(ValueError):
        SimConfig(ensemble_size=0)
    with pytest.raises(ValueError):
        SimConfig(record_stride=0)


def test_recording_grid(ou_table, params100):
    sim = _sim(4, burn=2, stride=7)
    traj = integrate_trajectory(ou_table, params100, sim)
    n_expected = (sim.total_steps - sim.burn_steps) // 7 + 1
    assert traj.times.shape == traj.positions.shape == traj.velocities.shape
    assert traj.times.size == n_expected
    assert traj.times[0] == 0.0
    assert traj.sample_spacing == pytest.approx(7 * sim.time_step)
    np.testing.assert_allclose(np.diff(traj.times), 7 * sim.time_step)


def test_determinism_same_seed(ou_table, params100):
    sim = _sim(5, seed=123)
    a = integrate_trajectory(ou_table, params100, sim)
    b = integrate_trajectory(ou_table, params100, sim)
    np.testing.assert_array_equal(a.positions, b.positions)
    np.testing.assert_array_equal(a.velocities, b.velocities)
    c = integrate_trajectory(ou_table, params100, _sim(5, seed=124))
    assert not np.array_equal(a.positions, c.positions)


def test_ensemble_members_are_distinct_and_thread_invariant(ou_table, params100):
    sim = _sim(3, seed=11, members=5)
    serial = sample_stationary_ensemble(ou_table, params100, sim, threads=1)
    threaded = sample_stationary_ensemble(ou_table, params100, sim, threads=THREADS)
    assert len(serial) == len(threaded) == 5
    for one, two in zip(serial, threaded):
        assert one.index == two.index
        np.testing.assert_array_equal(one.positions, two.positions)
        np.testing.assert_array_equal(one.velocities, two.velocities)
    fingerprints = {t.fingerprint() for t in serial}
    assert len(fingerprints) == 5
    assert not np.array_equal(serial[0].positions, serial[1].positions)


# ---------------------------------------------------------------- physics --


def test_symplectic_harmonic_motion(params100):
    # zero friction, zero noise: plain harmonic motion; the kick-then-drift
    # update preserves energy to O(dt) over many periods and tracks phase
    table = make_synthetic_table(
        np.linspace(-8.0, 8.0, 17), friction=0.0, diffusion=0.0, tag="harmonic"
    )
    sim = _sim(50, seed=3, dt=math.pi / 200)
    traj = integrate_trajectory(table, params100, sim)
    x0, v0 = traj.positions[0], traj.velocities[0]
    energy = 0.5 * traj.velocities**2 + 0.5 * traj.positions**2
    assert np.all(np.abs(energy / energy[0] - 1.0) < 0.02)
    exact = x0 * np.cos(traj.times) + v0 * np.sin(traj.times)
    amp = math.hypot(x0, v0)
    assert np.max(np.abs(traj.positions - exact)) < 0.05 * amp


def test_ring_down_energy_monotone(params100):
    table = make_synthetic_table(
        np.linspace(-8.0, 8.0, 17), friction=0.1, diffusion=0.0, tag="damped"
    )
    sim = _sim(30, seed=5)
    traj = integrate_trajectory(table, params100, sim)
    period_samples = int(round(TWO_PI / traj.sample_spacing))
    boundaries = np.arange(0, traj.times.size, period_samples)
    energy = (
        0.5 * traj.velocities[boundaries] ** 2
        + 0.5 * traj.positions[boundaries] ** 2
    )
    assert np.all(np.diff(energy) < 0.0)


def test_ou_stationary_variance(ou_table, params100):
    # constant friction 0.5 and diffusion 1.0: Var[x] = D/(2 m^2 gamma w0^2)
    sim = _sim(150, burn=10, seed=29, members=8)
    members = sample_stationary_ensemble(
        ou_table, params100, sim, threads=THREADS
    )
    pooled = np.concatenate([t.positions for t in members])
    assert pooled.var() == pytest.approx(1.0, rel=0.02)
    # velocity variance matches the same stationary level: Var[v] = D/(2 m^2 gamma)
    pooled_v = np.concatenate([t.velocities for t in members])
    assert pooled_v.var() == pytest.approx(1.0, rel=0.02)


def test_negative_friction_escapes_grid(params100):
    table = make_synthetic_table(
        np.linspace(-3.0, 3.0, 13), friction=-0.2, diffusion=0.0, tag="growth"
    )
    with pytest.raises(ExcursionError) as info:
        integrate_trajectory(table, params100, _sim(60, seed=2))
    err = info.value
    assert err.time > 0.0
    assert abs(err.position) > 3.0
    assert err.index == 0


def test_step_halving_shared_noise(ou_table, params100):
    # the same Brownian path at two resolutions: pairing fine normals so the
    # per-step Wiener increments agree keeps the two solutions close
    periods = 10
    coarse = _sim(periods, seed=0, dt=math.pi / 100)
    fine = _sim(periods, seed=0, dt=math.pi / 200)
    rng = np.random.Generator(np.random.Philox(20240817))
    init = rng.standard_normal((1, 2))
    fine_noise = rng.standard_normal((1, fine.total_steps))

    def fine_source(indices, start, n):
        if start == -1:
            return init
        return fine_noise[:, start : start + n]

    def coarse_source(indices, start, n):
        if start == -1:
            return init
        pairs = fine_noise[:, 2 * start : 2 * (start + n)]
        return (pairs[:, 0::2] + pairs[:, 1::2]) / math.sqrt(2.0)

    _, xs_c, _ = _integrate_block(
        ou_table, params100, coarse, [0], noise_source=coarse_source
    )
    _, xs_f, _ = _integrate_block(
        ou_table, params100, fine, [0], noise_source=fine_source
    )
    shared = xs_f[0, ::2]
    rms_diff = np.sqrt(np.mean((xs_c[0] - shared) ** 2))
    rms_scale = np.sqrt(np.mean(shared**2))
    assert rms_diff < 0.05 * rms_scale


def test_thermal_equilibrium_statistics(params100):
    # detailed-balance synthetic table: FDT pair gamma = 0.3, D = 2*gamma/beta
    beta = params100.inverse_temperature
    table = make_synthetic_table(
        np.linspace(-20.0, 20.0, 33),
        friction=0.3,
        diffusion=2.0 * 0.3 / beta,
        tag="thermal",
    )
    sim = _sim(200, burn=20, seed=41, members=8)
    members = sample_stationary_ensemble(table, params100, sim, threads=THREADS)
    pooled = np.concatenate([t.positions for t in members])
    # equipartition: Var[x] = 1/(beta m w0^2) = 10
    assert pooled.mean() == pytest.approx(0.0, abs=3.0 * 10.0 / math.sqrt(200.0))
    assert pooled.var() == pytest.approx(1.0 / beta, rel=0.05)


# ----------------------------------------------------------- interpolation --


def test_interpolate_node_exactness(ou_table):
    for i in (0, 5, 12, 24):
        point = interpolate(ou_table, float(ou_table.grid[i]))
        assert point.friction == pytest.approx(0.5, rel=1e-12)
        assert point.diffusion == pytest.approx(1.0, rel=1e-12)


def test_interpolate_out_of_range(ou_table):
    # refuses to extrapolate, and flags the offending position
    with pytest.raises(ExcursionError):
        interpolate(ou_table, 12.5)
    with pytest.raises(ExcursionError) as info:
        interpolate(ou_table, -100.0)
    assert info.value.position == -100.0


def test_interpolation_converges_with_grid_refinement(params100):
    coarse = build_coefficient_table(
        params100, GridSpec(x_max=5.0, nodes=41), threads=THREADS
    )
    fine = build_coefficient_table(
        params100, GridSpec(x_max=5.0, nodes=401), threads=THREADS
    )
    for name in ("friction", "diffusion", "excess_occupation", "current"):
        spline = column_interpolant(coarse, name)
        exact = fine.column(name)
        scale = np.max(np.abs(exact))
        assert np.max(np.abs(spline(fine.grid) - exact)) < 1e-6 * scale


def test_column_interpolant_matches_pointwise(ou_table):
    spline = column_interpolant(ou_table, "diffusion")
    for x in (-3.3, 0.1, 7.7):
        assert spline(x) == pytest.approx(interpolate(ou_table, x).diffusion)
