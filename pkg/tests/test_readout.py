"""Tick detection: crossing geometry on synthetic signals, refractory
filtering, streaming/batch agreement, and current transduction."""
import math

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from conftest import make_synthetic_table
from nemclock.langevin import ExcursionError, Trajectory
from nemclock.readout import (
    DetectionPolicy,
    TickAccumulator,
    TickSeries,
    current_level_maximum,
    detect_ticks,
    transduce,
)

TWO_PI = 2.0 * math.pi


def _traj(times, positions, index=0):
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    return Trajectory(
        times=times,
        positions=positions,
        velocities=np.gradient(positions, times) if times.size > 1 else positions * 0.0,
        seed=0,
        params_hash="synthetic",
        index=index,
    )


def _sine(periods=20, dt=math.pi / 500, amplitude=1.0, phase=0.3):
    t = np.arange(0.0, periods * TWO_PI, dt)
    return t, amplitude * np.sin(t + phase)


# ----------------------------------------------------------------- policy --


def test_policy_validation():
    with pytest.raises(ValueError):
        DetectionPolicy(refractory=-0.1)
    assert DetectionPolicy().level is None


def test_tick_series_validation():
    policy = DetectionPolicy(level=0.0, refractory=0.5)
    series = TickSeries(
        tick_times=[0.0, 1.0, 2.5], detection_policy=policy, source="s"
    )
    assert len(series) == 3
    with pytest.raises(ValueError, match="strictly increasing"):
        TickSeries(tick_times=[0.0, 2.0, 1.0], detection_policy=policy, source="s")
    with pytest.raises(ValueError, match="refractory"):
        TickSeries(tick_times=[0.0, 0.2], detection_policy=policy, source="s")


# -------------------------------------------------------------- crossings --


def _noise_free_table():
    return make_synthetic_table(
        np.linspace(-4.0, 4.0, 9), friction=0.0, diffusion=0.0, tag="flat"
    )


def test_sinusoid_ticks_every_half_period():
    t, x = _sine()
    series = detect_ticks(_traj(t, x), _noise_free_table(), DetectionPolicy(level=0.0))
    # both-direction zero crossings of a sinusoid: one tick per half period
    waits = np.diff(series.tick_times)
    assert waits.size >= 38
    np.testing.assert_allclose(waits, math.pi, atol=1e-5)
    # crossing instants sit on the zeros of sin(t + phase)
    expected_first = math.pi - 0.3
    assert series.tick_times[0] == pytest.approx(expected_first, abs=1e-5)


def test_refractory_window_thins_ticks():
    t, x = _sine()
    base = detect_ticks(_traj(t, x), _noise_free_table(), DetectionPolicy(level=0.0))
    # a dead time longer than the true half-period keeps every other crossing
    thinned = detect_ticks(
        _traj(t, x), _noise_free_table(), DetectionPolicy(level=0.0, refractory=1.2 * math.pi)
    )
    assert thinned.tick_times.size == pytest.approx(base.tick_times.size / 2, abs=1)
    np.testing.assert_allclose(np.diff(thinned.tick_times), TWO_PI, atol=1e-5)


def test_small_jitter_does_not_split_ticks():
    t, x = _sine()
    rng = np.random.Generator(np.random.Philox(99))
    noisy = x + 1e-3 * rng.standard_normal(x.size)
    clean = detect_ticks(_traj(t, x), _noise_free_table(), DetectionPolicy(level=0.0))
    jittered = detect_ticks(
        _traj(t, noisy), _noise_free_table(), DetectionPolicy(level=0.0)
    )
    assert jittered.tick_times.size == clean.tick_times.size
    assert np.min(np.diff(jittered.tick_times)) >= DetectionPolicy().refractory


def test_crossing_interpolation_is_linear_between_samples():
    # a coarse saw-like signal with known crossing fractions
    times = np.array([0.0, 1.0, 2.0, 3.0])
    positions = np.array([-1.0, 3.0, -3.0, 1.0])
    series = detect_ticks(
        _traj(times, positions),
        _noise_free_table(),
        DetectionPolicy(level=0.0, refractory=0.0),
    )
    np.testing.assert_allclose(series.tick_times, [0.25, 1.5, 2.75])


def test_default_level_resolves_to_current_argmax():
    table = make_synthetic_table(
        np.linspace(-12.0, 12.0, 25),
        friction=0.0,
        diffusion=0.0,
        current=lambda x: math.exp(-((x - 1.0) ** 2)),
        tag="peaked",
    )
    assert current_level_maximum(table) == 1.0
    t, x = _sine(amplitude=3.0)
    series = detect_ticks(_traj(t, x), table)
    assert series.detection_policy.level == 1.0
    # crossings of level 1 on a 3sin(t): sin = 1/3 upward and downward
    target = math.asin(1.0 / 3.0)
    first_two = series.tick_times[:2] + 0.3
    np.testing.assert_allclose(first_two, [target, math.pi - target], atol=1e-4)


def test_streaming_matches_batch():
    t, x = _sine(periods=13)
    batch = detect_ticks(_traj(t, x), _noise_free_table(), DetectionPolicy(level=0.0))
    acc = TickAccumulator(level=0.0, refractory=DetectionPolicy().refractory)
    dt = t[1] - t[0]
    bounds = [0, 7, 100, 101, 350, 2000, 4001, x.size]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        acc.feed([4], t[lo], dt, x[None, lo:hi])
    streamed = acc.tick_times(4)
    assert streamed.size == batch.tick_times.size
    np.testing.assert_allclose(streamed, batch.tick_times, rtol=0, atol=1e-9)


def test_empty_trajectory_yields_empty_series():
    traj = Trajectory(
        times=np.empty(0),
        positions=np.empty(0),
        velocities=np.empty(0),
        seed=0,
        params_hash="synthetic",
        index=3,
    )
    series = detect_ticks(traj, _noise_free_table(), DetectionPolicy(level=0.0))
    assert len(series) == 0
    assert series.tick_times.size == 0


def test_no_crossings_when_signal_stays_below_level():
    t = np.linspace(0.0, 10.0, 200)
    series = detect_ticks(
        _traj(t, 0.1 * np.sin(t)),
        _noise_free_table(),
        DetectionPolicy(level=2.0),
    )
    assert len(series) == 0


# ------------------------------------------------------------ transduction --


def test_transduce_interpolates_current_column():
    table = make_synthetic_table(
        np.linspace(-5.0, 5.0, 41),
        friction=0.0,
        diffusion=0.0,
        current=lambda x: 2.0 + math.tanh(x),
        tag="tanh",
    )
    t, x = _sine(periods=3, amplitude=2.0)
    signal = transduce(_traj(t, x), table)
    reference = CubicSpline(table.grid, table.column("current"))(x)
    np.testing.assert_allclose(signal, reference, rtol=1e-12, atol=1e-12)
    # cubic interpolation of a smooth profile on a fine grid is accurate
    np.testing.assert_allclose(signal, 2.0 + np.tanh(x), atol=1e-4)


def test_transduce_rejects_out_of_grid_positions():
    table = make_synthetic_table(
        np.linspace(-1.0, 1.0, 11), friction=0.0, diffusion=0.0, tag="narrow"
    )
    t, x = _sine(periods=2, amplitude=3.0)
    with pytest.raises(ExcursionError) as info:
        transduce(_traj(t, x, index=7), table)
    assert info.value.index == 7
    assert abs(info.value.position) > 1.0
