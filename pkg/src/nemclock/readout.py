"""Current transduction and tick extraction.

The transduced current is maximal where the table's current column peaks, so
a tick is registered whenever the position crosses that argmax level (in
either direction); each crossing instant is refined by linear interpolation
between the two straddling samples, and crossings inside the refractory
window of the previous tick are discarded greedily.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .langevin import ExcursionError, Trajectory, column_interpolant
from .transport import CoefficientTable

__all__ = [
    "DetectionPolicy",
    "TickSeries",
    "TickAccumulator",
    "current_level_maximum",
    "transduce",
    "detect_ticks",
]


@dataclass(frozen=True)
class DetectionPolicy:
    """Crossing level and dead time of the tick trigger.

    ``level=None`` resolves to the grid argmax of the current column.  The
    default refractory window is a quarter half-period at unit oscillator
    frequency — long enough to absorb noise-split double crossings, short
    enough never to swallow a genuine half-period later.
    """

    level: float | None = None
    refractory: float = 0.25 * math.pi

    def __post_init__(self):
        if self.refractory < 0:
            raise ValueError("refractory must be >= 0")


@dataclass(frozen=True, eq=False)
class TickSeries:
    """Strictly increasing tick times with their detection provenance."""

    tick_times: np.ndarray
    detection_policy: DetectionPolicy
    source: str

    def __post_init__(self):
        times = np.asarray(self.tick_times, dtype=float)
        object.__setattr__(self, "tick_times", times)
        if times.size > 1:
            gaps = np.diff(times)
            if not np.all(gaps > 0):
                raise ValueError("tick times must be strictly increasing")
            if np.any(gaps < self.detection_policy.refractory):
                raise ValueError("tick gaps violate the refractory window")

    def __len__(self):
        return self.tick_times.size


def current_level_maximum(table: CoefficientTable) -> float:
    """Position of the current maximum, resolved on the table grid."""
    return float(table.grid[int(np.argmax(table.column("current")))])


def transduce(traj: Trajectory, table: CoefficientTable) -> np.ndarray:
    """Current series I(t_i) along a trajectory, on its sampling grid."""
    lo, hi = table.grid[0], table.grid[-1]
    xmin, xmax = float(np.min(traj.positions)), float(np.max(traj.positions))
    if xmin < lo or xmax > hi:
        worst = xmin if abs(xmin) > abs(xmax) else xmax
        raise ExcursionError(time=float("nan"), position=worst, index=traj.index)
    return np.asarray(column_interpolant(table, "current")(traj.positions))


class TickAccumulator:
    """Streaming crossing detector usable chunk-by-chunk.

    Feed contiguous full-resolution position blocks (shape (block, n)); the
    accumulator carries the last sample and last tick time per trajectory, so
    chunk boundaries are seamless.  Crossing times are linearly interpolated
    and filtered greedily by the refractory window.
    """

    def __init__(self, level: float, refractory: float):
        self.level = float(level)
        self.refractory = float(refractory)
        self._prev = {}       # index -> (time, position)
        self._last_tick = {}  # index -> time of last kept tick
        self._ticks = {}      # index -> list of arrays

    def feed(self, indices, t0, dt, xs, vs=None):
        xs = np.asarray(xs)
        for row, idx in enumerate(indices):
            series = xs[row]
            times0 = t0
            if idx in self._prev:
                pt, px = self._prev[idx]
                series = np.concatenate([[px], series])
                times0 = pt
            lead = self.level
            above = series >= lead
            flips = np.nonzero(above[1:] != above[:-1])[0]
            if flips.size:
                x0 = series[flips]
                x1 = series[flips + 1]
                cross = times0 + dt * (flips + (lead - x0) / (x1 - x0))
                kept = self._ticks.setdefault(idx, [])
                last = self._last_tick.get(idx, -math.inf)
                out = []
                for t in cross:
                    if t - last >= self.refractory:
                        out.append(t)
                        last = t
                self._last_tick[idx] = last
                if out:
                    kept.append(np.asarray(out))
            self._prev[idx] = (t0 + (xs.shape[1] - 1) * dt, xs[row, -1])

    def tick_times(self, index) -> np.ndarray:
        parts = self._ticks.get(index, [])
        if not parts:
            return np.empty(0)
        return np.concatenate(parts)


def detect_ticks(
    traj: Trajectory,
    table: CoefficientTable,
    policy: DetectionPolicy | None = None,
) -> TickSeries:
    """Extract the tick series of one trajectory.

    The crossing level defaults to the current-column argmax; ticks are
    crossings in both directions, trimmed by the refractory window.
    """
    policy = policy or DetectionPolicy()
    level = (
        policy.level
        if policy.level is not None
        else current_level_maximum(table)
    )
    resolved = replace(policy, level=level)
    if traj.positions.size == 0:
        return TickSeries(
            tick_times=np.empty(0),
            detection_policy=resolved,
            source=traj.fingerprint(),
        )
    acc = TickAccumulator(level=level, refractory=policy.refractory)
    acc.feed(
        [traj.index],
        float(traj.times[0]),
        traj.sample_spacing,
        traj.positions[None, :],
    )
    return TickSeries(
        tick_times=acc.tick_times(traj.index),
        detection_policy=resolved,
        source=traj.fingerprint(),
    )
