"""Experiment drivers that tie transport tables to trajectory ensembles.

The drivers pick a position grid sized to the dynamics it will host, run
ensembles with streaming consumers (tick detection, position histograms,
transduced-current sampling) so nothing needs full-rate storage, and bundle
the results for the analysis stages.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import langevin
from .langevin import SimConfig, Trajectory, column_interpolant
from .params import SystemParams
from .readout import DetectionPolicy, TickAccumulator, TickSeries, current_level_maximum
from .transport import (
    CoefficientTable,
    GridSpec,
    build_coefficient_table,
    friction_and_diffusion,
)

__all__ = [
    "HistogramAccumulator",
    "SeriesAccumulator",
    "Corpus",
    "default_grid",
    "run_ensemble",
    "build_corpus",
    "pooled_waiting_times",
    "ensemble_allan",
]

PROBE_NODES = 241
SIGMA_MARGIN = 8.0


class HistogramAccumulator:
    """Streams post-burn-in positions into fixed-bin counts."""

    def __init__(self, edges):
        self.edges = np.asarray(edges, dtype=float)
        self.counts = np.zeros(self.edges.size - 1)
        self.total = 0

    def feed(self, indices, t0, dt, xs, vs=None):
        counts, _ = np.histogram(xs, bins=self.edges)
        self.counts += counts
        self.total += xs.size

    def absorb(self, other: "HistogramAccumulator") -> None:
        self.counts += other.counts
        self.total += other.total

    def density(self) -> np.ndarray:
        """Probability density at the bin midpoints."""
        if self.total == 0:
            raise RuntimeError("histogram accumulated no samples")
        width = self.edges[1] - self.edges[0]
        return self.counts / (self.total * width)


class SeriesAccumulator:
    """Streams a strided transform of the position into per-member arrays.

    ``transform`` maps position samples to the observable (identity for the
    position itself, a current interpolant for the transduced signal);
    ``stride`` counts full-resolution steps past the burn-in.
    """

    def __init__(self, transform, stride: int):
        if stride < 1:
            raise ValueError("stride must be >= 1")
        self.transform = transform
        self.stride = stride
        self._chunks: dict[int, list[np.ndarray]] = {}

    def feed(self, indices, t0, dt, xs, vs=None):
        k0 = int(round(t0 / dt))
        offsets = np.arange(xs.shape[1])
        mask = (k0 + offsets) % self.stride == 0
        if not mask.any():
            return
        values = self.transform(xs[:, mask])
        for row, idx in enumerate(indices):
            self._chunks.setdefault(idx, []).append(values[row])

    def series(self, index: int) -> np.ndarray:
        if index not in self._chunks:
            raise KeyError(f"no samples for member {index}")
        return np.concatenate(self._chunks[index])


@dataclass(frozen=True, eq=False)
class Corpus:
    """One operating point's simulated evidence, ready for analysis."""

    params: SystemParams
    table: CoefficientTable
    sim: SimConfig
    policy: DetectionPolicy
    ticks: tuple
    position_density: np.ndarray
    position_count: int
    currents: tuple | None = None
    current_time_step: float | None = None
    trajectories: tuple | None = None


def _thermal_spread(params: SystemParams) -> float:
    return math.sqrt(
        1.0
        / (
            params.inverse_temperature
            * params.oscillator_mass
            * params.oscillator_frequency**2
        )
    )


def default_grid(
    params: SystemParams,
    *,
    nodes: int = 801,
    probe_nodes: int = PROBE_NODES,
    threads: int = 1,
) -> GridSpec:
    """Position grid sized to hold the stationary dynamics.

    Below the oscillation threshold the grid spans ten standard deviations
    of the damped fluctuations.  Above it, a coarse probe table locates the
    limit cycle and the grid spans the larger of 1.5 amplitudes and the
    amplitude plus eight standard deviations of its fluctuations, so
    excursions past the edge are astronomically unlikely over long runs.
    """
    from .toymodels import limit_cycle_amplitude, reduced_coefficients

    if params.force == 0.0:
        return GridSpec(x_max=10.0 * _thermal_spread(params), nodes=nodes)
    gamma0, diffusion0 = friction_and_diffusion(0.0, params)
    if gamma0 >= 0.0:
        if gamma0 == 0.0:
            spread = _thermal_spread(params)
        else:
            spread = math.sqrt(
                diffusion0
                / (
                    2.0
                    * params.oscillator_mass**2
                    * gamma0
                    * params.oscillator_frequency**2
                )
            )
        return GridSpec(x_max=10.0 * spread, nodes=nodes)
    probe_span = (
        max(abs(params.left.band_center), abs(params.right.band_center))
        + max(params.left.bandwidth, params.right.bandwidth)
        + 4.0 / params.inverse_temperature
        + abs(params.voltage) / 2.0
        + abs(params.dot_energy)
    ) / abs(params.force)
    probe = build_coefficient_table(
        params, GridSpec(x_max=probe_span, nodes=probe_nodes), threads=threads
    )
    amplitude = limit_cycle_amplitude(probe, params)
    if amplitude is None:
        raise RuntimeError("probe table contradicts the threshold gate")
    cycle = reduced_coefficients(probe, params, amplitude)
    spread = math.sqrt(cycle.amplitude_variance)
    x_max = max(1.5 * amplitude, amplitude + SIGMA_MARGIN * spread)
    return GridSpec(x_max=x_max, nodes=nodes)


def _block_slots(ensemble_size: int):
    block = langevin.BLOCK_SIZE
    return [
        range(start, min(start + block, ensemble_size))
        for start in range(0, ensemble_size, block)
    ]


def run_ensemble(
    table: CoefficientTable,
    params: SystemParams,
    sim: SimConfig,
    *,
    consumer_factories=(),
    threads: int = 1,
    keep_trajectories: bool = True,
):
    """Integrate an ensemble while consumers stream the full-rate states.

    Returns (trajectories, consumers) where ``consumers`` is one tuple of
    instances per fixed block of member indices, in block order.  The block
    partition does not depend on ``threads``, so merged consumer output is
    identical for any worker count.
    """
    slots = _block_slots(sim.ensemble_size)
    consumers_by_block = [tuple(f() for f in consumer_factories) for _ in slots]
    results: list = [None] * len(slots)

    def work(slot: int):
        indices = list(slots[slot])
        times, xs, vs = langevin._integrate_block(
            table, params, sim, indices, consumers=consumers_by_block[slot]
        )
        if keep_trajectories:
            results[slot] = [
                Trajectory(
                    times=times,
                    positions=xs[row],
                    velocities=vs[row],
                    seed=sim.seed,
                    params_hash=table.params_hash,
                    index=idx,
                )
                for row, idx in enumerate(indices)
            ]

    if threads > 1 and len(slots) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(len(slots))))
    else:
        for slot in range(len(slots)):
            work(slot)

    trajectories = None
    if keep_trajectories:
        trajectories = [traj for block in results for traj in block]
    return trajectories, consumers_by_block


def _grid_bin_edges(grid: np.ndarray) -> np.ndarray:
    width = grid[1] - grid[0]
    return np.concatenate([grid - width / 2.0, [grid[-1] + width / 2.0]])


def build_corpus(
    table: CoefficientTable,
    params: SystemParams,
    sim: SimConfig,
    *,
    policy: DetectionPolicy | None = None,
    current_stride: int | None = None,
    keep_trajectories: bool = False,
    threads: int = 1,
) -> Corpus:
    """Run one operating point and collect ticks, the stationary position
    density on the table grid, and optionally strided current series."""
    if policy is None:
        policy = DetectionPolicy()
    level = policy.level
    if level is None:
        level = current_level_maximum(table)
    resolved = replace(policy, level=level)

    factories = [
        lambda: TickAccumulator(level=resolved.level, refractory=resolved.refractory),
        lambda: HistogramAccumulator(_grid_bin_edges(table.grid)),
    ]
    if current_stride is not None:
        current = column_interpolant(table, "current")
        factories.append(lambda: SeriesAccumulator(current, current_stride))

    trajectories, consumers = run_ensemble(
        table,
        params,
        sim,
        consumer_factories=factories,
        threads=threads,
        keep_trajectories=keep_trajectories,
    )

    block = langevin.BLOCK_SIZE
    ticks = []
    for idx in range(sim.ensemble_size):
        acc: TickAccumulator = consumers[idx // block][0]
        ticks.append(
            TickSeries(
                tick_times=acc.tick_times(idx),
                detection_policy=resolved,
                source=f"{table.params_hash[:16]}:{sim.seed}:{idx}",
            )
        )

    hist = consumers[0][1]
    for extra in consumers[1:]:
        hist.absorb(extra[1])

    currents = None
    current_dt = None
    if current_stride is not None:
        currents = tuple(
            consumers[idx // block][2].series(idx) for idx in range(sim.ensemble_size)
        )
        current_dt = sim.time_step * current_stride

    return Corpus(
        params=params,
        table=table,
        sim=sim,
        policy=resolved,
        ticks=tuple(ticks),
        position_density=hist.density(),
        position_count=hist.total,
        currents=currents,
        current_time_step=current_dt,
        trajectories=tuple(trajectories) if trajectories is not None else None,
    )


def pooled_waiting_times(ticks_list) -> np.ndarray:
    """Waiting times pooled across members (never differenced across the
    member boundary)."""
    gaps = [np.diff(ts.tick_times) for ts in ticks_list if len(ts) >= 2]
    if not gaps:
        raise ValueError("no member has two ticks")
    return np.concatenate(gaps)


def ensemble_allan(ticks_list, mean_wait: float, T_values, *, origin: float = 0.0):
    """Allan variance per member, averaged across the ensemble."""
    from .clockstats import allan_variance

    T_values = [float(t) for t in T_values]
    sums = np.zeros(len(T_values))
    used = 0
    for ts in ticks_list:
        rows = allan_variance(ts, mean_wait, T_values, origin=origin)
        sums += np.array([value for _, value in rows])
        used += 1
    if used == 0:
        raise ValueError("empty ensemble")
    return [(T, s / used) for T, s in zip(T_values, sums)]
