"""Command-line pipeline: coefficient tables, ensembles, ticks, analysis.

Subcommands
-----------
coeffs      build (or reuse) the coefficient table for a config
simulate    integrate the trajectory ensemble and store it
ticks       extract tick series from a stored ensemble
analyze     estimate clock statistics from stored artifacts
run         all of the above, plus a manifest of every artifact
sweep       repeat ``run`` across a list of voltages
toymodel    sample one of the reduced toy processes

Configs are strict, versioned JSON: unknown keys are errors at every level.
Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
failures (tagged with the stage that failed).  Artifacts contain no
timestamps; a rerun with the same config and seed is bit-identical no matter
how many threads are used.
"""
from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import clockstats, tickinfo, toymodels
from .langevin import SimConfig, Trajectory
from .params import LeadSpec, SystemParams, fingerprint
from .pipeline import default_grid, ensemble_allan, pooled_waiting_times
from .readout import DetectionPolicy, current_level_maximum, detect_ticks, transduce
from .svgplot import line_plot
from .transport import (
    RTOL,
    STENCIL_STEP,
    CoefficientTable,
    GridSpec,
    build_coefficient_table,
    table_fingerprint,
)

__all__ = ["main", "ConfigError", "StageFailure", "load_config"]

CONFIG_VERSION = 1


class ConfigError(ValueError):
    """The configuration file is malformed or inconsistent."""


class StageFailure(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except (ConfigError, StageFailure):
        raise
    except Exception as exc:
        raise StageFailure(name, exc) from exc


# ----------------------------------------------------------------- config --


def _take(mapping, section: str, allowed: dict):
    """Validated copy of a config section: unknown keys are errors and
    missing keys take their defaults (a default of ... marks required)."""
    if not isinstance(mapping, dict):
        raise ConfigError(f"section {section!r} must be an object")
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {', '.join(unknown)}")
    out = {}
    for key, default in allowed.items():
        if key in mapping:
            out[key] = mapping[key]
        elif default is ...:
            raise ConfigError(f"missing required key {section!r}.{key}")
        else:
            out[key] = default
    return out


_SYSTEM_KEYS = dict(
    voltage=None,
    coupling=0.5,
    inverse_temperature=0.1,
    dot_energy=0.0,
    band_center=2.5,
    bandwidth=5.0,
    peak_rate=10.0,
    left=None,
    right=None,
)
_LEAD_KEYS = dict(
    band_center=..., bandwidth=..., peak_rate=..., chemical_potential=...
)
_GRID_KEYS = dict(x_max=None, nodes=801)
_SIM_KEYS = dict(
    time_step=math.pi / 100.0,
    burn_in=100.0 * math.pi,
    duration=500.0 * math.pi,
    seed=1,
    ensemble_size=4,
    record_stride=1,
)
_DETECTION_KEYS = dict(level=None, refractory=0.25 * math.pi)
_ANALYSIS_KEYS = dict(
    max_lag_periods=100.0,
    spectrum_window=(1.6, 2.4),
    allan_per_decade=20,
    mi_separations=(1, 100),
    kl_orders=(2, 4, 8),
    make_plots=True,
)
_TOY_KEYS = dict(
    type=...,
    duration=...,
    time_step=...,
    seed=0,
    frequency=1.0,
    cycle=None,
    rates=None,
    levels=None,
    offset=0.0,
    baseline=0.0,
)
_CYCLE_KEYS = dict(
    amplitude=...,
    amplitude_damping=...,
    amplitude_diffusion=...,
    phase_diffusion=...,
)


def load_config(path) -> dict:
    """Parse and validate a pipeline config, filling in defaults."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    top = _take(
        raw,
        "config",
        dict(
            version=...,
            system=...,
            grid={},
            simulation={},
            detection={},
            analysis={},
            sweep=None,
            toymodel=None,
        ),
    )
    if top["version"] != CONFIG_VERSION:
        raise ConfigError(
            f"unsupported config version {top['version']!r}; "
            f"this build reads version {CONFIG_VERSION}"
        )
    cfg = dict(top)
    cfg["system"] = _take(top["system"], "system", _SYSTEM_KEYS)
    for side in ("left", "right"):
        if cfg["system"][side] is not None:
            cfg["system"][side] = _take(
                cfg["system"][side], f"system.{side}", _LEAD_KEYS
            )
    explicit = (cfg["system"]["left"] is not None) or (
        cfg["system"]["right"] is not None
    )
    if explicit and not (cfg["system"]["left"] and cfg["system"]["right"]):
        raise ConfigError("explicit leads need both system.left and system.right")
    if explicit and cfg["system"]["voltage"] is not None:
        raise ConfigError("give either system.voltage or explicit leads, not both")
    if not explicit and cfg["system"]["voltage"] is None:
        raise ConfigError("system needs a voltage (or explicit leads)")
    cfg["grid"] = _take(top["grid"], "grid", _GRID_KEYS)
    cfg["simulation"] = _take(top["simulation"], "simulation", _SIM_KEYS)
    cfg["detection"] = _take(top["detection"], "detection", _DETECTION_KEYS)
    cfg["analysis"] = _take(top["analysis"], "analysis", _ANALYSIS_KEYS)
    if cfg["sweep"] is not None:
        sweep = _take(cfg["sweep"], "sweep", dict(voltages=...))
        if not sweep["voltages"]:
            raise ConfigError("sweep.voltages must be a non-empty list")
        cfg["sweep"] = sweep
    if cfg["toymodel"] is not None:
        toy = _take(cfg["toymodel"], "toymodel", _TOY_KEYS)
        if toy["cycle"] is not None:
            toy["cycle"] = _take(toy["cycle"], "toymodel.cycle", _CYCLE_KEYS)
        cfg["toymodel"] = toy
    return cfg


def build_params(cfg: dict) -> SystemParams:
    s = cfg["system"]
    try:
        if s["left"] is not None:
            return SystemParams(
                left=LeadSpec(**s["left"]),
                right=LeadSpec(**s["right"]),
                inverse_temperature=s["inverse_temperature"],
                coupling=s["coupling"],
                dot_energy=s["dot_energy"],
            )
        v = float(s["voltage"])
        return SystemParams(
            left=LeadSpec(
                band_center=s["band_center"],
                bandwidth=s["bandwidth"],
                peak_rate=s["peak_rate"],
                chemical_potential=v / 2.0,
            ),
            right=LeadSpec(
                band_center=-s["band_center"],
                bandwidth=s["bandwidth"],
                peak_rate=s["peak_rate"],
                chemical_potential=-v / 2.0,
            ),
            inverse_temperature=s["inverse_temperature"],
            coupling=s["coupling"],
            dot_energy=s["dot_energy"],
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid system parameters: {exc}") from exc


def build_sim(cfg: dict, seed_override=None) -> SimConfig:
    s = cfg["simulation"]
    seed = int(seed_override) if seed_override is not None else int(s["seed"])
    try:
        return SimConfig(
            time_step=float(s["time_step"]),
            burn_in=float(s["burn_in"]),
            duration=float(s["duration"]),
            seed=seed,
            ensemble_size=int(s["ensemble_size"]),
            record_stride=int(s["record_stride"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid simulation section: {exc}") from exc


# -------------------------------------------------------------- artifacts --


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


# ----------------------------------------------------------------- stages --


def stage_coeffs(cfg, params, out: Path, threads: int):
    """Build or reuse the coefficient table; returns (table, cache_note)."""
    g = cfg["grid"]
    if g["x_max"] is None:
        grid_spec = default_grid(params, nodes=int(g["nodes"]), threads=threads)
    else:
        grid_spec = GridSpec(x_max=float(g["x_max"]), nodes=int(g["nodes"]))
    expected = table_fingerprint(
        params, grid_spec.positions(), RTOL, STENCIL_STEP
    )
    cache = out / "coeffs.npz"
    if cache.exists():
        try:
            table = CoefficientTable.load(cache, expected_hash=expected)
            return table, "hit"
        except ValueError as exc:
            note = (
                "rebuilt (stale)"
                if "different parameters" in str(exc)
                else "rebuilt (corrupt)"
            )
        except Exception:
            note = "rebuilt (corrupt)"
    else:
        note = "built"
    table = build_coefficient_table(params, grid_spec, threads=threads)
    table.save(cache)
    return table, note


def stage_simulate(cfg, params, table, sim: SimConfig, out: Path, threads: int):
    """Integrate the ensemble; stores ensemble.npz and trajectory.csv."""
    from .pipeline import run_ensemble

    trajectories, _ = run_ensemble(table, params, sim, threads=threads)
    times = trajectories[0].times
    xs = np.stack([t.positions for t in trajectories])
    vs = np.stack([t.velocities for t in trajectories])
    with open(out / "ensemble.npz", "wb") as fh:
        np.savez(
            fh,
            times=times,
            positions=xs,
            velocities=vs,
            seed=np.array([sim.seed], dtype=np.int64),
            record_stride=np.array([sim.record_stride], dtype=np.int64),
        )
    _write_csv(
        out / "trajectory.csv",
        ["time", "position", "velocity"],
        zip(times, xs[0], vs[0]),
    )
    return trajectories


def _load_trajectories(out: Path, table, sim: SimConfig):
    with np.load(out / "ensemble.npz") as data:
        times = data["times"]
        xs = data["positions"]
        vs = data["velocities"]
        seed = int(data["seed"][0])
    return [
        Trajectory(
            times=times,
            positions=xs[i],
            velocities=vs[i],
            seed=seed,
            params_hash=table.params_hash,
            index=i,
        )
        for i in range(xs.shape[0])
    ]


def stage_ticks(cfg, table, trajectories, out: Path):
    """Detect ticks per member; stores ticks.csv and ticks.json."""
    d = cfg["detection"]
    policy = DetectionPolicy(
        level=None if d["level"] is None else float(d["level"]),
        refractory=float(d["refractory"]),
    )
    level = (
        policy.level if policy.level is not None else current_level_maximum(table)
    )
    series = [detect_ticks(t, table, policy) for t in trajectories]
    rows = []
    for i, ts in enumerate(series):
        rows.extend((i, t) for t in ts.tick_times)
    _write_csv(out / "ticks.csv", ["member", "tick_time"], rows)
    _write_json(
        out / "ticks.json",
        {
            "level": level,
            "refractory": policy.refractory,
            "counts": [len(ts) for ts in series],
        },
    )
    return series


def stage_analyze(cfg, params, table, trajectories, tick_series, out: Path):
    """Clock statistics from the stored ensemble; writes the report set."""
    a = cfg["analysis"]
    dt_rec = trajectories[0].sample_spacing
    w0 = params.oscillator_frequency

    waits = pooled_waiting_times(tick_series)
    mean_wait = float(waits.mean())
    accuracy, resolution = clockstats.accuracy_resolution(waits)
    _write_csv(out / "wtd.csv", ["wait"], ((w,) for w in waits))

    fit_payload = None
    if waits.size >= 100 and np.var(waits) > 0:
        fit = clockstats.fit_inverse_gaussian(waits)
        fit_payload = {
            "mean": fit.mean,
            "variance": fit.variance,
            "sample_count": fit.sample_count,
            "ks_statistic": fit.ks_statistic,
        }
    _write_json(out / "wtd_fit.json", fit_payload or {"note": "too few waits"})

    currents = np.stack([transduce(t, table) for t in trajectories])
    max_lag = min(
        currents.shape[1] // 2,
        int(round(a["max_lag_periods"] * 2.0 * math.pi / (w0 * dt_rec))),
    )
    curve = clockstats.autocorrelation(currents, dt_rec, max_lag=max_lag)
    _write_csv(
        out / "autocorrelation.csv", ["lag", "value"], zip(curve.lags, curve.values)
    )

    grid = table.grid
    width = grid[1] - grid[0]
    edges = np.concatenate([grid - width / 2.0, [grid[-1] + width / 2.0]])
    counts, _ = np.histogram(
        np.concatenate([t.positions for t in trajectories]), bins=edges
    )
    density = counts / (counts.sum() * width)
    floor = float(np.trapezoid(density * table.column("shot_noise"), grid))
    spectrum = clockstats.power_spectrum(curve, floor)
    _write_csv(
        out / "spectrum.csv",
        ["omega", "power"],
        zip(spectrum.frequencies, spectrum.values),
    )
    window = tuple(float(v) * w0 for v in a["spectrum_window"])
    peak_loc, peak_height = clockstats.spectrum_peak(spectrum, window)
    try:
        peak_width = clockstats.spectrum_fwhm(spectrum, window)
    except ValueError:
        peak_width = None
    try:
        line_fwhm, line_loc = clockstats.linewidth_fit(curve, peak_loc)
    except ValueError:
        line_fwhm = line_loc = None

    entropy_tick = clockstats.entropy_per_tick(params, density, table, resolution)
    entropy_rate = entropy_tick * resolution

    # The admissible window range is set by the sparsest member's tick span,
    # not the nominal recording length (the last tick lands short of the end).
    usable = [ts for ts in tick_series if ts.tick_times.size >= 2]
    try:
        if not usable:
            raise ValueError("no member produced two ticks")
        span = min(float(ts.tick_times[-1]) for ts in usable)
        T_grid = clockstats.default_allan_grid(
            mean_wait, span, per_decade=int(a["allan_per_decade"])
        )
        allan = ensemble_allan(usable, mean_wait, T_grid)
    except ValueError:
        allan = []
    _write_csv(
        out / "allan.csv",
        ["window", "allan_variance", "renewal"],
        (
            (T, val, clockstats.renewal_allan_asymptote(mean_wait, accuracy, T))
            for T, val in allan
        ),
    )

    info = _information_block(a, tick_series)
    _write_json(out / "info.json", info)

    report = clockstats.ClockReport(
        resolution=resolution,
        accuracy=accuracy,
        entropy_rate=entropy_rate,
        entropy_per_tick=entropy_tick,
        allan=tuple(allan),
    )
    _write_json(
        out / "report.json",
        {
            "mean_wait": mean_wait,
            "resolution": report.resolution,
            "accuracy": report.accuracy,
            "entropy_rate": report.entropy_rate,
            "entropy_per_tick": report.entropy_per_tick,
            "spectrum_peak": {"location": peak_loc, "height": peak_height},
            "spectrum_fwhm": peak_width,
            "linewidth_fit": {"fwhm": line_fwhm, "location": line_loc},
            "tick_count": int(sum(len(ts) for ts in tick_series)),
        },
    )

    if a["make_plots"]:
        line_plot(
            out / "spectrum.svg",
            [("power", spectrum.frequencies[1:], spectrum.values[1:])],
            title="current power spectrum",
            x_label="angular frequency",
            y_label="power",
            log_y=bool(np.all(spectrum.values[1:] > 0)),
        )
        line_plot(
            out / "autocorrelation.svg",
            [("C", curve.lags, curve.values)],
            title="current autocorrelation",
            x_label="lag",
            y_label="C",
        )
        if allan:
            T = np.array([row[0] for row in allan])
            val = np.array([row[1] for row in allan])
            renewal = np.array(
                [
                    clockstats.renewal_allan_asymptote(mean_wait, accuracy, t)
                    for t in T
                ]
            )
            keep = val > 0
            line_plot(
                out / "allan.svg",
                [
                    ("measured", T[keep], val[keep]),
                    ("renewal", T, renewal),
                ],
                title="Allan variance",
                x_label="window",
                y_label="sigma_y^2",
                log_x=True,
                log_y=True,
            )
        if waits.size >= 2:
            hist = tickinfo.Histogram.from_samples(waits)
            line_plot(
                out / "wtd.svg",
                [("waits", hist.midpoints, hist.masses / hist.bin_width)],
                title="waiting-time distribution",
                x_label="wait",
                y_label="density",
            )
    return report


def _information_block(a, tick_series) -> dict:
    """KL divergence of n-tick sums from the independent-gap prediction,
    and wait-wait mutual information, where the data suffice."""
    per_member = [
        np.diff(ts.tick_times) for ts in tick_series if len(ts) >= 2
    ]
    pooled = np.concatenate(per_member) if per_member else np.empty(0)
    out: dict = {"kl_orders": {}, "mutual_information": {}}
    if pooled.size >= 200:
        base = tickinfo.Histogram.from_samples(pooled)
        for n in a["kl_orders"]:
            n = int(n)
            predicted = tickinfo.n_fold_convolution(base, n)
            sums = np.concatenate(
                [
                    tickinfo.n_sum_samples(w, n)
                    for w in per_member
                    if w.size >= n
                ]
            )
            measured = tickinfo.Histogram.from_samples(
                sums, edges=predicted.edges, clip=True
            )
            out["kl_orders"][str(n)] = tickinfo.kl_divergence(measured, predicted)
    else:
        out["kl_orders"] = None
    for m in a["mi_separations"]:
        m = int(m)
        values = [
            tickinfo.pairwise_mutual_information(w, m)
            for w in per_member
            if w.size > m + 1000
        ]
        out["mutual_information"][str(m)] = (
            float(np.mean(values)) if values else None
        )
    return out


def _write_manifest(out: Path, cfg, sim: SimConfig, params, cache_note, extra=None):
    artifacts = {}
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            artifacts[str(path.relative_to(out))] = _sha256(path)
    payload = {
        "config": {k: v for k, v in cfg.items() if k not in ("sweep", "toymodel")},
        "seed": sim.seed,
        "parameter_fingerprint": fingerprint(params),
        "coefficient_cache": cache_note,
        "artifacts": artifacts,
    }
    if extra:
        payload.update(extra)
    _write_json(out / "manifest.json", payload)


# ------------------------------------------------------------ subcommands --


def _prepare(args):
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = build_params(cfg)
    sim = build_sim(cfg, args.seed)
    return cfg, out, params, sim


def cmd_coeffs(args) -> int:
    cfg, out, params, sim = _prepare(args)
    with _stage("coeffs"):
        table, note = stage_coeffs(cfg, params, out, args.threads)
    print(f"coefficient table: {table.grid.size} nodes, cache {note}")
    return 0


def cmd_simulate(args) -> int:
    cfg, out, params, sim = _prepare(args)
    with _stage("coeffs"):
        table, _ = stage_coeffs(cfg, params, out, args.threads)
    with _stage("simulate"):
        trajectories = stage_simulate(cfg, params, table, sim, out, args.threads)
    print(f"simulated {len(trajectories)} members, {trajectories[0].times.size} samples each")
    return 0


def cmd_ticks(args) -> int:
    cfg, out, params, sim = _prepare(args)
    with _stage("coeffs"):
        table, _ = stage_coeffs(cfg, params, out, args.threads)
    with _stage("ticks"):
        trajectories = _load_trajectories(out, table, sim)
        series = stage_ticks(cfg, table, trajectories, out)
    print(f"detected {sum(len(s) for s in series)} ticks")
    return 0


def cmd_analyze(args) -> int:
    cfg, out, params, sim = _prepare(args)
    with _stage("coeffs"):
        table, _ = stage_coeffs(cfg, params, out, args.threads)
    with _stage("analyze"):
        trajectories = _load_trajectories(out, table, sim)
        series = stage_ticks(cfg, table, trajectories, out)
        report = stage_analyze(cfg, params, table, trajectories, series, out)
    print(
        f"accuracy {report.accuracy:.4g}, resolution {report.resolution:.4g}, "
        f"entropy/tick {report.entropy_per_tick:.4g}"
    )
    return 0


def _run_pipeline(cfg, out: Path, params, sim, threads: int):
    with _stage("coeffs"):
        table, note = stage_coeffs(cfg, params, out, threads)
    with _stage("simulate"):
        trajectories = stage_simulate(cfg, params, table, sim, out, threads)
    with _stage("ticks"):
        series = stage_ticks(cfg, table, trajectories, out)
    with _stage("analyze"):
        report = stage_analyze(cfg, params, table, trajectories, series, out)
    _write_manifest(out, cfg, sim, params, note)
    return report


def cmd_run(args) -> int:
    cfg, out, params, sim = _prepare(args)
    report = _run_pipeline(cfg, out, params, sim, args.threads)
    print(
        f"run complete: accuracy {report.accuracy:.4g}, "
        f"resolution {report.resolution:.4g}"
    )
    return 0


def cmd_sweep(args) -> int:
    cfg, out, params, sim = _prepare(args)
    if cfg["sweep"] is None:
        raise ConfigError("sweep subcommand needs a sweep section")
    rows = []
    for voltage in cfg["sweep"]["voltages"]:
        sub_cfg = json.loads(json.dumps(cfg))
        sub_cfg["system"]["voltage"] = float(voltage)
        sub_cfg["system"]["left"] = None
        sub_cfg["system"]["right"] = None
        sub_cfg["sweep"] = None
        sub_params = build_params(sub_cfg)
        sub_out = out / f"V={voltage:g}"
        sub_out.mkdir(parents=True, exist_ok=True)
        report = _run_pipeline(sub_cfg, sub_out, sub_params, sim, args.threads)
        rows.append(
            (
                float(voltage),
                1.0 / report.resolution,
                report.accuracy,
                report.resolution,
                report.entropy_per_tick,
            )
        )
        print(f"V={voltage:g} done: accuracy {report.accuracy:.4g}")
    _write_csv(
        out / "summary.csv",
        ["voltage", "mean_wait", "accuracy", "resolution", "entropy_per_tick"],
        rows,
    )
    _write_manifest(out, cfg, sim, params, "per-voltage", extra={"kind": "sweep"})
    return 0


def cmd_toymodel(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    toy = cfg["toymodel"]
    if toy is None:
        raise ConfigError("toymodel subcommand needs a toymodel section")
    seed = int(args.seed) if args.seed is not None else int(toy["seed"])

    def need_cycle():
        if toy["cycle"] is None:
            raise ConfigError(f"toymodel.type {toy['type']!r} needs a cycle section")
        return toymodels.ReducedCycle(**toy["cycle"])

    kind = toy["type"]
    with _stage("toymodel"):
        if kind == "ou_amplitude":
            spec = toymodels.OUAmplitude(need_cycle())
        elif kind == "phase_diffusion":
            spec = toymodels.PhaseDiffusion(need_cycle())
        elif kind == "offset":
            spec = toymodels.OffsetModelParams(
                cycle=need_cycle(),
                offset=float(toy["offset"]),
                baseline=float(toy["baseline"]),
            )
        elif kind == "telegraph":
            if toy["rates"] is None or toy["levels"] is None:
                raise ConfigError("telegraph toymodel needs rates and levels")
            spec = toymodels.TelegraphParams(
                rates=tuple(float(r) for r in toy["rates"]),
                levels=tuple(float(l) for l in toy["levels"]),
            )
        else:
            raise ConfigError(f"unknown toymodel.type {kind!r}")
        times, series = toymodels.simulate_toy(
            spec,
            float(toy["duration"]),
            float(toy["time_step"]),
            seed,
            frequency=float(toy["frequency"]),
        )
        _write_csv(out / "toymodel.csv", ["time", "value"], zip(times, series))
    print(f"toymodel {kind}: {times.size} samples")
    return 0


# ------------------------------------------------------------------- main --


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nemclock",
        description="electromechanical clock pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "coeffs": cmd_coeffs,
        "simulate": cmd_simulate,
        "ticks": cmd_ticks,
        "analyze": cmd_analyze,
        "run": cmd_run,
        "sweep": cmd_sweep,
        "toymodel": cmd_toymodel,
    }
    for name, handler in handlers.items():
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--seed", type=int, default=None, help="override the seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument("--out", default="nemclock_out", help="output directory")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageFailure as exc:
        print(f"numerical failure {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
