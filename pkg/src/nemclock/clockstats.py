"""Clock-performance estimators: correlations, spectra, waiting times,
accuracy/resolution, entropy cost, and Allan variance.

All estimators are pure functions of immutable inputs.  Statistical
quantities follow fixed conventions so fixed-seed runs are regression-stable:
correlation estimates subtract the pooled mean and use unbiased per-lag
divisors; the spectrum is the discrete cosine transform of the symmetrically
extended correlation plus the white shot-noise floor.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy import stats as sstats

from .params import SystemParams
from .readout import TickSeries
from .transport import CoefficientTable

__all__ = [
    "EstimatorWarning",
    "CorrelationCurve",
    "Spectrum",
    "WtdFit",
    "ClockReport",
    "autocorrelation",
    "power_spectrum",
    "spectrum_peak",
    "spectrum_fwhm",
    "linewidth_fit",
    "waiting_times",
    "fit_inverse_gaussian",
    "accuracy_resolution",
    "entropy_per_tick",
    "allan_variance",
    "default_allan_grid",
    "renewal_allan_asymptote",
]


class EstimatorWarning(UserWarning):
    """A statistical estimate is degenerate or at the edge of validity."""


@dataclass(frozen=True, eq=False)
class CorrelationCurve:
    """Stationary autocovariance on a uniform lag grid."""

    lags: np.ndarray
    values: np.ndarray
    estimator_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if lags.shape != values.shape or lags.ndim != 1:
            raise ValueError("lags and values must be matching 1-D arrays")
        steps = np.diff(lags)
        if lags.size > 1 and not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValueError("lag grid must be uniform")
        # a true autocovariance satisfies |C(tau)| <= C(0), but an unbiased
        # estimate can exceed it by statistical fluctuation (later lags have
        # fewer pairs); only gross violations indicate a construction bug
        peak = abs(values[0])
        slack = 0.05 * peak + 1e-12
        if np.any(np.abs(values) > peak + slack):
            worst = float(np.max(np.abs(values)))
            raise ValueError(
                f"|C| exceeds C(0): {worst:.6g} > {values[0]:.6g}"
            )
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided power spectrum on a uniform frequency grid."""

    frequencies: np.ndarray
    values: np.ndarray
    floor: float

    @property
    def resolution(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


@dataclass(frozen=True)
class WtdFit:
    """Waiting-time distribution fit in the (mean, variance) form."""

    mean: float
    variance: float
    sample_count: int
    ks_statistic: float

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError("fitted mean must be > 0")
        if not self.variance > 0:
            raise ValueError("fitted variance must be > 0")


@dataclass(frozen=True)
class ClockReport:
    """Headline clock metrics for one operating point."""

    resolution: float
    accuracy: float
    entropy_rate: float
    entropy_per_tick: float
    allan: tuple

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be > 0")
        if not self.accuracy > 0:
            raise ValueError("accuracy must be > 0")
        gap = abs(self.entropy_per_tick * self.resolution - self.entropy_rate)
        scale = max(abs(self.entropy_rate), 1e-30)
        if gap > 1e-9 * scale:
            raise ValueError("entropy_per_tick and entropy_rate disagree")


def _as_matrix(ensemble) -> np.ndarray:
    series = np.asarray(ensemble, dtype=float)
    if series.ndim == 1:
        series = series[None, :]
    if series.ndim != 2:
        raise ValueError("ensemble must be 1-D or a stack of equal-length series")
    return series


def autocorrelation(ensemble, time_step: float, max_lag: int | None = None):
    """Autocovariance of stationary series, pooled over an ensemble.

    Subtracts the pooled mean, computes raw lag sums per series by FFT, and
    divides by the exact pair count per lag (unbiased in the stationary
    mean-known sense).  ``max_lag`` counts samples and defaults to half the
    series length.
    """
    series = _as_matrix(ensemble)
    n_series, length = series.shape
    if max_lag is None:
        max_lag = length // 2
    if max_lag >= length:
        raise ValueError(
            f"series of length {length} cannot support lag {max_lag}"
        )
    centered = series - series.mean()
    n_fft = sfft.next_fast_len(length + max_lag)
    raw = np.zeros(max_lag + 1)
    for row in centered:
        spec = sfft.rfft(row, n_fft)
        acf = sfft.irfft(spec * np.conj(spec), n_fft)
        raw += acf[: max_lag + 1]
    counts = n_series * (length - np.arange(max_lag + 1))
    values = raw / counts
    return CorrelationCurve(
        lags=np.arange(max_lag + 1) * time_step,
        values=values,
        estimator_meta={
            "ensemble_size": n_series,
            "series_length": length,
            "window": "none",
            "pooled_mean": float(series.mean()),
        },
    )


def power_spectrum(
    curve: CorrelationCurve,
    shot_noise_floor: float,
    *,
    lag_window: str = "none",
) -> Spectrum:
    """Spectrum of the correlation plus the white shot-noise floor.

    The curve is extended symmetrically to negative lags and transformed;
    the result is real by construction.  ``lag_window='hann'`` tapers the
    correlation before transforming (bias-variance trade-off knob).
    """
    values = curve.values
    if lag_window == "hann":
        m = values.size
        taper = 0.5 * (1.0 + np.cos(np.pi * np.arange(m) / max(m - 1, 1)))
        values = values * taper
    elif lag_window != "none":
        raise ValueError(f"unknown lag window {lag_window!r}")
    if curve.lags.size < 2:
        raise ValueError("need at least two lags for a spectrum")
    dt = float(curve.lags[1] - curve.lags[0])
    sym = np.concatenate([values, values[-2:0:-1]])
    power = sfft.rfft(sym).real * dt + shot_noise_floor
    freqs = 2.0 * np.pi * sfft.rfftfreq(sym.size, d=dt)
    return Spectrum(frequencies=freqs, values=power, floor=shot_noise_floor)


def _window_slice(spec: Spectrum, omega_window) -> slice:
    lo, hi = omega_window
    i0 = int(np.searchsorted(spec.frequencies, lo, side="left"))
    i1 = int(np.searchsorted(spec.frequencies, hi, side="right"))
    if i1 - i0 < 3:
        raise ValueError("frequency window contains fewer than 3 bins")
    return slice(i0, i1)


def spectrum_peak(spec: Spectrum, omega_window) -> tuple[float, float]:
    """(location, height) of the tallest bin in a window, refined by a
    parabola through the three bins around the maximum."""
    sl = _window_slice(spec, omega_window)
    w = spec.frequencies[sl]
    s = spec.values[sl]
    j = int(np.argmax(s))
    if 0 < j < s.size - 1:
        y0, y1, y2 = s[j - 1], s[j], s[j + 1]
        denom = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
        dw = w[1] - w[0]
        height = y1 - 0.25 * (y0 - y2) * shift
        return float(w[j] + shift * dw), float(height)
    return float(w[j]), float(s[j])


def spectrum_fwhm(spec: Spectrum, omega_window) -> float:
    """Full width at half maximum above the in-window base level.

    The base is the smaller of the window-edge medians, so a peak riding on
    the noise floor is measured relative to its pedestal.
    """
    sl = _window_slice(spec, omega_window)
    w = spec.frequencies[sl]
    s = spec.values[sl]
    j = int(np.argmax(s))
    if j == 0 or j == s.size - 1:
        raise ValueError("spectral peak sits at the window edge")
    edge = max(3, s.size // 20)
    base = min(float(np.median(s[:edge])), float(np.median(s[-edge:])))
    half = 0.5 * (s[j] + base)
    left = np.nonzero(s[: j + 1] < half)[0]
    right = np.nonzero(s[j:] < half)[0]
    if left.size == 0 or right.size == 0:
        raise ValueError("half-maximum level not reached inside the window")
    i = left[-1]
    k = j + right[0]
    wl = w[i] + (w[i + 1] - w[i]) * (half - s[i]) / (s[i + 1] - s[i])
    wr = w[k - 1] + (w[k] - w[k - 1]) * (half - s[k - 1]) / (s[k] - s[k - 1])
    return float(wr - wl)


def linewidth_fit(
    curve: CorrelationCurve,
    omega_seed: float,
    *,
    skip: float = 0.15,
    upto: float = 0.55,
    stride: int = 1,
) -> tuple[float, float]:
    """Lorentzian-core linewidth of a spectral peak, fitted in the lag domain.

    A Lorentzian line of full width ``G`` at half maximum corresponds to a
    correlation envelope ``exp(-G*tau/2)``, so fitting an exponentially
    damped cosine to the measured correlation reads the width off directly.
    Any frequency-domain half-maximum readout is instead floored at the
    truncation kernel width ~pi/max_lag (the transform of a finite lag
    range convolves the line with that kernel), which hides sub-resolution
    width differences; the lag-domain fit has no such floor, its reach being
    set by the statistical noise of the correlation estimate instead.

    The fit window ``[skip, upto]`` (fractions of the curve length) excludes
    early lags, where fast decorrelation channels (amplitude relaxation)
    dominate, and the far tail, where the estimate is noisiest; what remains
    is the slow coherence core that forms the top of the spectral peak.
    ``omega_seed`` centres the frequency search (use :func:`spectrum_peak`).
    A plain least-squares fit is used rather than a log-envelope slope
    because the latter is biased wide by any additive noise floor.

    The model assumes one dominant decay channel inside the window and an
    envelope that has self-averaged to it.  When the ensemble is too small
    to average a slow, non-decaying noise channel (for a self-oscillator:
    amplitude wander far slower than the window span), that wander replaces
    the coherence decay as the fitted envelope and the result tracks the
    window choice rather than the line; cross-check against the width of
    :func:`power_spectrum` and treat values near the parameter bounds as a
    failed fit.

    Returns ``(fwhm, omega)`` of the fitted line.
    """
    if not 0.0 <= skip < upto <= 1.0:
        raise ValueError("need 0 <= skip < upto <= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = curve.values.size
    a, b = int(skip * n), int(upto * n)
    tau = curve.lags[a:b:stride]
    y = curve.values[a:b:stride]
    if tau.size < 32:
        raise ValueError("fit window contains fewer than 32 lags")
    tau_max = float(curve.lags[-1])
    tau_span = float(tau[-1] - tau[0])

    def profiled(gamma, omega):
        # amplitude and phase enter linearly: solve them exactly, scan the rest
        env = np.exp(-0.5 * gamma * tau)
        c = env * np.cos(omega * tau)
        s = env * np.sin(omega * tau)
        g11, g12, g22 = c @ c, c @ s, s @ s
        r1, r2 = c @ y, s @ y
        det = g11 * g22 - g12 * g12
        if det <= 0.0:
            return math.inf, 0.0, 0.0
        alpha = (g22 * r1 - g12 * r2) / det
        beta = (g11 * r2 - g12 * r1) / det
        resid = y - alpha * c - beta * s
        return float(resid @ resid), alpha, beta

    half_window = 10.0 * math.pi / tau_max
    omegas = omega_seed + np.linspace(-half_window, half_window, 33)
    gammas = np.geomspace(0.2 / tau_max, 60.0 / tau_span, 25)
    best = (math.inf, gammas[0], omega_seed, 0.0, 0.0)
    for g in gammas:
        for w in omegas:
            cost, alpha, beta = profiled(g, w)
            if cost < best[0]:
                best = (cost, g, w, alpha, beta)
    _, g0, w0, a0, b0 = best

    from scipy.optimize import least_squares

    def residual(p):
        al, be, g, w = p
        env = np.exp(-0.5 * np.clip(g, 0.0, None) * tau)
        return al * env * np.cos(w * tau) + be * env * np.sin(w * tau) - y

    step = omegas[1] - omegas[0]
    fit = least_squares(
        residual,
        [a0, b0, g0, w0],
        bounds=(
            [-np.inf, -np.inf, gammas[0] / 10.0, w0 - 3.0 * step],
            [np.inf, np.inf, gammas[-1] * 10.0, w0 + 3.0 * step],
        ),
    )
    _, _, g_fit, w_fit = fit.x
    return float(g_fit), float(w_fit)


def waiting_times(ticks: TickSeries) -> np.ndarray:
    """Gaps between consecutive ticks."""
    if len(ticks) < 2:
        raise ValueError("need at least two ticks for waiting times")
    return np.diff(ticks.tick_times)


def fit_inverse_gaussian(samples) -> WtdFit:
    """Maximum-likelihood Wald fit with a goodness-of-fit statistic.

    The location-free ML estimates are mean = sample mean and shape from the
    mean inverse gap; the variance reported is the fitted model's
    mean^3/shape.  The Kolmogorov-Smirnov statistic is evaluated against the
    fitted law.
    """
    tau = np.asarray(samples, dtype=float)
    if tau.size < 100:
        raise ValueError(f"need >= 100 samples, got {tau.size}")
    if np.any(tau <= 0):
        raise ValueError("waiting times must be positive")
    mu = float(tau.mean())
    spread = float(np.mean(1.0 / tau) - 1.0 / mu)
    if spread <= 0 or np.var(tau) == 0:
        raise ValueError("degenerate (zero-variance) waiting times")
    lam = 1.0 / spread
    variance = mu**3 / lam
    ks = sstats.kstest(tau, sstats.invgauss(mu / lam, scale=lam).cdf).statistic
    return WtdFit(
        mean=mu,
        variance=variance,
        sample_count=int(tau.size),
        ks_statistic=float(ks),
    )


def accuracy_resolution(samples) -> tuple[float, float]:
    """(N, nu): expected ticks until off by one, and the tick rate."""
    tau = np.asarray(samples, dtype=float)
    if tau.size < 2:
        raise ValueError("need at least two waiting times")
    mu = float(tau.mean())
    var = float(tau.var(ddof=1))
    nu = 1.0 / mu
    if var == 0.0:
        warnings.warn(
            "zero-variance waiting times: accuracy reported as infinite",
            EstimatorWarning,
            stacklevel=2,
        )
        return math.inf, nu
    return mu**2 / var, nu


def entropy_per_tick(
    params: SystemParams, position_density, table: CoefficientTable, nu: float
) -> float:
    """Entropy produced per tick: beta*V*<I> divided by the tick rate.

    ``position_density`` is a density on the table grid; its trapezoid
    normalization must hold to 1e-6.
    """
    p = np.asarray(position_density, dtype=float)
    if p.shape != table.grid.shape:
        raise ValueError("density must live on the table grid")
    norm = float(np.trapezoid(p, table.grid))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"density normalization off by {norm - 1.0:.3e}")
    if not nu > 0:
        raise ValueError("tick rate must be > 0")
    mean_current = float(np.trapezoid(p * table.column("current"), table.grid))
    rate = params.inverse_temperature * params.voltage * mean_current
    return rate / nu


def allan_variance(
    ticks: TickSeries, mean_wait: float, T_values, *, origin: float = 0.0
):
    """Two-sample variance of the clock reading over window sizes T.

    The clock reading after n windows is mean_wait * (ticks counted up to
    origin + n*T) minus n*T; the estimate averages squared second differences
    of that reading over non-overlapping windows.
    """
    times = ticks.tick_times
    if times.size < 2:
        raise ValueError("need at least two ticks")
    span = float(times[-1] - origin)
    T_values = [float(T) for T in T_values]
    bad = [T for T in T_values if span < 3.0 * T]
    if bad:
        raise ValueError(
            f"span {span:.6g} is shorter than 3T for T={bad!r}"
        )
    base = int(np.searchsorted(times, origin, side="right"))
    out = []
    for T in T_values:
        n_windows = int(span // T)
        edges = origin + T * np.arange(n_windows + 1)
        counts = np.searchsorted(times, edges, side="right") - base
        reading = mean_wait * counts - (edges - origin)
        second = reading[:-2] - 2.0 * reading[1:-1] + reading[2:]
        out.append((T, float(np.mean(second**2) / (2.0 * T**2))))
    return out


def default_allan_grid(
    mean_wait: float, span: float, *, per_decade: int = 20
) -> np.ndarray:
    """Logarithmic window grid from 2 mean waits up to a third of the span.

    The top window sits a hair inside span/3 so that a stream whose last
    tick defines ``span`` still admits the full grid under the strict
    3T-coverage check in :func:`allan_variance`.
    """
    lo = 2.0 * mean_wait
    hi = span / 3.0 * (1.0 - 1e-9)
    if hi <= lo:
        raise ValueError("span too short for an Allan grid")
    n = max(2, int(round(per_decade * math.log10(hi / lo))) + 1)
    return np.geomspace(lo, hi, n)


def renewal_allan_asymptote(mu: float, N: float, T: float) -> float:
    """Long-window Allan level of a renewal tick stream."""
    if mu <= 0 or N <= 0 or T <= 0:
        raise ValueError("mu, N, T must all be positive")
    return mu / (N * T)
