"""Simulation and analysis of a nanoelectromechanical self-oscillator clock.

A voltage-biased electronic transport channel pumps a mechanical mode; past
a bias threshold the mode self-oscillates and its zero crossings tick like a
clock.  The package computes the position-dependent transport coefficients,
integrates the resulting stochastic dynamics, extracts ticks, and quantifies
how good a timepiece the device makes.
"""

from .params import (
    AdiabaticityWarning,
    LeadSpec,
    SystemParams,
    default_params,
    fingerprint,
)
from .quadrature import QuadratureError, QuadResult, integrate
from .transport import (
    CoefficientTable,
    GridSpec,
    TransportPoint,
    build_coefficient_table,
    charge_noise_spectrum,
    conditional_current,
    conditional_occupation,
    conditional_shot_noise,
    fermi_dirac,
    friction_and_diffusion,
    lead_self_energy,
    spectral_density,
    table_fingerprint,
    transmission,
)
from .langevin import (
    ExcursionError,
    SimConfig,
    Trajectory,
    column_interpolant,
    integrate_trajectory,
    interpolate,
    sample_stationary_ensemble,
)
from .readout import (
    DetectionPolicy,
    TickSeries,
    current_level_maximum,
    detect_ticks,
    transduce,
)
from .clockstats import (
    ClockReport,
    CorrelationCurve,
    EstimatorWarning,
    Spectrum,
    WtdFit,
    accuracy_resolution,
    allan_variance,
    autocorrelation,
    default_allan_grid,
    entropy_per_tick,
    fit_inverse_gaussian,
    linewidth_fit,
    power_spectrum,
    renewal_allan_asymptote,
    spectrum_fwhm,
    spectrum_peak,
    waiting_times,
)
from .tickinfo import (
    Histogram,
    kl_divergence,
    kl_epsilon_sensitivity,
    mi_bias_bound,
    n_fold_convolution,
    n_sum_samples,
    pairwise_mutual_information,
)
from .toymodels import (
    OffsetModelParams,
    OUAmplitude,
    PhaseDiffusion,
    ReducedCycle,
    TelegraphParams,
    analytic_position_autocorrelation,
    limit_cycle_amplitude,
    offset_model_correlation,
    reduced_coefficients,
    simulate_toy,
    telegraph_correlation,
    telegraph_statics,
)
from .pipeline import (
    Corpus,
    build_corpus,
    default_grid,
    ensemble_allan,
    pooled_waiting_times,
    run_ensemble,
)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticityWarning",
    "LeadSpec",
    "SystemParams",
    "default_params",
    "fingerprint",
    "QuadratureError",
    "QuadResult",
    "integrate",
    "CoefficientTable",
    "GridSpec",
    "TransportPoint",
    "build_coefficient_table",
    "charge_noise_spectrum",
    "conditional_current",
    "conditional_occupation",
    "conditional_shot_noise",
    "fermi_dirac",
    "friction_and_diffusion",
    "lead_self_energy",
    "spectral_density",
    "table_fingerprint",
    "transmission",
    "ExcursionError",
    "SimConfig",
    "Trajectory",
    "column_interpolant",
    "integrate_trajectory",
    "interpolate",
    "sample_stationary_ensemble",
    "DetectionPolicy",
    "TickSeries",
    "current_level_maximum",
    "detect_ticks",
    "transduce",
    "ClockReport",
    "CorrelationCurve",
    "EstimatorWarning",
    "Spectrum",
    "WtdFit",
    "accuracy_resolution",
    "allan_variance",
    "autocorrelation",
    "default_allan_grid",
    "entropy_per_tick",
    "fit_inverse_gaussian",
    "linewidth_fit",
    "power_spectrum",
    "renewal_allan_asymptote",
    "spectrum_fwhm",
    "spectrum_peak",
    "waiting_times",
    "Histogram",
    "kl_divergence",
    "kl_epsilon_sensitivity",
    "mi_bias_bound",
    "n_fold_convolution",
    "n_sum_samples",
    "pairwise_mutual_information",
    "OffsetModelParams",
    "OUAmplitude",
    "PhaseDiffusion",
    "ReducedCycle",
    "TelegraphParams",
    "analytic_position_autocorrelation",
    "limit_cycle_amplitude",
    "offset_model_correlation",
    "reduced_coefficients",
    "simulate_toy",
    "telegraph_correlation",
    "telegraph_statics",
    "Corpus",
    "build_corpus",
    "default_grid",
    "ensemble_allan",
    "pooled_waiting_times",
    "run_ensemble",
    "__version__",
]
