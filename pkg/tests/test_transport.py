"""Steady-state electronic coefficients: closed forms, frozen refinement
oracles, symmetries, equilibrium identities, and the table round-trip.

The frozen constants were produced by an independent adaptive-quadrature
refinement (scipy.integrate.quad with hand-placed breakpoints and widened
integration windows) and are stated here to their converged digits.
"""
import dataclasses
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nemclock.params import AdiabaticityWarning, default_params
from nemclock.quadrature import integrate
from nemclock.transport import (
    CoefficientTable,
    GridSpec,
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
    _resonance_denominator,
)

# Independent refinement oracle values (converged against window size and
# tolerance; see docstring above).
CURRENT_V100_X0 = 4.377222897661056
CURRENT_V100_X1 = 4.366397404355147
SHOT_V50_X0 = 2.682489074845226
NOISE_V100_X0_W0 = 0.014980196655622773
NOISE_V100_X0_W1 = 0.014279521725778491
OCCUPATION_V100_X1 = 0.4883000  # converged to the printed digits


@pytest.fixture(scope="module")
def p100():
    return default_params(100.0)


@pytest.fixture(scope="module")
def p50():
    return default_params(50.0)


# ----------------------------------------------------------- local pieces --


def test_fermi_dirac_anchors():
    assert fermi_dirac(2.0, 2.0, 0.5) == pytest.approx(0.5)
    assert fermi_dirac(1e4, 0.0, 0.5) == pytest.approx(0.0, abs=1e-300)
    assert fermi_dirac(-1e4, 0.0, 0.5) == pytest.approx(1.0)
    vals = fermi_dirac(np.linspace(-5, 5, 11), 0.0, 2.0)
    assert np.all(np.diff(vals) < 0)  # strictly decreasing in energy


def test_fermi_dirac_extreme_arguments_do_not_overflow():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        out = fermi_dirac(np.array([-1e6, 1e6]), 0.0, 10.0)
    assert out[0] == pytest.approx(1.0)
    assert out[1] == pytest.approx(0.0, abs=1e-300)


def test_spectral_density_peak_value_and_shape(p100):
    # at the band center the density equals the peak rate
    assert spectral_density(2.5, p100.left) == pytest.approx(10.0, rel=1e-14)
    # at the opposite band center, one bandwidth pattern: G*d^2/(25+25)
    assert spectral_density(-2.5, p100.left) == pytest.approx(
        10.0 * 25.0 / (25.0 + 25.0), rel=1e-14
    )
    # device anchor: each lead contributes 8 at E=0
    assert spectral_density(0.0, p100.left) == pytest.approx(8.0, rel=1e-14)
    assert spectral_density(0.0, p100.right) == pytest.approx(8.0, rel=1e-14)


def test_self_energy_imaginary_part_is_half_density(p100):
    E = np.linspace(-40.0, 40.0, 401)
    for lead in (p100.left, p100.right):
        chi = lead_self_energy(E, lead)
        kappa = spectral_density(E, lead)
        np.testing.assert_allclose(chi.imag, -0.5 * kappa, rtol=1e-13)
        # real part: dispersive Lorentzian wing
        expected_re = (
            lead.peak_rate * lead.bandwidth / 2.0 * (E - lead.band_center)
        ) / ((E - lead.band_center) ** 2 + lead.bandwidth**2)
        np.testing.assert_allclose(chi.real, expected_re, rtol=1e-12)


def test_transmission_is_unity_on_resonance_symmetric_point(p100):
    assert transmission(0.0, 0.0, p100) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=120, deadline=None)
@given(
    energy=st.floats(min_value=-60, max_value=60, allow_nan=False),
    position=st.floats(min_value=-40, max_value=40, allow_nan=False),
)
def test_transmission_bounded(energy, position):
    t = transmission(energy, position, default_params(100.0))
    assert 0.0 <= t <= 1.0 + 1e-12


def test_sum_rule_spectral_weight(p100):
    # integral of |response|^2 * (total level width) / 2pi equals one
    x = 0.9

    def integrand(E):
        den = _resonance_denominator(E, p100) + p100.force * x
        dos = spectral_density(E, p100.left) + spectral_density(E, p100.right)
        return dos / (np.abs(den) ** 2 * 2.0 * np.pi)

    res = integrate(
        integrand,
        -600.0,
        600.0,
        rtol=1e-10,
        breakpoints=[p100.left.band_center, p100.right.band_center, -p100.force * x],
    )
    assert res.value == pytest.approx(1.0, abs=1e-5)


# ------------------------------------------------------- frozen refinements --


def test_occupation_neutral_point_is_half(p100):
    total, excess = conditional_occupation(0.0, p100)
    assert total == pytest.approx(0.5, abs=1e-4)
    assert excess == 0.0


def test_occupation_frozen_value(p100):
    total, excess = conditional_occupation(1.0, p100)
    assert total == pytest.approx(OCCUPATION_V100_X1, abs=5e-5)
    assert excess == pytest.approx(total - 0.4999921, abs=5e-5)


def test_excess_occupation_is_odd(p100):
    for x in (0.5, 1.7, 3.0):
        _, plus = conditional_occupation(x, p100)
        _, minus = conditional_occupation(-x, p100)
        assert plus == pytest.approx(-minus, abs=1e-7)


def test_current_frozen_values(p100):
    assert conditional_current(0.0, p100) == pytest.approx(
        CURRENT_V100_X0, rel=1e-9
    )
    assert conditional_current(1.0, p100) == pytest.approx(
        CURRENT_V100_X1, rel=1e-9
    )


def test_current_antisymmetric_under_bias_reversal(p100):
    for x in (0.0, 0.7):
        assert conditional_current(x, p100.with_voltage(-100.0)) == pytest.approx(
            -conditional_current(x, p100), rel=1e-9
        )


def test_current_mirror_symmetry(p100):
    # flipping the sign of the coupling mirrors the device in x
    flipped = dataclasses.replace(p100, coupling=-p100.coupling)
    for x in (0.4, 1.3):
        assert conditional_current(x, flipped) == pytest.approx(
            conditional_current(-x, p100), rel=1e-9
        )


def test_current_vanishes_at_zero_bias():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdiabaticityWarning)
        p0 = default_params(0.0)
    assert conditional_current(0.8, p0) == pytest.approx(0.0, abs=1e-12)


def test_shot_noise_frozen_value_and_split(p50):
    total = conditional_shot_noise(0.0, p50)
    assert total == pytest.approx(SHOT_V50_X0, rel=1e-9)
    thermal, partition = conditional_shot_noise(0.0, p50, split=True)
    assert thermal >= 0.0 and partition >= 0.0
    assert thermal + partition == pytest.approx(total, rel=1e-12)


def test_shot_noise_positive_across_positions(p100):
    for x in (-3.0, -0.5, 0.0, 1.5, 4.0):
        assert conditional_shot_noise(x, p100) > 0.0


def test_charge_noise_frozen_values(p100):
    assert charge_noise_spectrum(0.0, 0.0, p100) == pytest.approx(
        NOISE_V100_X0_W0, rel=1e-9
    )
    assert charge_noise_spectrum(0.0, 1.0, p100) == pytest.approx(
        NOISE_V100_X0_W1, rel=1e-9
    )


def test_charge_noise_warns_outside_slow_regime(p100):
    with pytest.warns(AdiabaticityWarning):
        charge_noise_spectrum(0.0, 4.0, p100)


def test_detailed_balance_at_equilibrium():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdiabaticityWarning)
        p0 = default_params(0.0)
    beta = p0.inverse_temperature
    for omega in (0.5, 1.0, 2.0):
        s_plus = charge_noise_spectrum(0.0, omega, p0)
        s_minus = charge_noise_spectrum(0.0, -omega, p0)
        assert s_minus == pytest.approx(
            math.exp(-beta * omega) * s_plus, rel=1e-9
        )


def test_fluctuation_dissipation_near_equilibrium():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdiabaticityWarning)
        peq = default_params(0.1)
    beta = peq.inverse_temperature
    m = peq.oscillator_mass
    for x in (0.0, 0.7, 1.4):
        gamma, diffusion = friction_and_diffusion(x, peq)
        assert beta * diffusion == pytest.approx(2.0 * m * gamma, rel=0.02)


# -------------------------------------------------- friction and diffusion --


def test_friction_frozen_value_and_diffusion_identity(p100):
    gamma, diffusion = friction_and_diffusion(0.0, p100)
    assert gamma == pytest.approx(-4.839917354e-4, rel=1e-6)
    # the diffusion coefficient is the zero-frequency noise level
    assert diffusion == pytest.approx(NOISE_V100_X0_W0, rel=1e-9)


def test_friction_sign_pattern_across_bias():
    signs = {}
    for V in (5.0, 42.0, 43.0, 100.0):
        gamma, _ = friction_and_diffusion(0.0, default_params(V))
        signs[V] = gamma
    assert signs[5.0] > 0.0
    assert signs[100.0] < 0.0
    # regression pin for the damping sign change: between 42 and 43
    assert signs[42.0] > 0.0
    assert signs[43.0] < 0.0


def test_friction_stencil_step_insensitive(p100):
    g1, _ = friction_and_diffusion(0.0, p100, step=0.05)
    g2, _ = friction_and_diffusion(0.0, p100, step=0.025)
    assert g2 == pytest.approx(g1, rel=1e-3)


def test_diffusion_positive_on_coarse_scan(p100):
    for x in (-20.0, -5.0, 0.0, 5.0, 20.0):
        _, diffusion = friction_and_diffusion(x, p100)
        assert diffusion > 0.0


# ------------------------------------------------------------------ tables --


@pytest.fixture(scope="module")
def small_table(p100):
    return build_coefficient_table(p100, GridSpec(x_max=5.0, nodes=21))


def test_table_grid_and_columns(small_table):
    assert small_table.grid[0] == -5.0 and small_table.grid[-1] == 5.0
    assert np.all(np.diff(small_table.grid) > 0)
    for name in ("friction", "diffusion", "excess_occupation", "current",
                 "shot_noise"):
        col = small_table.column(name)
        assert col.shape == small_table.grid.shape
        assert np.all(np.isfinite(col))
    with pytest.raises(KeyError):
        small_table.column("no_such_column")


def test_table_matches_pointwise_evaluation(small_table, p100):
    i = 7
    x = small_table.grid[i]
    gamma, diffusion = friction_and_diffusion(x, p100)
    assert small_table.column("friction")[i] == pytest.approx(gamma, rel=1e-12)
    assert small_table.column("diffusion")[i] == pytest.approx(diffusion, rel=1e-12)
    assert small_table.column("current")[i] == pytest.approx(
        conditional_current(x, p100), rel=1e-12
    )


def test_table_threads_do_not_change_values(p100):
    spec = GridSpec(x_max=3.0, nodes=13)
    t1 = build_coefficient_table(p100, spec, threads=1)
    t3 = build_coefficient_table(p100, spec, threads=3)
    for name in ("friction", "diffusion", "excess_occupation", "current",
                 "shot_noise"):
        np.testing.assert_array_equal(t1.column(name), t3.column(name))
    assert t1.params_hash == t3.params_hash


def test_table_round_trip(tmp_path, small_table, p100):
    path = tmp_path / "coeffs.npz"
    small_table.save(path)
    loaded = CoefficientTable.load(path, expected_hash=small_table.params_hash)
    np.testing.assert_array_equal(loaded.grid, small_table.grid)
    for name in ("friction", "diffusion", "excess_occupation", "current",
                 "shot_noise"):
        np.testing.assert_array_equal(
            loaded.column(name), small_table.column(name)
        )
    assert loaded.params_hash == small_table.params_hash


def test_table_load_rejects_other_parameters(tmp_path, small_table):
    path = tmp_path / "coeffs.npz"
    small_table.save(path)
    with pytest.raises(ValueError, match="different parameters"):
        CoefficientTable.load(path, expected_hash="0" * 64)


def test_table_load_rejects_corruption(tmp_path, small_table):
    path = tmp_path / "coeffs.npz"
    small_table.save(path)
    blob = bytearray(path.read_bytes())
    blob[len(blob) // 2] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(ValueError, match="corrupt"):
        CoefficientTable.load(path, expected_hash=small_table.params_hash)
    # a missing file is not corruption: callers distinguish the two
    with pytest.raises(FileNotFoundError):
        CoefficientTable.load(tmp_path / "absent.npz")


def test_fingerprint_tracks_inputs(p100, p50):
    grid = np.linspace(-5, 5, 21)
    base = table_fingerprint(p100, grid, 1e-8, 0.05)
    assert base == table_fingerprint(p100, grid, 1e-8, 0.05)
    assert base != table_fingerprint(p50, grid, 1e-8, 0.05)
    assert base != table_fingerprint(p100, grid * 1.001, 1e-8, 0.05)
    assert base != table_fingerprint(p100, grid, 1e-6, 0.05)
    assert base != table_fingerprint(p100, grid, 1e-8, 0.025)
