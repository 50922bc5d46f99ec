"""Steady-state electron transport conditioned on the oscillator position.

Everything here treats the oscillator coordinate x as a frozen parameter: the
dot level is shifted to ``dot_energy - force * x`` and the resulting
single-level scattering problem is evaluated exactly.  The outputs — excess
occupation, current, shot noise, friction and diffusion — feed the Langevin
integrator through :class:`CoefficientTable`.

Sign conventions: the charge-noise spectrum S_x(omega) obeys detailed balance
S_x(-w) = exp(-betaw) S_x(w) at zero bias, which makes the zero-frequency
slope (the friction) positive in equilibrium.
"""
from __future__ import annotations

import functools
import hashlib
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .params import AdiabaticityWarning, LeadSpec, SystemParams, fingerprint
from .quadrature import QuadratureError, integrate

__all__ = [
    "GridSpec",
    "TransportPoint",
    "CoefficientTable",
    "fermi_dirac",
    "spectral_density",
    "lead_self_energy",
    "transmission",
    "conditional_occupation",
    "conditional_current",
    "conditional_shot_noise",
    "charge_noise_spectrum",
    "friction_and_diffusion",
    "build_coefficient_table",
]

RTOL = 1e-8          # default relative quadrature tolerance
ATOL = 1e-14         # absolute floor so identically-zero integrands converge
STENCIL_STEP = 0.05  # initial frequency step for the spectrum derivative
STENCIL_RTOL = 1e-3  # successive stencil estimates must agree this well
STENCIL_ATOL = 1e-10 # rates below this are dynamically irrelevant
MAX_HALVINGS = 6


def fermi_dirac(energy, chemical_potential, inverse_temperature):
    """Occupancy 1/(e^{beta(E-mu)}+1), safe against exp overflow."""
    if inverse_temperature <= 0:
        raise ValueError("inverse_temperature must be > 0")
    arg = 0.5 * inverse_temperature * (np.asarray(energy) - chemical_potential)
    return 0.5 * (1.0 - np.tanh(arg))


def spectral_density(energy, lead: LeadSpec):
    """Lorentzian tunnelling rate of one lead band."""
    detune = np.asarray(energy) - lead.band_center
    bw2 = lead.bandwidth**2
    return lead.peak_rate * bw2 / (detune**2 + bw2)


def lead_self_energy(energy, lead: LeadSpec):
    """Retarded self-energy of a Lorentzian band, in closed form.

    Its imaginary part equals -spectral_density/2 identically, which is the
    regression handle for the principal-value (real) part.
    """
    detune = np.asarray(energy) - lead.band_center
    return (0.5 * lead.peak_rate * lead.bandwidth) / (detune + 1j * lead.bandwidth)


def _resonance_denominator(energy, params: SystemParams):
    """E - eps - chi_L - chi_R, before the position shift is added."""
    return (
        np.asarray(energy, dtype=complex)
        - params.dot_energy
        - lead_self_energy(energy, params.left)
        - lead_self_energy(energy, params.right)
    )


def transmission(energy, position, params: SystemParams):
    """Landauer transmission of the shifted resonant level, in [0, 1]."""
    kl = spectral_density(energy, params.left)
    kr = spectral_density(energy, params.right)
    den = np.abs(_resonance_denominator(energy, params) + params.force * position) ** 2
    tau = kl * kr / den
    over = np.max(tau) if np.ndim(tau) else tau
    if over > 1.0 + 1e-12:
        warnings.warn(
            f"transmission exceeded unity by {over - 1.0:.3e}; clipping",
            RuntimeWarning,
            stacklevel=2,
        )
    return np.clip(tau, 0.0, 1.0)


def _window(params: SystemParams, pad: float = 0.0):
    """Integration window and panel seeds covering bands and bias edges."""
    anchors = [
        params.left.band_center,
        params.right.band_center,
        params.left.chemical_potential,
        params.right.chemical_potential,
        params.dot_energy,
    ]
    reach = 10.0 * max(
        params.left.bandwidth,
        params.right.bandwidth,
        1.0 / params.inverse_temperature,
    )
    lo = min(anchors) - reach - pad
    hi = max(anchors) + reach + pad
    seeds = anchors + [
        params.left.band_center - params.left.bandwidth,
        params.left.band_center + params.left.bandwidth,
        params.right.band_center - params.right.bandwidth,
        params.right.band_center + params.right.bandwidth,
    ]
    return lo, hi, seeds


def _family_batch(positions, omegas, params: SystemParams, rtol: float):
    """All transport integrals for a batch of positions in one adaptive pass.

    Returns (occupation, current, shot_thermal, shot_partition, spectrum)
    where spectrum has shape (len(omegas), len(positions)).  Components share
    one panel subdivision, so the integrator refines for the worst of them.
    """
    xs = np.asarray(positions, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    n_x, n_w = xs.size, omegas.size
    force = params.force
    mu_l = params.left.chemical_potential
    mu_r = params.right.chemical_potential
    beta = params.inverse_temperature

    def integrand(energy):
        kl = spectral_density(energy, params.left)
        kr = spectral_density(energy, params.right)
        fl = fermi_dirac(energy, mu_l, beta)
        fr = fermi_dirac(energy, mu_r, beta)
        base = _resonance_denominator(energy, params)
        g2 = 1.0 / np.abs(base[None, :] + force * xs[:, None]) ** 2
        w_less = kl * fl + kr * fr
        w_more = kl * (1.0 - fl) + kr * (1.0 - fr)
        tau = (kl * kr) * g2
        fwin = fl - fr
        rows = [
            g2 * (w_less / (2.0 * np.pi)),
            tau * (fwin / np.pi),
            tau * ((fl * (1.0 - fl) + fr * (1.0 - fr)) * (2.0 / np.pi)),
            tau * (1.0 - tau) * (fwin**2 * (2.0 / np.pi)),
        ]
        sigma_less = g2 * w_less
        for w in omegas:
            shifted = energy + w
            ks = spectral_density(shifted, params.left)
            kt = spectral_density(shifted, params.right)
            fs = fermi_dirac(shifted, mu_l, beta)
            ft = fermi_dirac(shifted, mu_r, beta)
            base_s = _resonance_denominator(shifted, params)
            g2_s = 1.0 / np.abs(base_s[None, :] + force * xs[:, None]) ** 2
            more_s = ks * (1.0 - fs) + kt * (1.0 - ft)
            rows.append(
                sigma_less * (g2_s * more_s) * (force**2 / (2.0 * np.pi))
            )
        return np.concatenate(rows, axis=0)

    pad = float(np.max(np.abs(omegas))) if n_w else 0.0
    lo, hi, seeds = _window(params, pad=pad)
    try:
        result = integrate(
            integrand, lo, hi, rtol=rtol, atol=ATOL, breakpoints=seeds
        )
    except QuadratureError as exc:
        raise QuadratureError(
            f"transport quadrature failed for positions {xs!r}: {exc} "
            f"(achieved {exc.achieved:.3e}, requested {exc.requested:.3e})",
            achieved=exc.achieved,
            requested=exc.requested,
        ) from None
    vals = result.value.reshape(4 + n_w, n_x)
    return vals[0], vals[1], vals[2], vals[3], vals[4:]


@functools.lru_cache(maxsize=128)
def _baseline_occupation(params: SystemParams, rtol: float) -> float:
    """Dot occupation with the electromechanical force removed."""
    decoupled = replace(params, coupling=0.0)
    occ, _, _, _, _ = _family_batch([0.0], [], decoupled, rtol)
    return float(occ[0])


def conditional_occupation(position, params: SystemParams, *, rtol: float = RTOL):
    """(total, excess) dot occupation at frozen position.

    ``excess`` subtracts the zero-coupling baseline, so it vanishes
    identically when the force is switched off.
    """
    occ, _, _, _, _ = _family_batch([position], [], params, rtol)
    total = float(occ[0])
    return total, total - _baseline_occupation(params, rtol)


def conditional_current(position, params: SystemParams, *, rtol: float = RTOL):
    """Mean charge current through the dot at frozen position."""
    _, cur, _, _, _ = _family_batch([position], [], params, rtol)
    return float(cur[0])


def conditional_shot_noise(
    position, params: SystemParams, *, rtol: float = RTOL, split: bool = False
):
    """Zero-frequency current noise at frozen position (always >= 0).

    With ``split=True`` returns the (thermal, partition) pieces separately;
    the partition piece carries the factor tau(1-tau) and vanishes on a
    perfectly transmitting bias window.
    """
    _, _, th, pa, _ = _family_batch([position], [], params, rtol)
    if split:
        return float(th[0]), float(pa[0])
    return float(th[0] + pa[0])


def charge_noise_spectrum(
    position, omega, params: SystemParams, *, rtol: float = RTOL
):
    """Force-noise spectrum S_x(omega) of the occupation fluctuations.

    Valid as a slow-variable input only for |omega| well below the
    tunnelling rate; a warning marks evaluations outside that regime.
    """
    rate = min(params.left.peak_rate, params.right.peak_rate)
    if abs(omega) > rate / 3.0:
        warnings.warn(
            f"spectrum requested at |omega|={abs(omega):.3g}, comparable to "
            f"the tunnelling rate {rate:.3g}; slow-variable treatment is "
            "unreliable there",
            AdiabaticityWarning,
            stacklevel=2,
        )
    _, _, _, _, spec = _family_batch([position], [omega], params, rtol)
    return float(spec[0, 0])


def _spectrum_derivative(spectra: dict[float, np.ndarray], step: float):
    """Five-point first derivative at omega=0 from tabulated spectra."""
    return (
        spectra[-2 * step]
        - 8.0 * spectra[-step]
        + 8.0 * spectra[step]
        - spectra[2 * step]
    ) / (12.0 * step)


def _friction_diffusion_batch(
    positions, params: SystemParams, rtol: float, step: float
):
    """Vectorised (gamma, D) over positions with stencil-halving control."""
    xs = np.asarray(positions, dtype=float)
    omegas = [0.0, -2 * step, -step, step, 2 * step, -step / 2, step / 2]
    _, _, _, _, spec = _family_batch(xs, omegas, params, rtol)
    table = {w: spec[i] for i, w in enumerate(omegas)}
    h = step
    deriv = _spectrum_derivative(table, h)
    for _ in range(MAX_HALVINGS):
        finer = _spectrum_derivative(table, h / 2)
        gap = np.abs(finer - deriv)
        if np.all(gap <= np.maximum(STENCIL_ATOL, STENCIL_RTOL * np.abs(finer))):
            deriv = finer
            break
        deriv, h = finer, h / 2
        extra = [-h / 2, h / 2]
        _, _, _, _, spec = _family_batch(xs, extra, params, rtol)
        table.update({w: spec[i] for i, w in enumerate(extra)})
    else:
        worst = int(np.argmax(gap))
        raise RuntimeError(
            "frequency-derivative stencil did not settle at "
            f"x={xs[worst]:.6g}: residual gap {gap[worst]:.3e} on estimate "
            f"{finer[worst]:.6e} after {MAX_HALVINGS} halvings"
        )
    if not np.all(np.isfinite(deriv)):
        bad = xs[~np.isfinite(deriv)]
        raise RuntimeError(f"non-finite friction estimate at x={bad!r}")
    gamma = deriv / params.oscillator_mass
    diffusion = np.maximum(table[0.0], 0.0)
    return gamma, diffusion


def friction_and_diffusion(
    position,
    params: SystemParams,
    *,
    rtol: float = RTOL,
    step: float = STENCIL_STEP,
):
    """(gamma_x, D_x): zero-frequency slope and value of S_x.

    The friction is m^-1 dS_x/domega at omega=0 from a five-point stencil,
    halved until two successive estimates agree to 0.1%; the diffusion is
    S_x(0), floored at zero against quadrature round-off.
    """
    gamma, diffusion = _friction_diffusion_batch([position], params, rtol, step)
    return float(gamma[0]), float(diffusion[0])


@dataclass(frozen=True)
class GridSpec:
    """Uniform symmetric position grid: ``nodes`` points on [-x_max, x_max]."""

    x_max: float
    nodes: int = 801

    def __post_init__(self):
        if not self.x_max > 0:
            raise ValueError("x_max must be > 0")
        if self.nodes < 4:
            raise ValueError("need at least 4 grid nodes")

    def positions(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.nodes)


@dataclass(frozen=True)
class TransportPoint:
    """All position-conditioned transport coefficients at one grid node."""

    position: float
    excess_occupation: float
    current: float
    shot_noise: float
    friction: float
    diffusion: float


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Transport coefficients tabulated on a strictly increasing grid."""

    grid: np.ndarray
    points: tuple[TransportPoint, ...]
    params_hash: str

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size != len(self.points):
            raise ValueError("grid and points must have matching length")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)

    def column(self, name: str) -> np.ndarray:
        """One coefficient across the grid, as an array."""
        try:
            return self._columns[name]
        except AttributeError:
            cols = {
                field: np.array([getattr(p, field) for p in self.points])
                for field in (
                    "excess_occupation",
                    "current",
                    "shot_noise",
                    "friction",
                    "diffusion",
                )
            }
            object.__setattr__(self, "_columns", cols)
            return cols[name]

    def save(self, path) -> None:
        cols = {
            name: self.column(name)
            for name in (
                "excess_occupation",
                "current",
                "shot_noise",
                "friction",
                "diffusion",
            )
        }
        checksum = _table_checksum(self.grid, cols)
        header = json.dumps(
            {"params_hash": self.params_hash, "checksum": checksum}
        )
        with open(path, "wb") as fh:
            np.savez(fh, header=np.frombuffer(header.encode(), dtype=np.uint8),
                     grid=self.grid, **cols)

    @classmethod
    def load(cls, path, *, expected_hash: str | None = None) -> "CoefficientTable":
        try:
            with np.load(path) as data:
                header = json.loads(bytes(data["header"]).decode())
                grid = data["grid"]
                cols = {
                    name: data[name]
                    for name in (
                        "excess_occupation",
                        "current",
                        "shot_noise",
                        "friction",
                        "diffusion",
                    )
                }
        except FileNotFoundError:
            raise
        except Exception as exc:
            # any unreadable archive counts as corruption, so cache users can
            # rebuild instead of crashing
            raise ValueError(
                f"coefficient cache {path} is corrupt ({exc})"
            ) from exc
        if _table_checksum(grid, cols) != header["checksum"]:
            raise ValueError(f"coefficient cache {path} is corrupt (checksum)")
        if expected_hash is not None and header["params_hash"] != expected_hash:
            raise ValueError(
                f"coefficient cache {path} was built for different parameters"
            )
        points = tuple(
            TransportPoint(
                position=float(grid[i]),
                excess_occupation=float(cols["excess_occupation"][i]),
                current=float(cols["current"][i]),
                shot_noise=float(cols["shot_noise"][i]),
                friction=float(cols["friction"][i]),
                diffusion=float(cols["diffusion"][i]),
            )
            for i in range(grid.size)
        )
        return cls(grid=grid, points=points, params_hash=header["params_hash"])


def _table_checksum(grid, cols: dict) -> str:
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(grid).tobytes())
    for name in sorted(cols):
        digest.update(name.encode())
        digest.update(np.ascontiguousarray(cols[name]).tobytes())
    return digest.hexdigest()


def table_fingerprint(
    params: SystemParams, grid: np.ndarray, rtol: float, step: float
) -> str:
    grid = np.ascontiguousarray(grid, dtype=float)
    return fingerprint(
        params,
        extra={
            "rtol": rtol,
            "stencil_step": step,
            "grid_sha": hashlib.sha256(grid.tobytes()).hexdigest(),
        },
    )


def build_coefficient_table(
    params: SystemParams,
    grid_spec,
    *,
    rtol: float = RTOL,
    step: float = STENCIL_STEP,
    threads: int = 1,
    chunk: int = 64,
) -> CoefficientTable:
    """Tabulate every transport coefficient over a position grid.

    ``grid_spec`` is a :class:`GridSpec` or an explicit strictly increasing
    array of positions.  Work is split into contiguous chunks; with
    ``threads > 1`` the chunks run on a pool but land in preallocated slots,
    so the result is identical for any thread count.
    """
    if isinstance(grid_spec, GridSpec):
        grid = grid_spec.positions()
    else:
        grid = np.asarray(grid_spec, dtype=float)
    if grid.ndim != 1 or not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be a strictly increasing 1-D array")

    occ = np.empty_like(grid)
    cur = np.empty_like(grid)
    shot = np.empty_like(grid)
    gam = np.empty_like(grid)
    dif = np.empty_like(grid)
    baseline = _baseline_occupation(params, rtol)

    def work(span):
        lo, hi = span
        xs = grid[lo:hi]
        o, c, th, pa, _ = _family_batch(xs, [], params, rtol)
        g, d = _friction_diffusion_batch(xs, params, rtol, step)
        occ[lo:hi] = o - baseline
        cur[lo:hi] = c
        shot[lo:hi] = th + pa
        gam[lo:hi] = g
        dif[lo:hi] = d

    spans = [(i, min(i + chunk, grid.size)) for i in range(0, grid.size, chunk)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, spans))
    else:
        for span in spans:
            work(span)

    stacked = np.stack([occ, cur, shot, gam, dif])
    if not np.all(np.isfinite(stacked)):
        bad = grid[~np.all(np.isfinite(stacked), axis=0)]
        raise RuntimeError(f"non-finite table column at x={bad!r}")

    points = tuple(
        TransportPoint(
            position=float(grid[i]),
            excess_occupation=float(occ[i]),
            current=float(cur[i]),
            shot_noise=float(shot[i]),
            friction=float(gam[i]),
            diffusion=float(dif[i]),
        )
        for i in range(grid.size)
    )
    return CoefficientTable(
        grid=grid,
        points=points,
        params_hash=table_fingerprint(params, grid, rtol, step),
    )
