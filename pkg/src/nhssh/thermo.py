"""Grand-canonical thermodynamics of chains with possibly complex spectra.

All finite-temperature sums run directly over complex single-particle
energies; imaginary parts of observables cancel pairwise for spectra closed
under complex conjugation, and a residue above tolerance raises
ComplexLeakage instead of being silently discarded.  Units: k_B = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.signal

from .errors import (
    ComplexLeakage,
    NonPositiveTemperature,
    NoPeaksFound,
    StepTooLarge,
    WindowTooNarrow,
)
from .lattice import ModelParams, Boundary, MomentumGrid, bulk_spectrum, obc_spectrum
from .topology import critical_deltas

# Floor on |1 + e^{+-x}|: keeps the Fermi factors finite when a complex mode
# hits a Matsubara-like pole (the physical origin of the oscillating spikes).
_POLE_FLOOR = 1e-12
_LEAKAGE_TOL = 1e-8


def _clip_away_from_zero(w: np.ndarray) -> np.ndarray:
    mag = np.abs(w)
    phase = np.where(mag > 0, w / np.where(mag > 0, mag, 1.0), 1.0)
    return np.where(mag < _POLE_FLOOR, _POLE_FLOOR * phase, w)


def _axis_snap(energies: np.ndarray) -> np.ndarray:
    """Snap eigenvalues onto the real or imaginary axis when within roundoff.

    Particle-hole symmetric spectra come in conjugate pairs, but roundoff
    (cos(pi/2) is not exactly zero; general eigensolvers) can leave the two
    members of an imaginary-axis pair on opposite sides of the axis, i.e. as
    negatives rather than conjugates.  The half-plane branch constants of
    the stable log/sigmoid evaluations then add instead of canceling.
    Restoring exact axis membership keeps the pair sums real.
    """
    e = np.atleast_1d(np.asarray(energies, dtype=complex)).copy()
    if e.size == 0:
        return e
    scale = float(np.max(np.abs(e)))
    if scale > 0.0:
        tol = 1e-12 * scale
        e.real[np.abs(e.real) < tol] = 0.0
        e.imag[np.abs(e.imag) < tol] = 0.0
    return e


def _log1pexp(x: np.ndarray) -> np.ndarray:
    """ln(1 + e^x) for complex x, overflow-safe on both half planes."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    out = np.empty_like(x)
    pos = x.real > 0
    for mask, shift in ((~pos, None), (pos, x)):
        if not mask.any():
            continue
        z = np.exp(-x[mask]) if shift is not None else np.exp(x[mask])
        w = 1.0 + z
        val = np.log(_clip_away_from_zero(w))
        out[mask] = (x[mask] + val) if shift is not None else val
    return out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    """1 / (1 + e^{-x}) for complex x, overflow-safe on both half planes."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    out = np.empty_like(x)
    pos = x.real >= 0
    if pos.any():
        den = _clip_away_from_zero(1.0 + np.exp(-x[pos]))
        out[pos] = 1.0 / den
    if (~pos).any():
        z = np.exp(x[~pos])
        out[~pos] = z / _clip_away_from_zero(1.0 + z)
    return out


def _real_part(value: complex, what: str, tol: float = _LEAKAGE_TOL) -> float:
    if abs(value.imag) > tol * (abs(value.real) + 1.0):
        raise ComplexLeakage(
            f"{what}: imaginary residue {value.imag:.3e} exceeds tolerance "
            f"(real part {value.real:.3e})"
        )
    return float(value.real)


def _check_temperature(temperature: float) -> None:
    if not temperature > 0:
        raise NonPositiveTemperature(f"T = {temperature}; need T > 0")


def grand_potential(energies: np.ndarray, temperature: float, mu: float = 0.0) -> float:
    """Omega = -T sum_n ln(1 + e^{-(E_n - mu)/T}) over complex energies."""
    _check_temperature(temperature)
    e = _axis_snap(np.asarray(energies, dtype=complex).ravel())
    total = -temperature * np.sum(_log1pexp(-(e - mu) / temperature))
    return _real_part(total, "grand potential")


def grand_potential_T0(energies: np.ndarray, mu: float = 0.0) -> float:
    """Zero-temperature limit: Re sum over modes with Re E < mu of (E - mu)."""
    e = _axis_snap(np.asarray(energies, dtype=complex).ravel())
    occ = e.real < mu
    return float(np.sum(e[occ] - mu).real)


def entropy(energies: np.ndarray, temperature: float, mu: float = 0.0) -> float:
    """S = sum_n [ln(1 + e^{x_n}) - x_n sigma(x_n)], x_n = (E_n - mu)/T.

    Per mode this equals the usual -[f ln f + (1-f) ln(1-f)] with the Fermi
    factor f = sigma(-x); the difference form stays finite for complex x.
    """
    _check_temperature(temperature)
    e = _axis_snap(np.asarray(energies, dtype=complex).ravel())
    x = (e - mu) / temperature
    total = np.sum(_log1pexp(x) - x * _sigmoid(x))
    return _real_part(total, "entropy")


def heat_capacity(energies: np.ndarray, temperature: float, mu: float = 0.0) -> float:
    """C_V = sum_n x_n^2 sigma(x_n) sigma(-x_n), x_n = (E_n - mu)/T.

    A conjugate pair of imaginary modes +-i y contributes
    -(y/T)^2 / (2 cos^2(y/(2T))): negative, and divergent where the cosine
    vanishes.  That contribution is kept as-is; it is the signal the
    inverse-temperature scans look for.
    """
    _check_temperature(temperature)
    e = _axis_snap(np.asarray(energies, dtype=complex).ravel())
    x = (e - mu) / temperature
    total = np.sum(x**2 * _sigmoid(x) * _sigmoid(-x))
    return _real_part(total, "heat capacity")


@dataclass(frozen=True)
class HillDecomposition:
    """Grand potential of the open chain split against its bulk reference.

    omega_open is the full open-chain value, omega_reference the same sum
    over the bulk (momentum-grid) spectrum, omega_bulk_per_site their shared
    extensive density, omega_edge = omega_open - omega_reference the
    subextensive remainder carried by the boundaries.
    """

    temperature: float
    omega_open: float
    omega_reference: float
    omega_bulk_per_site: float
    omega_edge: float


def hill_split(
    params: ModelParams,
    temperature: float,
    grid: Optional[MomentumGrid] = None,
) -> HillDecomposition:
    """Split the open chain's grand potential into bulk and edge parts.

    The bulk reference samples the appropriate band structure (Bloch for
    delta = 0, the momentum-deformed surrogate otherwise) on an L-point
    grid, so both terms contain 2L modes.
    """
    open_params = ModelParams(
        t1=params.t1, length=params.length, t2=params.t2,
        delta=params.delta, boundary=Boundary.OBC, mu=params.mu,
    )
    e_open = obc_spectrum(open_params)
    e_ref = bulk_spectrum(open_params, grid)
    omega_open = grand_potential(e_open, temperature, params.mu)
    omega_ref = grand_potential(e_ref, temperature, params.mu)
    return HillDecomposition(
        temperature=temperature,
        omega_open=omega_open,
        omega_reference=omega_ref,
        omega_bulk_per_site=omega_ref / (2 * params.length),
        omega_edge=omega_open - omega_ref,
    )


@dataclass(frozen=True)
class ThermoCurve:
    """Temperature sweeps of bulk densities (per unit cell) and edge totals.

    s_bulk and cv_bulk are bulk entropy and heat capacity per unit cell from
    the momentum-grid reference; s_edge and cv_edge are the open-chain totals
    minus the reference, i.e. what the boundaries add.
    """

    temperatures: np.ndarray
    s_bulk: np.ndarray
    s_edge: np.ndarray
    cv_bulk: np.ndarray
    cv_edge: np.ndarray
    length: int


def thermo_curve(
    params: ModelParams,
    temperatures: np.ndarray,
    grid: Optional[MomentumGrid] = None,
) -> ThermoCurve:
    """Entropy and heat capacity across a temperature sweep."""
    temps = np.asarray(temperatures, dtype=float).ravel()
    open_params = ModelParams(
        t1=params.t1, length=params.length, t2=params.t2,
        delta=params.delta, boundary=Boundary.OBC, mu=params.mu,
    )
    e_open = obc_spectrum(open_params)
    e_ref = bulk_spectrum(open_params, grid)
    L = params.length
    s_bulk = np.empty(len(temps))
    s_edge = np.empty(len(temps))
    cv_bulk = np.empty(len(temps))
    cv_edge = np.empty(len(temps))
    for i, T in enumerate(temps):
        sb = entropy(e_ref, T, params.mu)
        so = entropy(e_open, T, params.mu)
        cb = heat_capacity(e_ref, T, params.mu)
        co = heat_capacity(e_open, T, params.mu)
        s_bulk[i] = sb / L
        s_edge[i] = so - sb
        cv_bulk[i] = cb / L
        cv_edge[i] = co - cb
    return ThermoCurve(
        temperatures=temps, s_bulk=s_bulk, s_edge=s_edge,
        cv_bulk=cv_bulk, cv_edge=cv_edge, length=L,
    )


@dataclass(frozen=True)
class CentralChargeFit:
    """Through-origin linear fit cv_bulk = slope * T on a low-T window."""

    slope: float
    central_charge: float
    residual: float
    n_points: int
    window: tuple


def fit_central_charge_cv(
    curve: ThermoCurve, window: tuple = (0.02, 0.1)
) -> CentralChargeFit:
    """Low-temperature heat-capacity fit; central charge c = 3 slope / pi.

    At a critical point the bulk heat capacity per unit cell grows as
    (pi c / 3) T.  The fit is least squares through the origin over the
    samples inside the window; fewer than five raises WindowTooNarrow.
    """
    lo, hi = window
    mask = (curve.temperatures >= lo) & (curve.temperatures <= hi)
    n = int(np.count_nonzero(mask))
    if n < 5:
        raise WindowTooNarrow(f"{n} samples in window [{lo}, {hi}]; need at least 5")
    t = curve.temperatures[mask]
    cv = curve.cv_bulk[mask]
    slope = float(np.sum(t * cv) / np.sum(t * t))
    residual = float(np.sqrt(np.mean((cv - slope * t) ** 2)))
    return CentralChargeFit(
        slope=slope,
        central_charge=3.0 * slope / np.pi,
        residual=residual,
        n_points=n,
        window=(lo, hi),
    )


@dataclass(frozen=True)
class DerivativeScan:
    """Finite-difference derivatives of the grand potential across a delta sweep.

    d_bulk_per_site differentiates the extensive density (bulk reference
    over 2L sites); d_edge differentiates the open-minus-reference part.
    order is the derivative order (1 or 2), step the stencil half-width.
    """

    deltas: np.ndarray
    d_bulk_per_site: np.ndarray
    d_edge: np.ndarray
    order: int
    step: float
    temperature: Optional[float]


def delta_derivative_scan(
    params: ModelParams,
    deltas: np.ndarray,
    order: int = 2,
    step: float = 1e-3,
    temperature: Optional[float] = None,
) -> DerivativeScan:
    """Central-difference d/d(delta) scan of bulk density and edge grand potential.

    temperature None means the T = 0 ground-state sums.  The stencil must
    not straddle a phase boundary: step above half the least distance from
    any grid point to a critical delta raises StepTooLarge.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if step <= 0:
        raise ValueError("step must be positive")
    deltas = np.asarray(deltas, dtype=float).ravel()
    bounds = critical_deltas(params.t1, params.t2)
    edges = [b for b in (bounds.lower, bounds.nbbc, bounds.upper) if b is not None]
    gap = min(
        min(abs(abs(d) - e) for e in edges) for d in deltas
    )
    if step > gap / 2:
        raise StepTooLarge(
            f"step {step} exceeds half the minimum boundary distance {gap:.3e}; "
            "the stencil would straddle a phase boundary"
        )

    def omega_pair(delta: float) -> tuple:
        p = ModelParams(
            t1=params.t1, length=params.length, t2=params.t2,
            delta=delta, boundary=Boundary.OBC, mu=params.mu,
        )
        e_open = obc_spectrum(p)
        e_ref = bulk_spectrum(p)
        if temperature is None:
            oo = grand_potential_T0(e_open, params.mu)
            orf = grand_potential_T0(e_ref, params.mu)
        else:
            oo = grand_potential(e_open, temperature, params.mu)
            orf = grand_potential(e_ref, temperature, params.mu)
        return orf / (2 * params.length), oo - orf

    d_bulk = np.empty(len(deltas))
    d_edge = np.empty(len(deltas))
    for i, d in enumerate(deltas):
        fm = omega_pair(d - step)
        fp = omega_pair(d + step)
        if order == 1:
            d_bulk[i] = (fp[0] - fm[0]) / (2 * step)
            d_edge[i] = (fp[1] - fm[1]) / (2 * step)
        else:
            f0 = omega_pair(d)
            d_bulk[i] = (fp[0] - 2 * f0[0] + fm[0]) / step**2
            d_edge[i] = (fp[1] - 2 * f0[1] + fm[1]) / step**2
    return DerivativeScan(
        deltas=deltas, d_bulk_per_site=d_bulk, d_edge=d_edge,
        order=order, step=step, temperature=temperature,
    )


@dataclass(frozen=True)
class ItcReport:
    """Inverse-temperature scan of the bulk heat capacity per unit cell.

    peak_betas are the detected spike positions of log10|cv|;
    period_measured is their mean spacing, period_expected the analytic
    2 pi / y from the imaginary mode pair +-iy (None when the spectrum has
    no such pair).
    """

    betas: np.ndarray
    cv: np.ndarray
    peak_betas: np.ndarray
    period_measured: float
    period_expected: Optional[float]


def itc_scan(
    params: ModelParams,
    betas: np.ndarray,
    grid: Optional[MomentumGrid] = None,
) -> ItcReport:
    """Scan cv per cell over inverse temperature and locate oscillation spikes.

    Spikes are detected on log10|cv| with a prominence of 5% of its range;
    they sit where cos(beta y / 2) = 0 for the imaginary pair +-iy, spaced
    2 pi / y apart.  Fewer than two detected peaks raises NoPeaksFound.
    The grid should resolve k = +-pi/2 (length divisible by 4) so that the
    purely imaginary modes are sampled exactly.
    """
    betas = np.asarray(betas, dtype=float).ravel()
    if np.any(betas <= 0):
        raise NonPositiveTemperature("beta grid must be strictly positive")
    e_ref = bulk_spectrum(params, grid)
    cv = np.array([heat_capacity(e_ref, 1.0 / b, params.mu) for b in betas])
    cv /= params.length

    log_abs = np.log10(np.abs(cv) + 1e-300)
    span = float(log_abs.max() - log_abs.min())
    # Only strongly negative heat capacity qualifies: the spikes are the
    # divergences of the imaginary-pair term, negative near its poles and
    # orders of magnitude above everything else once the grid resolves
    # them.  Positive Schottky-like bumps and the exponentially damped
    # negative wiggles that complex (not imaginary) pairs produce in the
    # protected phases must not count.
    candidate = (cv < -1.0)
    marked = np.where(candidate, log_abs, log_abs.min() - 1.0)
    peaks, _ = scipy.signal.find_peaks(marked, prominence=0.05 * max(span, 1e-12))
    if len(peaks) < 2:
        raise NoPeaksFound(
            f"{len(peaks)} spike(s) found across beta in [{betas[0]}, {betas[-1]}]; "
            "need at least 2 to measure a period"
        )
    peak_betas = betas[peaks]
    period = float(np.mean(np.diff(peak_betas)))

    y2 = params.delta**2 - params.t1**2 - params.t2**2
    expected = float(2.0 * np.pi / np.sqrt(y2)) if y2 > 0 else None
    return ItcReport(
        betas=betas, cv=cv, peak_betas=peak_betas,
        period_measured=period, period_expected=expected,
    )
