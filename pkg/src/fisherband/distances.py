"""Closed-form information distances between band-limited signals.

Between two arbitrary spectra the distance is the Mahalanobis form of the
real embedding, which in polar variables reads

    d_full^2 = sum_nu (2/gamma0) [rho2^2 + rho1^2 - 2 rho1 rho2 cos(dpsi)].

When both endpoints share a magnitude template (rho = alpha * rho0) the
distance measured inside that submanifold depends only on the endpoint
attenuations and the weighted RMS wrapped phase difference delta:

    d_alpha^2 = omega0 [alpha2^2 + alpha1^2 - 2 alpha1 alpha2 cos(delta)].

The submanifold distance always dominates the full one (it is an equality
exactly for frequency-constant phase differences), their ratio tends to a
universal plateau for fast phase variation, and both scale linearly with the
template level (square root of the signal-to-noise ratio).  All quadratic
forms are evaluated in half-angle form to avoid cancellation between nearby
endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .band import (
    ChartMismatchError,
    FrequencyGrid,
    NoiseProfile,
    SignalSpectrum,
    band_energy,
    phase_rms_diff,
    wrap_phase,
)

__all__ = [
    "DistanceReport",
    "distance_alpha",
    "distance_full",
    "distance_full_embedding",
    "distance_full_known_mag",
    "large_phase_limits",
    "ratio_time_delay",
    "report",
    "small_phase_equivalent",
]


def _chord_sq(a1: float, a2: float, half_sine_sq: float) -> float:
    """Stable ``a1^2 + a2^2 - 2 a1 a2 (1 - 2 h)`` with h = sin^2(angle/2)."""
    return (a2 - a1) ** 2 + 4.0 * a1 * a2 * half_sine_sq


def distance_full(s1: SignalSpectrum, s2: SignalSpectrum, noise: NoiseProfile) -> float:
    """Distance on the full band manifold, polar form.

    ``sqrt(sum (2/gamma0) [rho2^2 + rho1^2 - 2 rho1 rho2 cos(psi2 - psi1)])``,
    evaluated per bin in half-angle form.
    """
    if not (s1.n_freqs == s2.n_freqs == noise.n_freqs):
        raise ValueError("misaligned spectra or noise profile")
    half = np.sin(0.5 * wrap_phase(s2.psi - s1.psi)) ** 2
    terms = (s2.rho - s1.rho) ** 2 + 4.0 * s1.rho * s2.rho * half
    return float(np.sqrt(np.sum(noise.weights * terms)))


def distance_full_embedding(s1: SignalSpectrum, s2: SignalSpectrum, noise: NoiseProfile) -> float:
    """Same distance through the real (Re, Im) embedding: the Mahalanobis
    form with the diagonal noise covariance.  Kept as an independent
    evaluation route for cross-checks."""
    if not (s1.n_freqs == s2.n_freqs == noise.n_freqs):
        raise ValueError("misaligned spectra or noise profile")
    diff = s2.to_complex() - s1.to_complex()
    return float(np.sqrt(np.sum(noise.weights * (diff.real**2 + diff.imag**2))))


def distance_alpha(
    alpha1: float, alpha2: float, psi1, psi2, grid: FrequencyGrid, noise: NoiseProfile, rho0
) -> float:
    """Distance measured inside the known-magnitude submanifold.

    ``sqrt(omega0) * sqrt(alpha2^2 + alpha1^2 - 2 alpha1 alpha2 cos delta)``
    with delta the weighted RMS wrapped phase difference.
    """
    if not (alpha1 > 0.0 and alpha2 > 0.0):
        raise ValueError("endpoint attenuations must be positive")
    _check_band(psi1, psi2, grid, noise, rho0)
    omega0 = band_energy(noise, rho0)
    delta = phase_rms_diff(psi1, psi2, noise, rho0)
    return math.sqrt(omega0 * _chord_sq(alpha1, alpha2, math.sin(0.5 * delta) ** 2))


def distance_full_known_mag(
    alpha1: float, alpha2: float, psi1, psi2, grid: FrequencyGrid, noise: NoiseProfile, rho0
) -> float:
    """Full-manifold distance specialized to proportional magnitudes.

    ``sqrt(omega0) * sqrt(alpha2^2 + alpha1^2 - 2 alpha1 alpha2 C)`` where C
    is the template-weighted mean of cos(dpsi); equals :func:`distance_full`
    on the induced spectra.
    """
    if not (alpha1 > 0.0 and alpha2 > 0.0):
        raise ValueError("endpoint attenuations must be positive")
    psi1, psi2, rho0 = _check_band(psi1, psi2, grid, noise, rho0)
    omega0 = band_energy(noise, rho0)
    if omega0 <= 0.0:
        raise ValueError("template energy must be positive")
    dpsi = wrap_phase(psi2 - psi1)
    w = noise.weights * rho0**2
    # (1 - C) as a weighted mean of 2 sin^2(dpsi/2): stable near C = 1
    one_minus_c = float(np.sum(w * 2.0 * np.sin(0.5 * dpsi) ** 2) / omega0)
    return math.sqrt(omega0 * _chord_sq(alpha1, alpha2, 0.5 * one_minus_c))


def small_phase_equivalent(
    alpha1: float, alpha2: float, psi1, psi2, grid: FrequencyGrid, noise: NoiseProfile, rho0
) -> float:
    """Shared small-phase limit of both distances.

    ``sqrt(SNR1) * sqrt((gamma - 1)^2 + gamma * delta^2)`` with
    gamma = alpha2/alpha1 and SNR1 = omega0 * alpha1^2; both exact distances
    divided by this tend to one as the phase differences shrink.
    """
    if not (alpha1 > 0.0 and alpha2 > 0.0):
        raise ValueError("endpoint attenuations must be positive")
    _check_band(psi1, psi2, grid, noise, rho0)
    omega0 = band_energy(noise, rho0)
    delta = phase_rms_diff(psi1, psi2, noise, rho0)
    gamma = alpha2 / alpha1
    snr1 = omega0 * alpha1**2
    return math.sqrt(snr1 * ((gamma - 1.0) ** 2 + gamma * delta**2))


def large_phase_limits(gamma_ratio: float, snr1: float) -> tuple[float, float]:
    """Limits of both distances for fast phase variation across the band.

    With phase differences equidistributed on (-pi, pi] the weighted mean
    cosine vanishes and the RMS tends to pi/sqrt(3), giving

        d_full  -> sqrt(SNR1) * sqrt(gamma^2 + 1)
        d_alpha -> sqrt(SNR1) * sqrt(gamma^2 + 1 - 2 gamma cos(pi/sqrt(3))).
    """
    if gamma_ratio <= 0.0:
        raise ValueError("gamma_ratio must be positive")
    g = float(gamma_ratio)
    full = math.sqrt(snr1 * (g**2 + 1.0))
    sub = math.sqrt(snr1 * (g**2 + 1.0 - 2.0 * g * math.cos(math.pi / math.sqrt(3.0))))
    return full, sub


def ratio_time_delay(
    gamma_ratio: float, dpsi0: float, dtau_times_B: float, nu0_over_B: float, n_freqs: int
) -> float:
    """Submanifold-to-full distance ratio for time-delayed replicas.

    Assumes a constant per-bin signal-to-noise ratio and the linear phase law
    ``dpsi(nu) = dpsi0 - 2 pi nu dtau``.  The numerator uses the grid sum of
    the wrapped squared differences; the denominator uses the band-integral
    (sinc) approximation of the mean cosine:

        num = g^2 + 1 - 2 g cos( sqrt(mean <dpsi(nu)>^2) )
        den = g^2 + 1 - 2 g sinc(B dtau) cos(dpsi0 - 2 pi nu0 dtau)

    At coincident endpoints (the 0/0 corner) the small-phase limit gives 1.
    """
    if n_freqs < 1:
        raise ValueError("n_freqs must be at least 1")
    if gamma_ratio <= 0.0:
        raise ValueError("gamma_ratio must be positive")
    g = float(gamma_ratio)
    # bin centres expressed as nu/B so only dimensionless products appear
    positions = nu0_over_B - 0.5 + (np.arange(n_freqs) + 0.5) / n_freqs
    dpsi = wrap_phase(dpsi0 - 2.0 * np.pi * positions * dtau_times_B)
    rms = math.sqrt(float(np.mean(dpsi**2)))
    num = (g - 1.0) ** 2 + 4.0 * g * math.sin(0.5 * rms) ** 2
    mean_cos = float(np.sinc(dtau_times_B)) * math.cos(dpsi0 - 2.0 * math.pi * nu0_over_B * dtau_times_B)
    den = g**2 + 1.0 - 2.0 * g * mean_cos
    if den <= 0.0:
        return 1.0
    return math.sqrt(num / den)


@dataclass(frozen=True)
class DistanceReport:
    """Distances and the chart quantities behind them for one endpoint pair.

    Fields tied to the known-magnitude chart (everything except ``d_full``)
    are None when no template was supplied.  ``ratio`` is additionally None
    for coincident endpoints, where it is a 0/0.
    """

    d_full: float
    d_alpha: float | None = None
    omega0: float | None = None
    snr1: float | None = None
    gamma_ratio: float | None = None
    delta: float | None = None
    ratio: float | None = None

    def __post_init__(self):
        if self.d_full < 0.0 or (self.d_alpha is not None and self.d_alpha < 0.0):
            raise ValueError("distances must be non-negative")
        if self.d_alpha is not None:
            if self.d_alpha < self.d_full - 1e-12 * (1.0 + self.d_full):
                raise ValueError("submanifold distance fell below the full distance")

    def to_json_dict(self) -> dict:
        return {
            "d_full": self.d_full,
            "d_alpha": self.d_alpha,
            "omega0": self.omega0,
            "snr1": self.snr1,
            "gamma_ratio": self.gamma_ratio,
            "delta": self.delta,
            "ratio": self.ratio,
        }


def _fit_attenuation(rho: np.ndarray, rho0: np.ndarray) -> float:
    """Least-squares scale of rho against the template, with residual gate."""
    denom = float(np.dot(rho0, rho0))
    if denom <= 0.0:
        raise ChartMismatchError("template magnitude is identically zero")
    alpha = float(np.dot(rho, rho0)) / denom
    scale = float(np.linalg.norm(rho))
    resid = float(np.linalg.norm(rho - alpha * rho0))
    if resid > 1e-9 * max(scale, 1e-300):
        raise ChartMismatchError("magnitude is not proportional to the template")
    if alpha <= 0.0:
        raise ChartMismatchError("fitted attenuation is not positive")
    return alpha


def report(
    s1: SignalSpectrum, s2: SignalSpectrum, noise: NoiseProfile, rho0=None
) -> DistanceReport:
    """Bundle the distances between two spectra, with chart quantities.

    When a magnitude template ``rho0`` is supplied, both spectra must be
    proportional to it (relative residual below 1e-9), otherwise a
    :class:`ChartMismatchError` is raised.
    """
    d_full = distance_full(s1, s2, noise)
    if rho0 is None:
        return DistanceReport(d_full=d_full)
    rho0 = np.asarray(rho0, dtype=float)
    if not (s1.n_freqs == s2.n_freqs == noise.n_freqs == len(rho0)):
        raise ValueError("misaligned band inputs")
    alpha1 = _fit_attenuation(s1.rho, rho0)
    alpha2 = _fit_attenuation(s2.rho, rho0)
    omega0 = band_energy(noise, rho0)
    delta = phase_rms_diff(s1.psi, s2.psi, noise, rho0)
    d_alpha = math.sqrt(omega0 * _chord_sq(alpha1, alpha2, math.sin(0.5 * delta) ** 2))
    ratio = d_alpha / d_full if d_full > 0.0 else None
    return DistanceReport(
        d_full=d_full,
        d_alpha=d_alpha,
        omega0=omega0,
        snr1=omega0 * alpha1**2,
        gamma_ratio=alpha2 / alpha1,
        delta=delta,
        ratio=ratio,
    )


def _check_band(psi1, psi2, grid: FrequencyGrid, noise: NoiseProfile, rho0):
    psi1 = np.asarray(psi1, dtype=float)
    psi2 = np.asarray(psi2, dtype=float)
    rho0 = np.asarray(rho0, dtype=float)
    if not (len(psi1) == len(psi2) == len(rho0) == grid.n_freqs == noise.n_freqs):
        raise ValueError("misaligned band inputs")
    return psi1, psi2, rho0
