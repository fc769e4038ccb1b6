"""Observation band, noise profile and spectral signal containers.

A signal observed through a noisy channel is described, after sampling and a
discrete Fourier transform, by its complex spectrum on a finite set of
equispaced positive frequencies.  The noise contribution per frequency bin is
a centred circularly symmetric complex Gaussian with known power gamma0(nu),
independent across bins.  This module holds the containers for that picture
(grid, noise, magnitude/phase spectrum, complex observation), the phase
wrapping convention, the Gaussian log-likelihood and a seeded sampler, plus
flat CSV/JSON serialization.

All containers are immutable (frozen dataclasses with read-only arrays), so
every operation in the package is a pure function safe for concurrent use.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

__all__ = [
    "ChartMismatchError",
    "ConvergenceError",
    "FrequencyGrid",
    "NoiseProfile",
    "Observation",
    "SignalSpectrum",
    "band_energy",
    "band_from_json",
    "band_to_json",
    "build_grid",
    "load_band_csv",
    "log_likelihood",
    "phase_rms_diff",
    "sample_observation",
    "save_band_csv",
    "wrap_phase",
]


class ChartMismatchError(ValueError):
    """Magnitudes are not proportional to the requested template."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""


def _readonly(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    if out.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    out.flags.writeable = False
    return out


def wrap_phase(theta):
    """Reduce an angle (or array of angles) to the half-open interval (-pi, pi].

    The map is idempotent and bit-exact for inputs already in range; the
    excluded endpoint -pi maps to +pi, and exact multiples of 2*pi map to 0.
    Scalars return a float, arrays return an array.
    """
    arr = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("wrap_phase requires finite angles")
    # round-half-even keeps +pi fixed; the two corrections settle the
    # boundary so the result is always in (-pi, pi].
    w = arr - TWO_PI * np.round(arr / TWO_PI)
    w = np.where(w <= -np.pi, w + TWO_PI, w)
    w = np.where(w > np.pi, w - TWO_PI, w)
    if np.ndim(theta) == 0:
        return float(w)
    return w


@dataclass(frozen=True)
class FrequencyGrid:
    """Equispaced positive frequencies filling the open band (nu0-B/2, nu0+B/2).

    Frequencies are normalized to the sampling rate (dimensionless, in
    (0, 0.5] for real signals) and sit at bin centres, which keeps the band
    edges open even when the band starts at zero.
    """

    nu0: float
    bandwidth_B: float
    n_freqs: int
    freqs: np.ndarray

    def __post_init__(self):
        freqs = _readonly(self.freqs)
        object.__setattr__(self, "freqs", freqs)
        if self.n_freqs < 1:
            raise ValueError("n_freqs must be at least 1")
        if len(freqs) != self.n_freqs:
            raise ValueError("freqs length does not match n_freqs")
        if self.bandwidth_B <= 0.0 or not math.isfinite(self.bandwidth_B):
            raise ValueError("bandwidth_B must be positive and finite")
        if not np.all(np.isfinite(freqs)) or freqs[0] <= 0.0:
            raise ValueError("frequencies must be finite and strictly positive")
        if self.n_freqs > 1:
            steps = np.diff(freqs)
            if np.any(steps <= 0.0):
                raise ValueError("frequencies must be strictly increasing")
            mean_step = float(np.mean(steps))
            if np.max(np.abs(steps - mean_step)) > 1e-12 * float(np.max(freqs)):
                raise ValueError("frequencies must be equispaced")
        centre = 0.5 * (freqs[0] + freqs[-1])
        if abs(centre - self.nu0) > 1e-9 * max(abs(self.nu0), 1.0):
            raise ValueError("freqs are not centred on nu0")

    @classmethod
    def from_freqs(cls, freqs, bandwidth_B: float | None = None) -> "FrequencyGrid":
        """Rebuild a grid from its frequency list, inferring the metadata.

        For a single-bin grid the bandwidth is not recoverable from the list;
        it defaults to nu0 (any width below 2*nu0 is admissible).
        """
        freqs = np.asarray(freqs, dtype=float)
        n = len(freqs)
        if n == 0:
            raise ValueError("empty frequency list")
        nu0 = 0.5 * (float(freqs[0]) + float(freqs[-1]))
        if bandwidth_B is None:
            if n > 1:
                bandwidth_B = (float(freqs[-1]) - float(freqs[0])) / (n - 1) * n
            else:
                bandwidth_B = nu0
        return cls(nu0, float(bandwidth_B), n, freqs)

    @property
    def spacing(self) -> float:
        return self.bandwidth_B / self.n_freqs


def build_grid(nu0: float, bandwidth_B: float, n_freqs: int) -> FrequencyGrid:
    """Grid of ``n_freqs`` bin-centre frequencies on the open band around nu0.

    The band may start exactly at zero frequency (the centres stay strictly
    positive); a negative band start is rejected.
    """
    if n_freqs < 1:
        raise ValueError("n_freqs must be at least 1")
    if bandwidth_B <= 0.0:
        raise ValueError("bandwidth_B must be positive")
    start = nu0 - 0.5 * bandwidth_B
    if start < 0.0:
        raise ValueError("band start nu0 - B/2 must be non-negative")
    step = bandwidth_B / n_freqs
    freqs = start + (np.arange(n_freqs) + 0.5) * step
    return FrequencyGrid(float(nu0), float(bandwidth_B), int(n_freqs), freqs)


@dataclass(frozen=True)
class NoiseProfile:
    """Known noise power gamma0(nu) per grid bin, all strictly positive."""

    gamma0: np.ndarray

    def __post_init__(self):
        gamma0 = _readonly(self.gamma0)
        object.__setattr__(self, "gamma0", gamma0)
        if len(gamma0) < 1:
            raise ValueError("noise profile is empty")
        if not np.all(np.isfinite(gamma0)) or np.any(gamma0 <= 0.0):
            raise ValueError("gamma0 must be strictly positive and finite")

    @classmethod
    def flat(cls, value: float, n_freqs: int) -> "NoiseProfile":
        return cls(np.full(n_freqs, float(value)))

    @property
    def n_freqs(self) -> int:
        return len(self.gamma0)

    @property
    def weights(self) -> np.ndarray:
        """Per-bin metric weights 2 / gamma0."""
        return 2.0 / self.gamma0


@dataclass(frozen=True)
class SignalSpectrum:
    """Magnitude rho >= 0 and wrapped phase psi in (-pi, pi] per grid bin."""

    rho: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        rho = _readonly(self.rho)
        psi = _readonly(self.psi)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "psi", psi)
        if len(rho) != len(psi):
            raise ValueError("rho and psi lengths differ")
        if not np.all(np.isfinite(rho)) or np.any(rho < 0.0):
            raise ValueError("rho must be finite and non-negative")
        if not np.all(np.isfinite(psi)):
            raise ValueError("psi must be finite")
        if np.any(psi <= -np.pi) or np.any(psi > np.pi):
            raise ValueError("psi must lie in (-pi, pi]")

    @classmethod
    def from_complex(cls, values) -> "SignalSpectrum":
        values = np.asarray(values, dtype=complex)
        return cls(np.abs(values), wrap_phase(np.angle(values)))

    def to_complex(self) -> np.ndarray:
        return self.rho * np.exp(1j * self.psi)

    @property
    def n_freqs(self) -> int:
        return len(self.rho)


@dataclass(frozen=True)
class Observation:
    """One complex observed value per grid bin."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim != 1:
            raise ValueError("expected a one-dimensional sequence")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        if not np.all(np.isfinite(values)):
            raise ValueError("observation values must be finite")

    @property
    def n_freqs(self) -> int:
        return len(self.values)


def _check_aligned(*lengths: int) -> int:
    if len(set(lengths)) != 1:
        raise ValueError(f"misaligned band lengths: {lengths}")
    return lengths[0]


def log_likelihood(obs: Observation, spectrum: SignalSpectrum, noise: NoiseProfile) -> float:
    """Log-density of an observation under the circular complex Gaussian law.

    Sum over bins of ``-ln(pi * gamma0) - |x - rho * exp(i psi)|^2 / gamma0``.
    """
    _check_aligned(obs.n_freqs, spectrum.n_freqs, noise.n_freqs)
    resid = obs.values - spectrum.to_complex()
    quad = (resid.real**2 + resid.imag**2) / noise.gamma0
    return float(np.sum(-np.log(np.pi * noise.gamma0) - quad))


def sample_observation(spectrum: SignalSpectrum, noise: NoiseProfile, seed) -> Observation:
    """Draw ``x = s + n`` with independent circular complex Gaussian noise.

    Real and imaginary parts of each bin's noise are independent Gaussians of
    variance gamma0/2, so E n = 0, E|n|^2 = gamma0 and E n^2 = 0.  Bitwise
    reproducible for equal seeds.
    """
    n = _check_aligned(spectrum.n_freqs, noise.n_freqs)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    scale = np.sqrt(0.5 * noise.gamma0)
    noise_values = scale * (z[:, 0] + 1j * z[:, 1])
    return Observation(spectrum.to_complex() + noise_values)


def band_energy(noise: NoiseProfile, rho0) -> float:
    """Band-weighted template energy: sum of (2/gamma0) * rho0^2."""
    rho0 = np.asarray(rho0, dtype=float)
    _check_aligned(noise.n_freqs, len(rho0))
    if not np.all(np.isfinite(rho0)) or np.any(rho0 < 0.0):
        raise ValueError("rho0 must be finite and non-negative")
    return float(np.sum(noise.weights * rho0**2))


def phase_rms_diff(psi1, psi2, noise: NoiseProfile, rho0) -> float:
    """Template-weighted RMS of the wrapped phase difference, in [0, pi].

    The difference is wrapped bin by bin before squaring, hence the bound.
    """
    psi1 = np.asarray(psi1, dtype=float)
    psi2 = np.asarray(psi2, dtype=float)
    rho0 = np.asarray(rho0, dtype=float)
    _check_aligned(len(psi1), len(psi2), noise.n_freqs, len(rho0))
    omega0 = band_energy(noise, rho0)
    if omega0 <= 0.0:
        raise ValueError("template energy must be positive")
    dpsi = wrap_phase(psi2 - psi1)
    return float(np.sqrt(np.sum(noise.weights * rho0**2 * dpsi**2) / omega0))


# -- serialization ----------------------------------------------------------
#
# Flat CSV columns: nu, gamma0, rho, psi (one row per bin).  The JSON form
# mirrors the container fields.  Floats are written with repr, which
# round-trips IEEE doubles exactly (17 significant digits suffice).

_CSV_HEADER = ["nu", "gamma0", "rho", "psi"]


def save_band_csv(path, grid: FrequencyGrid, noise: NoiseProfile, spectrum: SignalSpectrum) -> None:
    _check_aligned(grid.n_freqs, noise.n_freqs, spectrum.n_freqs)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_CSV_HEADER)
        for k in range(grid.n_freqs):
            writer.writerow(
                [
                    repr(float(grid.freqs[k])),
                    repr(float(noise.gamma0[k])),
                    repr(float(spectrum.rho[k])),
                    repr(float(spectrum.psi[k])),
                ]
            )


def load_band_csv(path) -> tuple[FrequencyGrid, NoiseProfile, SignalSpectrum]:
    """Inverse of :func:`save_band_csv`.

    The per-bin columns round-trip losslessly; the grid metadata (nu0,
    bandwidth) is inferred from the frequency column.
    """
    with open(path, "r", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if [h.strip() for h in header] != _CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}, want {_CSV_HEADER}")
        rows = [[float(cell) for cell in row] for row in reader if row]
    if not rows:
        raise ValueError("band CSV has no data rows")
    data = np.asarray(rows, dtype=float)
    grid = FrequencyGrid.from_freqs(data[:, 0])
    return grid, NoiseProfile(data[:, 1]), SignalSpectrum(data[:, 2], data[:, 3])


def band_to_json(grid: FrequencyGrid, noise: NoiseProfile, spectrum: SignalSpectrum) -> str:
    _check_aligned(grid.n_freqs, noise.n_freqs, spectrum.n_freqs)
    payload = {
        "grid": {
            "nu0": grid.nu0,
            "bandwidth_B": grid.bandwidth_B,
            "n_freqs": grid.n_freqs,
            "freqs": grid.freqs.tolist(),
        },
        "noise": {"gamma0": noise.gamma0.tolist()},
        "spectrum": {"rho": spectrum.rho.tolist(), "psi": spectrum.psi.tolist()},
    }
    return json.dumps(payload)


def band_from_json(text: str) -> tuple[FrequencyGrid, NoiseProfile, SignalSpectrum]:
    payload = json.loads(text)
    g = payload["grid"]
    grid = FrequencyGrid(g["nu0"], g["bandwidth_B"], g["n_freqs"], np.asarray(g["freqs"]))
    noise = NoiseProfile(np.asarray(payload["noise"]["gamma0"]))
    spec = payload["spectrum"]
    spectrum = SignalSpectrum(np.asarray(spec["rho"]), np.asarray(spec["psi"]))
    return grid, noise, spectrum
