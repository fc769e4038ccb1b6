"""Geodesics of the band manifold and of the known-magnitude submanifold.

On the full band manifold (all finite-energy signals, fixed noise) geodesics
are straight lines in the real embedding (Re, Im per bin).  On the
known-magnitude submanifold (magnitude ``alpha * rho0``, free per-bin phase)
the geodesic equations reduce to

    alpha'' = K / alpha^3,      psi'(nu) = c(nu) / alpha^2,

whose boundary-value solution between (alpha1, psi1) and (alpha2, psi2) is

    alpha(s)^2 = k1 (s + k2)^2 + K / k1

with constants fixed by the endpoint attenuations and by the weighted RMS
wrapped phase difference delta:

    k1 = (alpha2 - alpha1)^2 + 4 alpha1 alpha2 sin^2(delta/2)
    k2 = -alpha1 (alpha1 - alpha2 cos delta) / k1
    K  = (alpha1 alpha2 sin delta)^2
    c(nu) = sqrt(K) * dpsi(nu) / delta.

Integrating the phase equation gives an arctan flow, implemented here and
validated against a fixed-step RK4 shooting integrator of the same ODE
system.  The module also evaluates the geodesic-equation residual of an
arbitrary sampled path (two weighted frequency sums pairing the spectral
accelerations with the parameter gradients), which independently certifies
that returned curves are geodesics and rejects non-affine reparametrizations.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .band import (
    ConvergenceError,
    FrequencyGrid,
    NoiseProfile,
    SignalSpectrum,
    band_energy,
    phase_rms_diff,
    wrap_phase,
)
from .metric import fisher_matrix
from .models import ParametricSignalModel

__all__ = [
    "AlphaGeodesic",
    "AlphaPhaseChart",
    "DegenerateGeodesicWarning",
    "EmbeddingChart",
    "GeodesicPath",
    "LdgResidual",
    "ModelChart",
    "alpha_geodesic_coeff_path",
    "embedding_coords",
    "eval_alpha_geodesic",
    "ldg_residual",
    "path_length",
    "sample_alpha_geodesic",
    "save_path_csv",
    "shoot_alpha_geodesic",
    "solve_alpha_geodesic",
    "spectrum_from_embedding",
    "straight_line_geodesic",
]


class DegenerateGeodesicWarning(UserWarning):
    """The attenuation touches zero inside the path (antipodal phases)."""


@dataclass(frozen=True)
class GeodesicPath:
    """Sampled curve: node parameters in [0, 1] with one coordinate row each."""

    sigmas: np.ndarray
    coords: np.ndarray

    def __post_init__(self):
        sigmas = np.array(self.sigmas, dtype=float)
        coords = np.array(self.coords, dtype=float)
        sigmas.flags.writeable = False
        coords.flags.writeable = False
        object.__setattr__(self, "sigmas", sigmas)
        object.__setattr__(self, "coords", coords)
        if sigmas.ndim != 1 or coords.ndim != 2 or coords.shape[0] != len(sigmas):
            raise ValueError("need one coordinate row per node")
        if len(sigmas) < 2:
            raise ValueError("a path needs at least two nodes")
        if np.any(np.diff(sigmas) <= 0.0):
            raise ValueError("node parameters must be strictly increasing")
        if abs(sigmas[0]) > 1e-12 or abs(sigmas[-1] - 1.0) > 1e-12:
            raise ValueError("path must run from 0 to 1")

    @property
    def n_nodes(self) -> int:
        return len(self.sigmas)


# -- charts ------------------------------------------------------------------


class EmbeddingChart:
    """Flat chart of the full band manifold: interleaved (Re, Im) per bin."""

    def __init__(self, noise: NoiseProfile):
        self.noise = noise
        self._w = np.repeat(noise.weights, 2)

    @property
    def dim(self) -> int:
        return 2 * self.noise.n_freqs

    def speed(self, coords, vel) -> np.ndarray:
        vel = np.asarray(vel, dtype=float)
        return np.sum(self._w * vel**2, axis=-1)


class AlphaPhaseChart:
    """Known-magnitude submanifold chart: (alpha, unwrapped phase per bin)."""

    def __init__(self, noise: NoiseProfile, rho0):
        self.noise = noise
        self.rho0 = np.asarray(rho0, dtype=float)
        self._w = noise.weights * self.rho0**2
        self.omega0 = band_energy(noise, self.rho0)

    @property
    def dim(self) -> int:
        return 1 + self.noise.n_freqs

    def speed(self, coords, vel) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        vel = np.asarray(vel, dtype=float)
        alpha = coords[..., 0]
        mag_term = self.omega0 * vel[..., 0] ** 2
        phase_term = alpha**2 * np.sum(self._w * vel[..., 1:] ** 2, axis=-1)
        return mag_term + phase_term


class ModelChart:
    """Chart of an arbitrary parametric model; speed via its metric."""

    def __init__(self, model: ParametricSignalModel, grid: FrequencyGrid, noise: NoiseProfile):
        self.model = model
        self.grid = grid
        self.noise = noise

    @property
    def dim(self) -> int:
        return self.model.n_params

    def speed(self, coords, vel) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        vel = np.atleast_2d(np.asarray(vel, dtype=float))
        p = self.model.n_mag_params
        out = np.empty(len(coords))
        for row, (x, v) in enumerate(zip(coords, vel)):
            fm = fisher_matrix(self.model, x, self.grid, self.noise)
            out[row] = v[:p] @ fm.mag_block @ v[:p] + v[p:] @ fm.phase_block @ v[p:]
        return out if out.size > 1 else out[0]


def embedding_coords(spectrum: SignalSpectrum) -> np.ndarray:
    """Interleaved (Re, Im) coordinates of a spectrum."""
    z = spectrum.to_complex()
    out = np.empty(2 * len(z))
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def spectrum_from_embedding(coords) -> SignalSpectrum:
    coords = np.asarray(coords, dtype=float)
    z = coords[0::2] + 1j * coords[1::2]
    return SignalSpectrum.from_complex(z)


def straight_line_geodesic(mu1: SignalSpectrum, mu2: SignalSpectrum, n_nodes: int = 65) -> GeodesicPath:
    """Affine path between two spectra in the (Re, Im) embedding.

    This is the geodesic of the full band manifold; converting any node back
    to a spectrum is ``spectrum_from_embedding(path.coords[j])``.
    """
    if mu1.n_freqs != mu2.n_freqs:
        raise ValueError("spectra are misaligned")
    if n_nodes < 2:
        raise ValueError("n_nodes must be at least 2")
    x1 = embedding_coords(mu1)
    x2 = embedding_coords(mu2)
    sigmas = np.linspace(0.0, 1.0, n_nodes)
    coords = x1[np.newaxis, :] + sigmas[:, np.newaxis] * (x2 - x1)[np.newaxis, :]
    return GeodesicPath(sigmas, coords)


# -- closed-form geodesic on the known-magnitude submanifold -----------------


@dataclass(frozen=True)
class AlphaGeodesic:
    """Closed-form geodesic of the known-magnitude submanifold.

    ``alpha(s) = sqrt(k1 (s + k2)^2 + K/k1)`` runs from alpha1 to alpha2;
    each bin's unwrapped phase advances by an arctan flow with per-bin
    constant ``c``.  ``delta`` is the weighted RMS wrapped phase difference
    of the endpoints, ``dpsi`` the wrapped per-bin difference, and ``psi1``
    the wrapped start phases.  ``degenerate`` marks the antipodal case
    delta = pi where the attenuation touches zero inside the path and the
    phase advance concentrates at the crossing.
    """

    alpha1: float
    alpha2: float
    k1: float
    k2: float
    K: float
    delta: float
    c: np.ndarray
    psi1: np.ndarray
    dpsi: np.ndarray
    omega0: float
    degenerate: bool = False

    def __post_init__(self):
        for name in ("c", "psi1", "dpsi"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (self.alpha1 > 0.0 and self.alpha2 > 0.0):
            raise ValueError("endpoint attenuations must be positive")
        if not 0.0 <= self.delta <= np.pi + 1e-12:
            raise ValueError("delta must lie in [0, pi]")
        if self.K < 0.0:
            raise ValueError("K must be non-negative")
        for sigma, target in ((0.0, self.alpha1), (1.0, self.alpha2)):
            got = _alpha_values(self, np.asarray([sigma]))[0]
            if abs(got - target) > 1e-10 * max(target, 1.0):
                raise ValueError("boundary attenuations are not reproduced")

    @property
    def length(self) -> float:
        """Geodesic length sqrt(omega0 * k1)."""
        return math.sqrt(self.omega0 * self.k1)

    @property
    def speed(self) -> float:
        """Constant squared speed omega0 * k1 of the affine parametrization."""
        return self.omega0 * self.k1

    def bvp_residual(self) -> float:
        """Residual of the endpoint system the constants solve.

        ``tan^2(delta) (a1^2 + a2^2 - k1)^2 + (a2^2 - a1^2 - k1)^2
        - 4 a1^2 k1`` vanishes for the exact constants; meaningless at the
        tan pole delta = pi/2.
        """
        t2 = math.tan(self.delta) ** 2
        a1s, a2s = self.alpha1**2, self.alpha2**2
        return (
            t2 * (a1s + a2s - self.k1) ** 2
            + (a2s - a1s - self.k1) ** 2
            - 4.0 * a1s * self.k1
        )

    def to_json_dict(self) -> dict:
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "k1": self.k1,
            "k2": self.k2,
            "K": self.K,
            "delta": self.delta,
            "omega0": self.omega0,
            "degenerate": self.degenerate,
            "c": self.c.tolist(),
            "psi1": self.psi1.tolist(),
            "dpsi": self.dpsi.tolist(),
        }


def solve_alpha_geodesic(
    alpha1: float,
    alpha2: float,
    psi1,
    psi2,
    grid: FrequencyGrid,
    noise: NoiseProfile,
    rho0,
) -> AlphaGeodesic:
    """Boundary-value geodesic between two points of the submanifold.

    Phases are wrapped bin by bin before taking differences, so the path
    follows the short way around each phase circle; ``delta`` therefore lands
    in [0, pi].  ``delta = pi`` yields the degenerate solution whose
    attenuation touches zero inside (0, 1); it is returned with a warning.
    """
    if not (alpha1 > 0.0 and alpha2 > 0.0):
        raise ValueError("endpoint attenuations must be positive")
    psi1 = wrap_phase(np.asarray(psi1, dtype=float))
    psi2 = wrap_phase(np.asarray(psi2, dtype=float))
    rho0 = np.asarray(rho0, dtype=float)
    if not (len(psi1) == len(psi2) == len(rho0) == grid.n_freqs == noise.n_freqs):
        raise ValueError("misaligned band inputs")
    omega0 = band_energy(noise, rho0)
    if omega0 <= 0.0:
        raise ValueError("template energy must be positive")
    delta = phase_rms_diff(psi1, psi2, noise, rho0)
    dpsi = wrap_phase(psi2 - psi1)

    half = math.sin(0.5 * delta)
    # half-angle form: no cancellation for nearby endpoints
    k1 = (alpha2 - alpha1) ** 2 + 4.0 * alpha1 * alpha2 * half**2
    K = (alpha1 * alpha2 * math.sin(delta)) ** 2
    if k1 == 0.0:
        # coincident endpoints: the constant path
        k2 = 0.0
    else:
        k2 = -alpha1 * ((alpha1 - alpha2) + 2.0 * alpha2 * half**2) / k1
    if delta > 0.0 and K > 0.0:
        c = math.sqrt(K) * dpsi / delta
    else:
        c = np.zeros_like(dpsi)
    degenerate = bool(delta > 0.0 and (K <= 0.0 or math.pi - delta < 1e-9))
    if degenerate:
        warnings.warn(
            "antipodal phase difference: attenuation touches zero inside the path",
            DegenerateGeodesicWarning,
            stacklevel=2,
        )
    return AlphaGeodesic(
        alpha1=float(alpha1),
        alpha2=float(alpha2),
        k1=k1,
        k2=k2,
        K=K,
        delta=delta,
        c=c,
        psi1=psi1,
        dpsi=dpsi,
        omega0=omega0,
        degenerate=degenerate,
    )


def _alpha_values(geo: AlphaGeodesic, sigmas: np.ndarray) -> np.ndarray:
    if geo.k1 == 0.0:
        return np.full_like(sigmas, geo.alpha1)
    return np.sqrt(geo.k1 * (sigmas + geo.k2) ** 2 + geo.K / geo.k1)


def _phase_mix(geo: AlphaGeodesic, sigmas: np.ndarray) -> np.ndarray:
    """Fraction of the per-bin phase advance completed by each sigma.

    For K > 0 this is the normalized arctan flow; in the degenerate K = 0,
    delta = pi limit the whole advance happens at the interior zero crossing
    of the attenuation (value 1/2 exactly at the crossing).
    """
    if geo.delta <= 0.0 or geo.k1 == 0.0:
        return np.zeros_like(sigmas)
    if geo.K > 0.0:
        root_k = math.sqrt(geo.K)
        start = math.atan2(geo.k1 * geo.k2, root_k)
        angles = np.arctan2(geo.k1 * (sigmas + geo.k2), root_k)
        return (angles - start) / geo.delta
    crossing = -geo.k2
    return np.where(
        sigmas < crossing, 0.0, np.where(sigmas > crossing, 1.0, 0.5)
    )


def eval_alpha_geodesic(geo: AlphaGeodesic, sigma: float) -> tuple[float, np.ndarray]:
    """Attenuation and wrapped phases of the geodesic at sigma in [0, 1]."""
    sigma = float(sigma)
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    s = np.asarray([sigma])
    alpha = float(_alpha_values(geo, s)[0])
    mix = float(_phase_mix(geo, s)[0])
    psi = wrap_phase(geo.psi1 + mix * geo.dpsi)
    return alpha, psi


def sample_alpha_geodesic(geo: AlphaGeodesic, n_nodes: int = 201, spacing: str = "auto") -> GeodesicPath:
    """Sample the geodesic as a path in the (alpha, unwrapped phase) chart.

    ``spacing="uniform"`` places nodes uniformly in sigma.  ``"auto"`` mixes
    uniform nodes with nodes uniform in the phase-advance angle, which
    clusters samples around the attenuation dip of nearly-antipodal endpoint
    pairs where the curve is sharpest.
    """
    if n_nodes < 2:
        raise ValueError("n_nodes must be at least 2")
    if spacing not in ("auto", "uniform"):
        raise ValueError("spacing must be 'auto' or 'uniform'")
    uniform = np.linspace(0.0, 1.0, n_nodes)
    if spacing == "uniform" or geo.K <= 0.0 or geo.k1 == 0.0:
        sigmas = uniform
    else:
        root_k = math.sqrt(geo.K)
        theta0 = math.atan2(geo.k1 * geo.k2, root_k)
        theta1 = math.atan2(geo.k1 * (1.0 + geo.k2), root_k)
        thetas = np.linspace(theta0, theta1, n_nodes)[1:-1]
        angled = np.tan(thetas) * root_k / geo.k1 - geo.k2
        merged = np.unique(np.concatenate([uniform, np.clip(angled, 0.0, 1.0)]))
        # drop near-coincident knots that would ill-condition the spline
        filtered = [0.0]
        for s in merged[1:]:
            if s - filtered[-1] > 1e-10:
                filtered.append(float(s))
        if filtered[-1] < 1.0:
            filtered[-1] = 1.0
        sigmas = np.asarray(filtered)
    alphas = _alpha_values(geo, sigmas)
    mix = _phase_mix(geo, sigmas)
    coords = np.empty((len(sigmas), 1 + len(geo.psi1)))
    coords[:, 0] = alphas
    coords[:, 1:] = geo.psi1[np.newaxis, :] + mix[:, np.newaxis] * geo.dpsi[np.newaxis, :]
    return GeodesicPath(sigmas, coords)


def alpha_geodesic_coeff_path(geo: AlphaGeodesic, coeffs1, coeffs2, n_nodes: int = 101) -> GeodesicPath:
    """Geodesic sampled in a polynomial-phase parameter chart.

    Valid when the endpoint coefficient difference produces unwrapped phase
    differences within (-pi, pi] on the whole grid, so the wrapped per-bin
    differences the geodesic interpolates coincide with the polynomial ones.
    Coordinates per node are (alpha, coefficients).
    """
    coeffs1 = np.asarray(coeffs1, dtype=float)
    coeffs2 = np.asarray(coeffs2, dtype=float)
    if coeffs1.shape != coeffs2.shape:
        raise ValueError("coefficient vectors differ in shape")
    sigmas = np.linspace(0.0, 1.0, n_nodes)
    alphas = _alpha_values(geo, sigmas)
    mix = _phase_mix(geo, sigmas)
    coords = np.empty((n_nodes, 1 + len(coeffs1)))
    coords[:, 0] = alphas
    coords[:, 1:] = coeffs1[np.newaxis, :] + mix[:, np.newaxis] * (coeffs2 - coeffs1)[np.newaxis, :]
    return GeodesicPath(sigmas, coords)


def save_path_csv(path_or_buf, path: GeodesicPath) -> None:
    """Write an attenuation-chart path as CSV for plotting.

    Columns: ``sigma, alpha, psi_1 .. psi_N`` (one row per node); floats use
    repr so the file round-trips exactly.
    """
    n_phases = path.coords.shape[1] - 1
    header = ["sigma", "alpha"] + [f"psi_{k + 1}" for k in range(n_phases)]
    with open(path_or_buf, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for sigma, row in zip(path.sigmas, path.coords):
            writer.writerow([repr(float(sigma))] + [repr(float(v)) for v in row])


# -- shooting oracle ---------------------------------------------------------


def _integrate_alpha_ode(alpha1: float, slope: float, K: float, n_steps: int):
    """Fixed-step RK4 for (alpha' = v, v' = K/alpha^3, theta' = 1/alpha^2).

    Returns the per-step arrays (alpha, theta); non-finite blow-ups abort
    with None so the shooting loop can back off.
    """
    h = 1.0 / n_steps
    alphas = np.empty(n_steps + 1)
    thetas = np.empty(n_steps + 1)
    a, v, theta = float(alpha1), float(slope), 0.0
    alphas[0] = a
    thetas[0] = theta

    def rhs(a, v):
        return v, K / a**3, 1.0 / a**2

    for step in range(1, n_steps + 1):
        if not (a > 0.0 and math.isfinite(a) and math.isfinite(v)):
            return None, None
        da1, dv1, dt1 = rhs(a, v)
        da2, dv2, dt2 = rhs(a + 0.5 * h * da1, v + 0.5 * h * dv1)
        da3, dv3, dt3 = rhs(a + 0.5 * h * da2, v + 0.5 * h * dv2)
        da4, dv4, dt4 = rhs(a + h * da3, v + h * dv3)
        a += h * (da1 + 2.0 * da2 + 2.0 * da3 + da4) / 6.0
        v += h * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4) / 6.0
        theta += h * (dt1 + 2.0 * dt2 + 2.0 * dt3 + dt4) / 6.0
        alphas[step] = a
        thetas[step] = theta
    if not (math.isfinite(a) and a > 0.0):
        return None, None
    return alphas, thetas


def shoot_alpha_geodesic(
    alpha1: float,
    alpha2: float,
    psi1,
    psi2,
    grid: FrequencyGrid,
    noise: NoiseProfile,
    rho0,
    n_steps: int = 400,
) -> GeodesicPath:
    """Numerical boundary-value geodesic by RK4 integration plus shooting.

    The ODE constants K and c come from the boundary data (K from the
    endpoint attenuations and delta, c parallel to the wrapped phase
    differences); the single remaining unknown, the initial attenuation
    slope, is found by secant iteration on the endpoint miss
    ``alpha(1) - alpha2`` to 1e-9.  The integrated phases reaching psi2 is
    then a genuine check of the constants rather than an enforced condition.
    Two refinements keep that check honest: a mismatch after convergence
    triggers one mirrored restart to pick the other root of the endpoint
    equation (phase advances beyond pi/2 need the initially-descending
    branch), and near the tangency between the two roots, where the endpoint
    miss alone leaves the slope poorly determined, the slope is polished
    against the phase-advance equation (which is well conditioned exactly
    there, and moves the endpoint miss only to second order).
    """
    if n_steps < 100:
        raise ValueError("n_steps must be at least 100")
    if not (alpha1 > 0.0 and alpha2 > 0.0):
        raise ValueError("endpoint attenuations must be positive")
    psi1 = wrap_phase(np.asarray(psi1, dtype=float))
    psi2 = wrap_phase(np.asarray(psi2, dtype=float))
    rho0 = np.asarray(rho0, dtype=float)
    delta = phase_rms_diff(psi1, psi2, noise, rho0)
    dpsi = wrap_phase(psi2 - psi1)
    K = (alpha1 * alpha2 * math.sin(delta)) ** 2
    c = math.sqrt(K) * dpsi / delta if delta > 0.0 else np.zeros_like(dpsi)

    tol = 1e-9

    def miss(slope):
        alphas, thetas = _integrate_alpha_ode(alpha1, slope, K, n_steps)
        if alphas is None:
            return None, None, None
        return alphas[-1] - alpha2, alphas, thetas

    def secant(s0, s1):
        f0, _, _ = miss(s0)
        f1, a1, t1 = miss(s1)
        for _ in range(100):
            if f1 is not None and abs(f1) < tol:
                return s1, a1, t1
            if f0 is None:
                # previous point blew up; walk away from it
                s0, f0 = s1, f1
                s1 = s1 + 0.5 * (1.0 + abs(s1))
                f1, a1, t1 = miss(s1)
                continue
            if f1 is None or f1 == f0:
                s1 = 0.5 * (s0 + s1)
                f1, a1, t1 = miss(s1)
                continue
            s_next = s1 - f1 * (s1 - s0) / (f1 - f0)
            s0, f0 = s1, f1
            s1 = s_next
            f1, a1, t1 = miss(s1)
        raise ConvergenceError("shooting failed to reach the endpoint in 100 iterations")

    root_k = math.sqrt(K)
    phase_tol = 1e-6 * (1.0 + delta)

    def advance_gap(thetas):
        return root_k * thetas[-1] - delta

    def polish(slope):
        # Newton on the phase advance with a finite-difference derivative
        s = slope
        result = miss(s)
        for _ in range(50):
            f_val, alphas, thetas = result
            if f_val is None:
                return None
            gap = advance_gap(thetas)
            if abs(gap) <= 0.01 * phase_tol:
                return s, alphas, thetas
            h = 1e-7 * (1.0 + abs(s))
            bumped = miss(s + h)
            if bumped[0] is None:
                return None
            rate = (advance_gap(bumped[2]) - gap) / h
            if rate == 0.0 or not math.isfinite(rate):
                return None
            s = s - gap / rate
            result = miss(s)
        return None

    s0 = alpha2 - alpha1
    slope, alphas, thetas = secant(s0, s0 + 0.25 * (1.0 + abs(s0)))
    if abs(advance_gap(thetas)) > phase_tol:
        # wrong root: reflect the slope about the endpoint-miss minimum
        mirrored = -2.0 * alpha1 - slope
        try:
            other = secant(mirrored, mirrored - 0.25 * (1.0 + abs(mirrored)))
        except ConvergenceError:
            other = None
        if other is not None and abs(advance_gap(other[2])) < abs(advance_gap(thetas)):
            slope, alphas, thetas = other
    if abs(advance_gap(thetas)) > phase_tol:
        polished = polish(slope)
        if polished is not None:
            slope, alphas, thetas = polished
    if abs(advance_gap(thetas)) > phase_tol:
        raise ConvergenceError("shooting converged to a path violating the phase advance")
    if abs(alphas[-1] - alpha2) > 1e-9 * (1.0 + alpha2):
        raise ConvergenceError("polished shooting lost the endpoint attenuation")

    sigmas = np.linspace(0.0, 1.0, n_steps + 1)
    coords = np.empty((n_steps + 1, 1 + len(psi1)))
    coords[:, 0] = alphas
    coords[:, 1:] = psi1[np.newaxis, :] + thetas[:, np.newaxis] * c[np.newaxis, :]
    return GeodesicPath(sigmas, coords)


# -- path functionals --------------------------------------------------------


def path_length(chart, path: GeodesicPath, n_quad: int = 64) -> float:
    """Length of a sampled path: quadrature of sqrt(speed) along a spline.

    Coordinates are interpolated with a cubic spline in sigma (piecewise
    linear below four nodes) and integrated with an ``n_quad``-point
    Gauss-Legendre rule on every inter-node interval, so the result is
    reparametrization invariant up to interpolation error.
    """
    if n_quad < 8:
        raise ValueError("n_quad must be at least 8")
    if path.n_nodes < 2:
        raise ValueError("too few nodes")
    sigmas, coords = path.sigmas, path.coords
    if path.n_nodes >= 4:
        spline = CubicSpline(sigmas, coords, axis=0)
        position = spline
        velocity = spline.derivative()
    else:
        def position(t):
            return np.stack([np.interp(t, sigmas, coords[:, d]) for d in range(coords.shape[1])], axis=-1)

        def velocity(t):
            t = np.asarray(t)
            idx = np.clip(np.searchsorted(sigmas, t, side="right") - 1, 0, path.n_nodes - 2)
            seg = (coords[idx + 1] - coords[idx]) / (sigmas[idx + 1] - sigmas[idx])[:, np.newaxis]
            return seg

    nodes, weights = np.polynomial.legendre.leggauss(n_quad)
    starts = sigmas[:-1]
    halves = 0.5 * np.diff(sigmas)
    # all quadrature points of all intervals at once
    t = (starts[:, np.newaxis] + halves[:, np.newaxis] * (nodes[np.newaxis, :] + 1.0)).ravel()
    scale = np.repeat(halves, n_quad) * np.tile(weights, len(starts))
    speeds = np.asarray(chart.speed(position(t), velocity(t)), dtype=float)
    speeds = np.maximum(speeds, 0.0)
    return float(np.sum(scale * np.sqrt(speeds)))


@dataclass(frozen=True)
class LdgResidual:
    """Geodesic-equation residuals of a sampled path at its interior nodes.

    ``mag[j, u]`` pairs the magnitude acceleration with the u-th magnitude
    gradient, ``phase[j, q]`` the phase acceleration with the q-th phase
    gradient; both vanish along geodesics of the model's submanifold.
    ``speed_scale`` is the largest finite-difference path speed, the natural
    magnitude against which the residuals are compared.
    """

    sigmas: np.ndarray
    mag: np.ndarray
    phase: np.ndarray
    speed_scale: float

    @property
    def max_scaled(self) -> float:
        worst = max(float(np.max(np.abs(self.mag))), float(np.max(np.abs(self.phase))))
        return worst / self.speed_scale if self.speed_scale > 0.0 else worst


def ldg_residual(
    model: ParametricSignalModel, path: GeodesicPath, grid: FrequencyGrid, noise: NoiseProfile
) -> LdgResidual:
    """Evaluate the two geodesic-equation frequency sums along a path.

    The path must be sampled uniformly in sigma (central differences in the
    curve parameter are taken node by node) with at least nine nodes.  At
    every interior node the magnitude equation

        sum_nu (2/gamma0) drho/du (rho'' - rho psi'^2)

    and the phase equation

        sum_nu (2/gamma0) dpsi/dq (rho^2 psi'' + 2 rho rho' psi')

    are returned; both are zero (to discretization error) exactly when the
    path is an affinely parametrized geodesic of the model's submanifold.
    """
    if path.n_nodes < 9:
        raise ValueError("need at least nine nodes for second differences")
    h = float(path.sigmas[1] - path.sigmas[0])
    if np.max(np.abs(np.diff(path.sigmas) - h)) > 1e-9:
        raise ValueError("path nodes must be uniform in sigma")
    if path.coords.shape[1] != model.n_params:
        raise ValueError("path coordinates do not match the model chart")

    n_nodes = path.n_nodes
    n_freqs = grid.n_freqs
    rho = np.empty((n_nodes, n_freqs))
    psi = np.empty((n_nodes, n_freqs))
    for j in range(n_nodes):
        phi, varphi = model.split(path.coords[j])
        rho[j] = model.magnitude(phi, grid)
        psi[j] = model.phase_unwrapped(varphi, grid)

    d_rho = (rho[2:] - rho[:-2]) / (2.0 * h)
    d_psi = (psi[2:] - psi[:-2]) / (2.0 * h)
    dd_rho = (rho[2:] - 2.0 * rho[1:-1] + rho[:-2]) / h**2
    dd_psi = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / h**2
    rho_mid = rho[1:-1]

    w = noise.weights
    mag_core = w * (dd_rho - rho_mid * d_psi**2)
    phase_core = w * (rho_mid**2 * dd_psi + 2.0 * rho_mid * d_rho * d_psi)

    n_interior = n_nodes - 2
    mag_res = np.empty((n_interior, model.n_mag_params))
    phase_res = np.empty((n_interior, model.n_phase_params))
    for j in range(n_interior):
        phi, varphi = model.split(path.coords[j + 1])
        mag_res[j] = model.magnitude_jacobian(phi, grid) @ mag_core[j]
        phase_res[j] = model.phase_jacobian(varphi, grid) @ phase_core[j]

    fd_speed = np.sum(w * (d_rho**2 + rho_mid**2 * d_psi**2), axis=1)
    return LdgResidual(
        sigmas=path.sigmas[1:-1],
        mag=mag_res,
        phase=phase_res,
        speed_scale=float(np.max(fd_speed)),
    )
