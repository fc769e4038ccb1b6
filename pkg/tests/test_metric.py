import math
from dataclasses import dataclass

import numpy as np
import pytest

from fisherband import (
    KnownMagnitudeModel,
    NoiseProfile,
    band_energy,
    build_grid,
    christoffel,
    christoffel_fd,
    fisher_matrix,
    monte_carlo_fisher,
    path_speed,
    wrap_phase,
)
from fisherband.metric import structural_mask
from fisherband.models import ParametricSignalModel


def _random_known_mag(rng, n_bins=None, n_phase=None):
    n = n_bins or int(rng.integers(2, 9))
    q = n_phase or int(rng.integers(1, min(3, n) + 1))
    grid = build_grid(0.25, float(rng.uniform(0.1, 0.5)), n)
    noise = NoiseProfile(rng.uniform(0.5, 2.0, n))
    rho0 = rng.uniform(0.3, 2.0, n)
    coeffs = np.concatenate([[rng.uniform(-3, 3)], rng.normal(0, 2, q - 1)])
    coeffs[0] = wrap_phase(coeffs[0])
    model = KnownMagnitudeModel(rho0, alpha=float(rng.uniform(0.5, 2.0)), phase_coeffs=coeffs)
    return model, grid, noise


@dataclass(frozen=True)
class CurvedTestModel(ParametricSignalModel):
    """Toy chart with genuine curvature in both spectra.

    Magnitude ``(phi1 + phi2^2 nu) * base`` and phase ``q1 nu + q2^2 nu^2``:
    second partials of both spectra are non-zero, which exercises every
    connection-symbol family.
    """

    base: np.ndarray

    @property
    def n_mag_params(self):
        return 2

    @property
    def n_phase_params(self):
        return 2

    def magnitude(self, phi, grid):
        return (phi[0] + phi[1] ** 2 * grid.freqs) * self.base

    def phase_unwrapped(self, varphi, grid):
        return varphi[0] * grid.freqs + varphi[1] ** 2 * grid.freqs**2

    def magnitude_jacobian(self, phi, grid):
        return np.stack([self.base, 2.0 * phi[1] * grid.freqs * self.base])

    def phase_jacobian(self, varphi, grid):
        return np.stack([grid.freqs, 2.0 * varphi[1] * grid.freqs**2])

    def magnitude_hessian(self, phi, grid):
        h = np.zeros((2, 2, grid.n_freqs))
        h[1, 1] = 2.0 * grid.freqs * self.base
        return h

    def phase_hessian(self, varphi, grid):
        h = np.zeros((2, 2, grid.n_freqs))
        h[1, 1] = 2.0 * grid.freqs**2
        return h


@dataclass(frozen=True)
class InertPhaseModel(ParametricSignalModel):
    """Chart whose phase parameter has no effect: a constant (flat) metric."""

    base: np.ndarray

    @property
    def n_mag_params(self):
        return 1

    @property
    def n_phase_params(self):
        return 1

    def magnitude(self, phi, grid):
        return phi[0] * self.base

    def phase_unwrapped(self, varphi, grid):
        return np.zeros(grid.n_freqs)

    def magnitude_jacobian(self, phi, grid):
        return self.base[np.newaxis, :]

    def phase_jacobian(self, varphi, grid):
        return np.zeros((1, grid.n_freqs))

    def magnitude_hessian(self, phi, grid):
        return np.zeros((1, 1, grid.n_freqs))

    def phase_hessian(self, varphi, grid):
        return np.zeros((1, 1, grid.n_freqs))


class TestFisherMatrix:
    def test_known_mag_block_is_band_energy(self):
        rng = np.random.default_rng(0)
        model, grid, noise = _random_known_mag(rng)
        fm = fisher_matrix(model, model.xi, grid, noise)
        omega0 = band_energy(noise, model.rho0)
        assert fm.mag_block.shape == (1, 1)
        assert fm.mag_block[0, 0] == pytest.approx(omega0, rel=1e-14)

    def test_constant_phase_block(self):
        # single phase coefficient: dpsi/dq = 1, so g_qq = alpha^2 * omega0
        grid = build_grid(0.25, 0.3, 5)
        noise = NoiseProfile.flat(1.5, 5)
        rho0 = np.linspace(0.5, 1.5, 5)
        model = KnownMagnitudeModel(rho0, alpha=1.8, phase_coeffs=[0.7])
        fm = fisher_matrix(model, model.xi, grid, noise)
        omega0 = band_energy(noise, rho0)
        assert fm.phase_block[0, 0] == pytest.approx(1.8**2 * omega0, rel=1e-14)

    def test_phase_block_vanishes_with_magnitude(self):
        grid = build_grid(0.25, 0.3, 4)
        noise = NoiseProfile.flat(1.0, 4)
        model = KnownMagnitudeModel(np.ones(4), alpha=1.0, phase_coeffs=[0.0])
        tiny = fisher_matrix(model, [1e-8, 0.0], grid, noise)
        assert tiny.phase_block[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_blocks_symmetric_and_psd(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            model, grid, noise = _random_known_mag(rng, n_bins=8, n_phase=3)
            fm = fisher_matrix(model, model.xi, grid, noise)
            np.testing.assert_allclose(fm.phase_block, fm.phase_block.T, rtol=1e-12)
            assert np.min(np.linalg.eigvalsh(fm.phase_block)) >= -1e-10 * np.max(
                np.abs(fm.phase_block)
            )

    def test_full_assembly_block_diagonal(self):
        rng = np.random.default_rng(9)
        model, grid, noise = _random_known_mag(rng, n_bins=6, n_phase=2)
        full = fisher_matrix(model, model.xi, grid, noise).full()
        assert full.shape == (3, 3)
        assert full[0, 1] == 0.0 and full[0, 2] == 0.0
        assert full[1, 0] == 0.0 and full[2, 0] == 0.0

    def test_noise_scaling(self):
        rng = np.random.default_rng(14)
        model, grid, noise = _random_known_mag(rng, n_bins=6, n_phase=2)
        lam = 3.0
        scaled = NoiseProfile(noise.gamma0 / lam)
        base = fisher_matrix(model, model.xi, grid, noise)
        boosted = fisher_matrix(model, model.xi, grid, scaled)
        np.testing.assert_allclose(boosted.full(), lam * base.full(), rtol=1e-13)

    def test_attenuation_scaling_of_phase_block(self):
        rng = np.random.default_rng(15)
        model, grid, noise = _random_known_mag(rng, n_bins=6, n_phase=3)
        xi = model.xi
        xi_scaled = xi.copy()
        xi_scaled[0] *= 2.5
        base = fisher_matrix(model, xi, grid, noise)
        scaled = fisher_matrix(model, xi_scaled, grid, noise)
        np.testing.assert_allclose(scaled.phase_block, 2.5**2 * base.phase_block, rtol=1e-13)
        np.testing.assert_allclose(scaled.mag_block, base.mag_block, rtol=0)


class TestMonteCarloFisher:
    def test_single_frequency_reference_value(self):
        # rho0 = 1, gamma0 = 1, alpha = 1: the attenuation entry is 2/gamma0
        grid = build_grid(0.25, 0.1, 1)
        noise = NoiseProfile.flat(1.0, 1)
        model = KnownMagnitudeModel(np.ones(1), alpha=1.0, phase_coeffs=[0.5])
        est, se = monte_carlo_fisher(model, model.xi, grid, noise, 100_000, seed=7, return_stderr=True)
        assert abs(est[0, 0] - 2.0) < 4.0 * se[0, 0]
        # cross block is zero in expectation
        assert abs(est[0, 1]) < 4.0 * se[0, 1]

    def test_matches_analytic_small_model(self):
        rng = np.random.default_rng(21)
        model, grid, noise = _random_known_mag(rng, n_bins=4, n_phase=3)
        analytic = fisher_matrix(model, model.xi, grid, noise).full()
        est, se = monte_carlo_fisher(model, model.xi, grid, noise, 60_000, seed=5, return_stderr=True)
        assert np.all(np.abs(est - analytic) <= 4.0 * np.maximum(se, 1e-300))

    def test_noise_doubling_halves_diagonal(self):
        grid = build_grid(0.25, 0.2, 2)
        model = KnownMagnitudeModel(np.ones(2), alpha=1.0, phase_coeffs=[0.0])
        base, se = monte_carlo_fisher(
            model, model.xi, grid, NoiseProfile.flat(1.0, 2), 50_000, seed=3, return_stderr=True
        )
        half, se2 = monte_carlo_fisher(
            model, model.xi, grid, NoiseProfile.flat(2.0, 2), 50_000, seed=4, return_stderr=True
        )
        for k in range(2):
            bound = 4.0 * math.hypot(se[k, k] / 2.0, se2[k, k])
            assert abs(half[k, k] - base[k, k] / 2.0) < bound

    def test_deterministic_given_seed(self):
        grid = build_grid(0.25, 0.2, 2)
        noise = NoiseProfile.flat(1.0, 2)
        model = KnownMagnitudeModel(np.ones(2), alpha=1.0, phase_coeffs=[0.0])
        a = monte_carlo_fisher(model, model.xi, grid, noise, 2000, seed=11)
        b = monte_carlo_fisher(model, model.xi, grid, noise, 2000, seed=11)
        np.testing.assert_array_equal(a, b)

    def test_sample_floor(self):
        grid = build_grid(0.25, 0.2, 2)
        noise = NoiseProfile.flat(1.0, 2)
        model = KnownMagnitudeModel(np.ones(2), alpha=1.0, phase_coeffs=[0.0])
        with pytest.raises(ValueError):
            monte_carlo_fisher(model, model.xi, grid, noise, 999, seed=0)


class TestChristoffel:
    def test_known_mag_magnitude_family_vanishes(self):
        # the magnitude is linear in alpha, so the all-magnitude family is 0
        rng = np.random.default_rng(2)
        model, grid, noise = _random_known_mag(rng, n_bins=6, n_phase=2)
        sym = christoffel(model, model.xi, grid, noise)
        assert np.all(sym.values[:1, :1, :1] == 0.0)

    def test_constant_phase_reference_values(self):
        # one phase coefficient, unit jacobian: the mixed families reduce to
        # +/- alpha * omega0
        grid = build_grid(0.25, 0.3, 5)
        noise = NoiseProfile(np.linspace(0.5, 1.5, 5))
        rho0 = np.linspace(0.4, 1.2, 5)
        alpha = 1.7
        model = KnownMagnitudeModel(rho0, alpha=alpha, phase_coeffs=[0.3])
        omega0 = band_energy(noise, rho0)
        sym = christoffel(model, model.xi, grid, noise)
        assert sym.values[1, 1, 0] == pytest.approx(-alpha * omega0, rel=1e-14)
        assert sym.values[1, 0, 1] == pytest.approx(alpha * omega0, rel=1e-14)
        assert sym.values[0, 1, 1] == pytest.approx(alpha * omega0, rel=1e-14)
        # the sign relation is exact, same summand with opposite sign
        assert sym.values[1, 0, 1] == -sym.values[1, 1, 0]

    def test_structural_zeros_and_count(self):
        rng = np.random.default_rng(8)
        model, grid, noise = _random_known_mag(rng, n_bins=8, n_phase=3)
        sym = christoffel(model, model.xi, grid, noise)
        p, n = 1, model.n_params
        mask = structural_mask(n, p)
        assert np.all(sym.values[~mask] == 0.0)
        q = n - p
        assert int(mask.sum()) == p**3 + q**3 + 3 * p * q**2

    def test_upper_pair_symmetry_exact(self):
        base = np.linspace(0.5, 1.5, 6)
        model = CurvedTestModel(base)
        grid = build_grid(0.25, 0.3, 6)
        noise = NoiseProfile.flat(1.2, 6)
        xi = np.array([1.1, 0.7, 0.4, -0.8])
        sym = christoffel(model, xi, grid, noise)
        assert np.array_equal(sym.values, sym.values.transpose(1, 0, 2))

    @pytest.mark.parametrize("seed", range(6))
    def test_fd_oracle_known_mag(self, seed):
        rng = np.random.default_rng(seed)
        model, grid, noise = _random_known_mag(rng)
        exact = christoffel(model, model.xi, grid, noise).values
        approx = christoffel_fd(model, model.xi, grid, noise).values
        assert np.max(np.abs(approx - exact) / (1.0 + np.abs(exact))) < 1e-5

    def test_fd_oracle_curved_model(self):
        # non-zero hessians light up all four symbol families
        base = np.linspace(0.5, 1.5, 6)
        model = CurvedTestModel(base)
        grid = build_grid(0.25, 0.3, 6)
        noise = NoiseProfile.flat(1.2, 6)
        xi = np.array([1.1, 0.7, 0.4, -0.8])
        exact = christoffel(model, xi, grid, noise).values
        assert np.any(exact[:2, :2, :2] != 0.0)
        assert np.any(exact[2:, 2:, 2:] != 0.0)
        approx = christoffel_fd(model, xi, grid, noise).values
        assert np.max(np.abs(approx - exact) / (1.0 + np.abs(exact))) < 1e-5

    def test_flat_metric_gives_zero_symbols(self):
        model = InertPhaseModel(np.linspace(0.5, 1.5, 4))
        grid = build_grid(0.25, 0.3, 4)
        noise = NoiseProfile.flat(1.0, 4)
        approx = christoffel_fd(model, [1.3, 0.2], grid, noise).values
        assert np.max(np.abs(approx)) < 1e-7

    def test_fd_symmetry_exact_by_construction(self):
        rng = np.random.default_rng(33)
        model, grid, noise = _random_known_mag(rng, n_bins=5, n_phase=2)
        approx = christoffel_fd(model, model.xi, grid, noise).values
        assert np.array_equal(approx, approx.transpose(1, 0, 2))

    def test_bad_step_rejected(self):
        rng = np.random.default_rng(3)
        model, grid, noise = _random_known_mag(rng)
        with pytest.raises(ValueError):
            christoffel_fd(model, model.xi, grid, noise, step=0.0)


class TestPathSpeed:
    def test_zero_velocity(self):
        rng = np.random.default_rng(6)
        model, grid, noise = _random_known_mag(rng, n_bins=4, n_phase=2)
        assert path_speed(model, model.xi, np.zeros(3), grid, noise) == 0.0

    def test_pure_attenuation_motion(self):
        rng = np.random.default_rng(7)
        model, grid, noise = _random_known_mag(rng, n_bins=6, n_phase=2)
        omega0 = band_energy(noise, model.rho0)
        rate = 0.37
        xi_dot = np.zeros(3)
        xi_dot[0] = rate
        speed = path_speed(model, model.xi, xi_dot, grid, noise)
        assert speed == pytest.approx(omega0 * rate**2, rel=1e-14)

    def test_quadratic_scaling(self):
        rng = np.random.default_rng(8)
        model, grid, noise = _random_known_mag(rng, n_bins=6, n_phase=3)
        xi_dot = rng.normal(size=4)
        s1 = path_speed(model, model.xi, xi_dot, grid, noise)
        s2 = path_speed(model, model.xi, 3.0 * xi_dot, grid, noise)
        assert s2 == pytest.approx(9.0 * s1, rel=1e-12)

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(9)
        model, grid, noise = _random_known_mag(rng, n_bins=4, n_phase=2)
        with pytest.raises(ValueError):
            path_speed(model, model.xi, np.zeros(5), grid, noise)
