import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fisherband import (
    FrequencyGrid,
    NoiseProfile,
    Observation,
    SignalSpectrum,
    band_energy,
    band_from_json,
    band_to_json,
    build_grid,
    load_band_csv,
    log_likelihood,
    phase_rms_diff,
    sample_observation,
    save_band_csv,
    wrap_phase,
)


class TestWrapPhase:
    @pytest.mark.parametrize(
        "theta,expected",
        [
            (3 * math.pi / 2, -math.pi / 2),
            (math.pi, math.pi),  # upper bound included
            (-math.pi, math.pi),  # lower bound excluded
            (0.0, 0.0),
            (2 * math.pi, 0.0),
            (-2 * math.pi, 0.0),
            (4 * math.pi, 0.0),
        ],
    )
    def test_boundary_cases_exact(self, theta, expected):
        assert wrap_phase(theta) == expected

    def test_polynomial_sum_of_pi_multiples(self):
        # pi + 4*pi*0.5 evaluates to the float 3*pi; the independent oracle
        # is the angle of the unit phasor
        theta = math.pi + 4 * math.pi * 0.5
        assert theta == 3 * math.pi
        oracle = np.angle(np.exp(1j * theta))
        got = wrap_phase(theta)
        assert -math.pi < got <= math.pi
        assert got == pytest.approx(oracle, abs=1e-12)
        assert got == pytest.approx(math.pi, abs=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            wrap_phase(float("nan"))
        with pytest.raises(ValueError):
            wrap_phase(np.array([0.0, np.inf]))

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
    def test_range_and_idempotence(self, theta):
        w = wrap_phase(theta)
        assert -math.pi < w <= math.pi
        assert wrap_phase(w) == w  # bit-exact on in-range values

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=-1e4, max_value=1e4, allow_nan=False))
    def test_congruent_mod_two_pi(self, theta):
        w = wrap_phase(theta)
        k = (theta - w) / (2 * math.pi)
        assert abs(k - round(k)) < 1e-9

    def test_array_matches_scalar(self):
        thetas = np.linspace(-12.0, 12.0, 101)
        arr = wrap_phase(thetas)
        assert arr.shape == thetas.shape
        for t, w in zip(thetas, arr):
            assert wrap_phase(float(t)) == w


class TestGrid:
    def test_reference_band(self):
        # the canonical demo band: 1000 bins on (0, 0.5) around 0.25
        grid = build_grid(0.25, 0.5, 1000)
        assert grid.n_freqs == 1000
        assert grid.freqs[0] == pytest.approx(0.00025)
        assert grid.freqs[-1] == pytest.approx(0.49975)
        assert np.all(grid.freqs > 0)
        assert grid.spacing == pytest.approx(5e-4)

    def test_four_bin_band_frozen(self):
        # direct arithmetic: start 0.125, step 0.0625, centres at half-steps
        grid = build_grid(0.25, 0.25, 4)
        np.testing.assert_allclose(grid.freqs, [0.15625, 0.21875, 0.28125, 0.34375], rtol=0, atol=0)

    def test_single_bin_band(self):
        grid = build_grid(0.25, 1e-9, 1)
        assert grid.n_freqs == 1
        assert grid.freqs[0] == pytest.approx(0.25, abs=1e-9)

    @pytest.mark.parametrize(
        "nu0,bw,n",
        [(0.25, 0.6, 100), (0.25, -0.1, 4), (0.25, 0.2, 0), (0.1, 0.5, 8)],
    )
    def test_bad_construction(self, nu0, bw, n):
        with pytest.raises(ValueError):
            build_grid(nu0, bw, n)

    def test_equispacing_enforced(self):
        with pytest.raises(ValueError):
            FrequencyGrid(0.25, 0.3, 3, np.array([0.1, 0.2, 0.4]))
        with pytest.raises(ValueError):
            FrequencyGrid(0.25, 0.3, 3, np.array([0.3, 0.2, 0.1]))

    def test_from_freqs_round_trip(self):
        grid = build_grid(0.3, 0.2, 16)
        again = FrequencyGrid.from_freqs(grid.freqs)
        np.testing.assert_array_equal(grid.freqs, again.freqs)
        assert again.nu0 == pytest.approx(grid.nu0, rel=1e-15)
        assert again.bandwidth_B == pytest.approx(grid.bandwidth_B, rel=1e-12)


class TestContainers:
    def test_noise_positive(self):
        with pytest.raises(ValueError):
            NoiseProfile([1.0, 0.0])
        with pytest.raises(ValueError):
            NoiseProfile([1.0, -2.0])
        assert NoiseProfile.flat(2.0, 3).weights == pytest.approx([1.0, 1.0, 1.0])

    def test_spectrum_invariants(self):
        with pytest.raises(ValueError):
            SignalSpectrum([-0.1], [0.0])
        with pytest.raises(ValueError):
            SignalSpectrum([1.0], [-math.pi])  # excluded endpoint
        with pytest.raises(ValueError):
            SignalSpectrum([1.0], [3.5])
        SignalSpectrum([0.0, 1.0], [math.pi, 0.0])  # rho = 0 is allowed

    def test_spectrum_complex_round_trip(self):
        rng = np.random.default_rng(3)
        z = rng.normal(size=8) + 1j * rng.normal(size=8)
        spec = SignalSpectrum.from_complex(z)
        np.testing.assert_allclose(spec.to_complex(), z, rtol=0, atol=1e-15)

    def test_observation_finite(self):
        with pytest.raises(ValueError):
            Observation([1.0 + 1j, np.nan])


class TestLogLikelihood:
    def test_zero_residual_single_bin(self):
        spec = SignalSpectrum([1.0], [0.3])
        obs = Observation(spec.to_complex())
        noise = NoiseProfile.flat(1.0, 1)
        assert log_likelihood(obs, spec, noise) == pytest.approx(-math.log(math.pi))

    def test_hand_value_two_bins(self):
        # x = 0, rho = 1, psi = 0, gamma0 = 1: each bin adds -ln(pi) - 1
        obs = Observation(np.zeros(2, dtype=complex))
        spec = SignalSpectrum([1.0, 1.0], [0.0, 0.0])
        noise = NoiseProfile.flat(1.0, 2)
        assert log_likelihood(obs, spec, noise) == pytest.approx(-2 * math.log(math.pi) - 2.0)

    def test_noise_floor_normalization(self):
        spec = SignalSpectrum(np.ones(5), np.zeros(5))
        obs = Observation(spec.to_complex())
        base = log_likelihood(obs, spec, NoiseProfile.flat(1.0, 5))
        doubled = log_likelihood(obs, spec, NoiseProfile.flat(2.0, 5))
        assert base - doubled == pytest.approx(5 * math.log(2.0))

    def test_maximized_at_zero_residual(self):
        rng = np.random.default_rng(11)
        noise = NoiseProfile(rng.uniform(0.5, 2.0, 6))
        obs = Observation(rng.normal(size=6) + 1j * rng.normal(size=6))
        best = log_likelihood(obs, SignalSpectrum.from_complex(obs.values), noise)
        for _ in range(25):
            other = SignalSpectrum(
                rng.uniform(0.0, 2.0, 6), wrap_phase(rng.uniform(-np.pi, np.pi, 6))
            )
            assert log_likelihood(obs, other, noise) <= best + 1e-12

    def test_alignment_checked(self):
        with pytest.raises(ValueError):
            log_likelihood(
                Observation([1.0 + 0j]), SignalSpectrum([1.0, 1.0], [0.0, 0.0]), NoiseProfile.flat(1.0, 2)
            )


class TestSampler:
    def test_seeded_reproducibility(self):
        spec = SignalSpectrum(np.ones(16), np.zeros(16))
        noise = NoiseProfile.flat(0.5, 16)
        a = sample_observation(spec, noise, seed=42)
        b = sample_observation(spec, noise, seed=42)
        np.testing.assert_array_equal(a.values, b.values)
        c = sample_observation(spec, noise, seed=43)
        assert np.any(c.values != a.values)

    def test_vanishing_noise_limit(self):
        spec = SignalSpectrum([2.0, 1.0], [0.5, -1.0])
        noise = NoiseProfile.flat(1e-30, 2)
        got = sample_observation(spec, noise, seed=0)
        np.testing.assert_allclose(got.values, spec.to_complex(), rtol=0, atol=1e-12)

    def test_mean_and_circularity(self):
        # CLT gates at four standard deviations of the empirical means
        n_samples = 100_000
        gamma0 = 0.8
        spec = SignalSpectrum([1.5, 0.7], [0.4, 2.0])
        noise = NoiseProfile.flat(gamma0, 2)
        rng_draws = np.empty((n_samples, 2), dtype=complex)
        for k in range(n_samples):
            rng_draws[k] = sample_observation(spec, noise, seed=k).values
        resid = rng_draws - spec.to_complex()
        bound = 4.0 * math.sqrt(gamma0 / n_samples)
        mean_resid = resid.mean(axis=0)
        assert np.all(np.abs(mean_resid.real) < bound)
        assert np.all(np.abs(mean_resid.imag) < bound)
        # circular symmetry: the pseudo-variance E{n^2} vanishes
        pseudo = (resid**2).mean(axis=0)
        assert np.all(np.abs(pseudo) < 2.0 * bound)
        # and the power matches gamma0
        power = (np.abs(resid) ** 2).mean(axis=0)
        assert np.all(np.abs(power - gamma0) < 2.0 * bound)


class TestBandHelpers:
    def test_band_energy_flat(self):
        noise = NoiseProfile.flat(2.0, 10)
        assert band_energy(noise, np.ones(10)) == pytest.approx(10.0)

    def test_phase_rms_constant_shift(self):
        noise = NoiseProfile.flat(1.0, 4)
        rho0 = np.array([1.0, 0.5, 2.0, 0.1])
        psi1 = np.zeros(4)
        psi2 = np.full(4, math.pi / 2)
        assert phase_rms_diff(psi1, psi2, noise, rho0) == pytest.approx(math.pi / 2, rel=1e-15)

    def test_phase_rms_bounded_by_pi(self):
        rng = np.random.default_rng(5)
        noise = NoiseProfile(rng.uniform(0.5, 2.0, 32))
        rho0 = rng.uniform(0.1, 2.0, 32)
        for _ in range(20):
            psi1 = wrap_phase(rng.uniform(-10, 10, 32))
            psi2 = wrap_phase(rng.uniform(-10, 10, 32))
            delta = phase_rms_diff(psi1, psi2, noise, rho0)
            assert 0.0 <= delta <= math.pi

    def test_zero_template_rejected(self):
        noise = NoiseProfile.flat(1.0, 2)
        with pytest.raises(ValueError):
            phase_rms_diff([0.0, 0.0], [1.0, 1.0], noise, [0.0, 0.0])


class TestSerialization:
    def _sample_band(self):
        rng = np.random.default_rng(17)
        grid = build_grid(0.25, 0.4, 9)
        noise = NoiseProfile(rng.uniform(0.5, 2.0, 9))
        spec = SignalSpectrum(rng.uniform(0, 3, 9), wrap_phase(rng.uniform(-np.pi, np.pi, 9)))
        return grid, noise, spec

    def test_csv_round_trip_lossless(self, tmp_path):
        grid, noise, spec = self._sample_band()
        path = tmp_path / "band.csv"
        save_band_csv(path, grid, noise, spec)
        grid2, noise2, spec2 = load_band_csv(path)
        np.testing.assert_array_equal(grid2.freqs, grid.freqs)
        np.testing.assert_array_equal(noise2.gamma0, noise.gamma0)
        np.testing.assert_array_equal(spec2.rho, spec.rho)
        np.testing.assert_array_equal(spec2.psi, spec.psi)
        header = path.read_text().splitlines()[0]
        assert header == "nu,gamma0,rho,psi"

    def test_csv_single_bin(self, tmp_path):
        grid = build_grid(0.25, 0.1, 1)
        noise = NoiseProfile.flat(1.0, 1)
        spec = SignalSpectrum([1.0], [0.5])
        path = tmp_path / "one.csv"
        save_band_csv(path, grid, noise, spec)
        grid2, _, _ = load_band_csv(path)
        np.testing.assert_array_equal(grid2.freqs, grid.freqs)

    def test_csv_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nu,gamma0,rho\n0.25,1.0,1.0\n")
        with pytest.raises(ValueError, match="header"):
            load_band_csv(path)

    def test_json_round_trip_lossless(self):
        grid, noise, spec = self._sample_band()
        text = band_to_json(grid, noise, spec)
        payload = json.loads(text)
        assert set(payload) == {"grid", "noise", "spectrum"}
        assert payload["grid"]["n_freqs"] == 9
        grid2, noise2, spec2 = band_from_json(text)
        assert grid2.nu0 == grid.nu0
        assert grid2.bandwidth_B == grid.bandwidth_B
        np.testing.assert_array_equal(grid2.freqs, grid.freqs)
        np.testing.assert_array_equal(noise2.gamma0, noise.gamma0)
        np.testing.assert_array_equal(spec2.rho, spec.rho)
        np.testing.assert_array_equal(spec2.psi, spec.psi)
