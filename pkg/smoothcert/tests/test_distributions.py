"""Unit tests for the ESG/EGG distribution module."""

import math

import numpy as np
import pytest
from scipy import integrate

from smoothcert import special_functions as sf
from smoothcert.distributions import (
    DistributionSpec,
    Family,
    egg,
    esg,
    formal_scale,
    formal_scale_approx,
    log_pdf,
    mass_within,
    pdf_inv,
    radial_density_curve,
    radius_for_mass,
    ratio_constant,
    sample_radii,
    sample_radius,
    sample_vector,
)
from smoothcert.errors import DomainError
from smoothcert.integrator import expectation_adaptive


class TestDistributionSpec:
    """Test cases for DistributionSpec validation and derived values."""

    def test_gaussian_scale_is_sigma(self):
        """Test that ESG with eta = 2 has formal scale sigma."""
        for d in (10, 3072, 150224):
            assert formal_scale(esg(d, 0.5, 2.0)) == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("spec", [
        esg(10, 1.0, 1.0),
        esg(7, 0.25, 4.0),
        egg(12, 0.5, 2.0, 3),
        egg(100, 1.0, 0.5, 45),
    ])
    def test_second_moment_calibration(self, spec):
        """Test that E||z||² = d sigma²."""
        second = expectation_adaptive(spec.shape, lambda u: np.asarray(spec.radius_of(u)) ** 2, tol=1e-12)
        assert second == pytest.approx(spec.d * spec.sigma ** 2, rel=1e-8)

    def test_esg_rejects_k(self):
        """Test that ESG specs must have k = 0."""
        with pytest.raises(ValueError):
            DistributionSpec(Family.ESG, 10, 1.0, 2.0, k=1)

    def test_egg_needs_positive_base(self):
        """Test that EGG requires d - 2k >= 1."""
        with pytest.raises(ValueError):
            egg(10, 1.0, 2.0, 5)

    def test_rejects_bad_parameters(self):
        """Test that nonpositive sigma, eta or T raise ValueError."""
        with pytest.raises(ValueError):
            esg(10, 0.0, 2.0)
        with pytest.raises(ValueError):
            esg(10, 1.0, -1.0)
        with pytest.raises(ValueError):
            esg(10, 1.0, 2.0, T=0.0)

    def test_family_from_string(self):
        """Test that the family may be given as a string."""
        assert DistributionSpec("egg", 10, 1.0, 2.0, 2).family == Family.EGG

    def test_radius_coordinate_round_trip(self):
        """Test that u_of inverts radius_of."""
        spec = egg(1000, 1.0, 0.5, 495)
        for u in (0.1, 5.0, 80.0):
            assert spec.u_of(spec.radius_of(u)) == pytest.approx(u, rel=1e-12)

    def test_record_round_trip(self):
        """Test that to_record / from_record preserve the distribution."""
        spec = egg(3072, 0.25, 8.0, 1530, T=40.0)
        assert DistributionSpec.from_record(spec.to_record()) == spec

    def test_truncation_helpers(self):
        """Test with_truncation and untruncated."""
        spec = esg(100, 1.0, 2.0)
        truncated = spec.with_truncation(9.0)
        assert truncated.truncated
        assert truncated.untruncated() == spec
        assert spec.u_truncation == math.inf


class TestScaleApproximation:
    """Test cases for the large-d formal scale approximation."""

    def test_exact_at_eta_two(self):
        """Test that the approximation is exact for the Gaussian."""
        spec = esg(3072, 1.0, 2.0)
        assert formal_scale_approx(spec) == pytest.approx(formal_scale(spec), rel=1e-11)

    def test_eta_one_relative_error(self):
        """Test that for eta = 1 the relative error is sqrt(1 + 1/d) - 1."""
        spec = esg(3072, 1.0, 1.0)
        re = abs(formal_scale(spec) - formal_scale_approx(spec)) / formal_scale(spec)
        assert re == pytest.approx(math.sqrt(1 + 1 / 3072) - 1, rel=1e-6)

    def test_egg_not_supported(self):
        """Test that the approximation is ESG only."""
        with pytest.raises(ValueError):
            formal_scale_approx(egg(10, 1.0, 2.0, 2))


class TestDensity:
    """Test cases for log_pdf, pdf_inv and the radial density."""

    @pytest.mark.parametrize("spec", [esg(5, 1.0, 1.0), egg(6, 1.0, 2.0, 1), esg(3, 0.5, 4.0)])
    def test_radial_density_integrates_to_one(self, spec):
        """Test that φ(r) V_d(r) integrates to one over r."""
        def density(r):
            return radial_density_curve(spec, [r])[0][1]

        top = float(spec.radius_of(sf.gamma_cdf_inv(spec.shape, 1 - 1e-15)))
        median = radius_for_mass(spec, 0.5)
        total, _ = integrate.quad(density, 0.0, top, points=[median], limit=200, epsabs=1e-12)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_truncated_density_is_scaled(self):
        """Test that Q's density is C times P's inside T and zero beyond."""
        spec = esg(20, 1.0, 2.0)
        T = radius_for_mass(spec, 0.4)
        q_spec = spec.with_truncation(T)
        assert log_pdf(q_spec, 0.5 * T) - log_pdf(spec, 0.5 * T) == pytest.approx(math.log(2.5), rel=1e-10)
        assert log_pdf(q_spec, 1.5 * T) == -math.inf

    @pytest.mark.parametrize("spec", [esg(10, 1.0, 2.0), esg(50, 0.5, 0.5), egg(10, 1.0, 2.0, 2),
                                      egg(50, 1.0, 8.0, 20)])
    def test_pdf_inverse_round_trip(self, spec):
        """Test that pdf_inv(pdf(r)) returns r."""
        for fraction in (0.2, 0.5, 0.9):
            r = radius_for_mass(spec, fraction)
            y = math.exp(log_pdf(spec, r))
            if y == 0.0:
                continue
            assert pdf_inv(spec, y) == pytest.approx(r, rel=1e-8)

    def test_pdf_inverse_rejects_above_maximum(self):
        """Test that ESG pdf_inv rejects values above the density at the origin."""
        spec = esg(2, 1.0, 2.0)
        peak = math.exp(log_pdf(spec, 1e-12))
        with pytest.raises(DomainError):
            pdf_inv(spec, 10 * peak)

    def test_log_pdf_rejects_zero_radius(self):
        """Test that log_pdf needs r > 0."""
        with pytest.raises(DomainError):
            log_pdf(esg(3, 1.0, 2.0), 0.0)


class TestMass:
    """Test cases for mass_within, radius_for_mass and ratio_constant."""

    def test_round_trip(self):
        """Test that mass_within(radius_for_mass(p)) returns p."""
        spec = egg(3072, 0.5, 4.0, 1530)
        for p in (0.01, 0.5, 0.99):
            assert mass_within(spec, radius_for_mass(spec, p)) == pytest.approx(p, rel=1e-10)

    def test_gaussian_median(self):
        """Test the Gaussian mass inside the chi median."""
        d = 3072
        T = math.sqrt(2 * sf.gamma_cdf_inv(d / 2, 0.5))
        assert mass_within(esg(d, 1.0, 2.0), T) == pytest.approx(0.5, abs=1e-12)

    def test_ratio_constant(self):
        """Test that C = 1 / P(||z|| <= T)."""
        spec = egg(100000, 1.0, 2.0, 49995)
        T = radius_for_mass(spec, 0.5)
        assert ratio_constant(spec.with_truncation(T)) == pytest.approx(2.0, rel=1e-10)

    def test_ratio_constant_needs_truncation(self):
        """Test that ratio_constant rejects untruncated specs."""
        with pytest.raises(ValueError):
            ratio_constant(esg(10, 1.0, 2.0))


class TestSampling:
    """Test cases for the norm and vector samplers."""

    @pytest.fixture
    def rng(self):
        return np.random.default_rng(20240501)

    @pytest.mark.parametrize("spec", [esg(10, 1.0, 1.0), egg(1000, 1.0, 2.0, 495), esg(3072, 0.5, 8.0)])
    def test_empirical_mass(self, spec, rng):
        """Test that the sampled norm distribution matches mass_within."""
        n = 40000
        radii = sample_radii(spec, rng, n)
        for p in (0.2, 0.5, 0.8):
            rate = np.mean(radii <= radius_for_mass(spec, p))
            assert abs(rate - p) <= 4 * math.sqrt(p * (1 - p) / n)

    def test_truncated_draws_stay_inside(self, rng):
        """Test that draws from Q never leave the ball of radius T."""
        spec = egg(1000, 1.0, 2.0, 495)
        T = radius_for_mass(spec, 0.3)
        radii = sample_radii(spec.with_truncation(T), rng, 5000)
        assert np.all(radii <= T * (1 + 1e-12))
        assert np.mean(radii <= radius_for_mass(spec, 0.15)) == pytest.approx(0.5, abs=0.03)

    def test_seeded_reproducibility(self):
        """Test that a fixed seed gives identical draws."""
        spec = esg(100, 1.0, 2.0)
        first = sample_radius(spec, np.random.default_rng(7))
        second = sample_radius(spec, np.random.default_rng(7))
        assert first == second

    def test_vector_has_sampled_norm(self, rng):
        """Test that sample_vector has length d and a plausible norm."""
        spec = esg(3072, 1.0, 2.0)
        z = sample_vector(spec, rng)
        assert z.shape == (3072,)
        assert np.linalg.norm(z) == pytest.approx(math.sqrt(3072), rel=0.1)
