"""Unit tests for the special-function layer."""

import math

import numpy as np
import pytest

from smoothcert import special_functions as sf
from smoothcert.errors import DomainError


class TestGammaFunctions:
    """Test cases for the regularised incomplete gamma function and its inverse."""

    @pytest.mark.parametrize("shape", [0.5, 1.0, 37.5, 1536.0, 75110.0])
    def test_cdf_matches_reference(self, shape):
        """Test that gamma_cdf agrees with the series / continued-fraction oracle."""
        spread = 6.0 * math.sqrt(shape)
        xs = np.linspace(max(1e-3, shape - spread), shape + spread, 20)
        tolerance = 1e-12 if shape < 100 else 1e-11
        for x in xs:
            assert sf.gamma_cdf(shape, x) == pytest.approx(sf.gamma_cdf_reference(shape, x), abs=tolerance)

    def test_cdf_closed_form_at_shape_one(self):
        """Test that Λ_1(x) = 1 - exp(-x)."""
        for x in (0.1, 1.0, 3.0, 10.0):
            assert sf.gamma_cdf(1.0, x) == pytest.approx(-math.expm1(-x), abs=1e-15)

    def test_cdf_at_zero(self):
        """Test that Λ(0) = 0."""
        assert sf.gamma_cdf(2.5, 0.0) == 0.0

    def test_sf_complements_cdf(self):
        """Test that gamma_sf = 1 - gamma_cdf."""
        assert sf.gamma_sf(7.0, 5.0) + sf.gamma_cdf(7.0, 5.0) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("shape", [0.156, 2.0, 500.0, 75110.0])
    def test_inverse_round_trip(self, shape):
        """Test that gamma_cdf(gamma_cdf_inv(p)) returns p."""
        for p in (1e-6, 0.01, 0.3, 0.5, 0.9, 0.999):
            assert sf.gamma_cdf(shape, sf.gamma_cdf_inv(shape, p)) == pytest.approx(p, rel=1e-8)

    def test_inverse_of_zero(self):
        """Test that Λ^{-1}(0) = 0."""
        assert sf.gamma_cdf_inv(3.0, 0.0) == 0.0

    def test_domain_errors(self):
        """Test that invalid arguments raise DomainError."""
        with pytest.raises(DomainError):
            sf.gamma_cdf(0.0, 1.0)
        with pytest.raises(DomainError):
            sf.gamma_cdf(1.0, -1.0)
        with pytest.raises(DomainError):
            sf.gamma_cdf_inv(1.0, 1.0)
        with pytest.raises(DomainError):
            sf.log_gamma(0.0)

    def test_domain_error_is_value_error(self):
        """Test that DomainError can be caught as ValueError."""
        with pytest.raises(ValueError):
            sf.gamma_cdf_inv(2.0, -0.1)

    def test_log_gamma_large_argument(self):
        """Test that log_gamma stays finite where Γ overflows."""
        assert sf.log_gamma(75112.0) == pytest.approx(math.lgamma(75112.0), rel=1e-14)

    def test_vector_input(self):
        """Test that array input gives array output."""
        values = sf.gamma_cdf(2.0, np.array([0.5, 1.0, 2.0]))
        assert isinstance(values, np.ndarray)
        assert values.shape == (3,)


class TestBetaFunctions:
    """Test cases for the symmetric beta CDF Ψ."""

    def test_midpoint(self):
        """Test that Ψ(1/2) = 1/2 for any alpha."""
        for alpha in (0.5, 4.5, 1535.5, 75111.5):
            assert sf.beta_cdf_sym(alpha, 0.5) == pytest.approx(0.5, abs=1e-14)

    def test_symmetry(self):
        """Test that Ψ(x) + Ψ(1 - x) = 1."""
        for x in (0.1, 0.37, 0.49):
            assert sf.beta_cdf_sym(12.5, x) + sf.beta_cdf_sym(12.5, 1 - x) == pytest.approx(1.0, abs=1e-14)

    def test_clamps_outside_unit_interval(self):
        """Test that arguments outside [0, 1] clamp to 0 and 1."""
        assert sf.beta_cdf_sym(3.0, -2.0) == 0.0
        assert sf.beta_cdf_sym(3.0, 5.0) == 1.0
        assert sf.beta_cdf_sym(3.0, -np.inf) == 0.0
        assert sf.beta_cdf_sym(3.0, np.inf) == 1.0

    def test_alpha_one_is_uniform(self):
        """Test that Ψ_1 is the uniform CDF."""
        assert sf.beta_cdf_sym(1.0, 0.3) == pytest.approx(0.3, abs=1e-15)

    def test_inverse_round_trip(self):
        """Test that Ψ(Ψ^{-1}(p)) returns p."""
        for p in (0.05, 0.5, 0.8, 0.999):
            assert sf.beta_cdf_sym(1535.5, sf.beta_cdf_sym_inv(1535.5, p)) == pytest.approx(p, abs=1e-12)

    def test_rejects_nonpositive_alpha(self):
        """Test that alpha <= 0 raises DomainError."""
        with pytest.raises(DomainError):
            sf.beta_cdf_sym(0.0, 0.5)


class TestNormalFunctions:
    """Test cases for Φ and Φ^{-1}."""

    def test_known_values(self):
        """Test standard normal values."""
        assert sf.std_normal_cdf(0.0) == 0.5
        assert sf.std_normal_cdf_inv(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
        assert sf.std_normal_cdf_inv(0.8) == pytest.approx(0.8416212335729143, abs=1e-12)

    def test_round_trip(self):
        """Test that Φ(Φ^{-1}(p)) returns p."""
        for p in (1e-10, 0.2, 0.5, 0.7, 0.999999):
            assert sf.std_normal_cdf(sf.std_normal_cdf_inv(p)) == pytest.approx(p, rel=1e-12)

    def test_inverse_domain(self):
        """Test that Φ^{-1} rejects 0 and 1."""
        with pytest.raises(DomainError):
            sf.std_normal_cdf_inv(0.0)
        with pytest.raises(DomainError):
            sf.std_normal_cdf_inv(1.0)


class TestLambertW:
    """Test cases for the principal Lambert W branch."""

    def test_known_values(self):
        """Test W(0) = 0, W(e) = 1 and W(-1/e) = -1."""
        assert sf.lambert_w0(0.0) == 0.0
        assert sf.lambert_w0(math.e) == pytest.approx(1.0, abs=1e-14)
        assert sf.lambert_w0(-math.exp(-1.0)) == pytest.approx(-1.0, abs=1e-7)

    def test_defining_equation(self):
        """Test that W(x) e^{W(x)} = x."""
        for x in (-0.3, 0.01, 1.0, 50.0, 1e6):
            w = sf.lambert_w0(x)
            assert w * math.exp(w) == pytest.approx(x, rel=1e-12, abs=1e-15)

    def test_rejects_below_branch_point(self):
        """Test that x < -1/e raises DomainError."""
        with pytest.raises(DomainError):
            sf.lambert_w0(-0.5)

    def test_exp_form_large_argument(self):
        """Test that W(e^z) solves w + ln w = z where e^z overflows."""
        for z in (800.0, 5000.0, 1e6):
            w = sf.lambert_w0_exp(z)
            assert w + math.log(w) == pytest.approx(z, rel=1e-14)

    def test_exp_form_is_continuous_at_switch(self):
        """Test that the direct and Newton paths agree around the switch point."""
        below = sf.lambert_w0_exp(499.999)
        above = sf.lambert_w0_exp(500.001)
        assert above - below == pytest.approx(0.002 * below / (below + 1.0), rel=1e-3)

    def test_exp_form_matches_direct(self):
        """Test that lambert_w0_exp(z) = lambert_w0(e^z) for moderate z."""
        for z in (-5.0, 0.0, 3.0, 100.0):
            assert sf.lambert_w0_exp(z) == pytest.approx(sf.lambert_w0(math.exp(z)), rel=1e-13)

    def test_exp_form_vector(self):
        """Test that lambert_w0_exp keeps array shape across both paths."""
        values = sf.lambert_w0_exp(np.array([1.0, 1000.0]))
        assert values.shape == (2,)
        assert values[0] == pytest.approx(sf.lambert_w0(math.e), rel=1e-13)


class TestHypersphere:
    """Test cases for log_hypersphere_surface."""

    def test_low_dimensions(self):
        """Test the circle and sphere surface areas."""
        assert sf.log_hypersphere_surface(2, 2.0) == pytest.approx(math.log(4 * math.pi), rel=1e-14)
        assert sf.log_hypersphere_surface(3, 1.0) == pytest.approx(math.log(4 * math.pi), rel=1e-14)

    def test_high_dimension_is_finite(self):
        """Test that d = 150224 stays in log space without overflow."""
        assert math.isfinite(sf.log_hypersphere_surface(150224, 400.0))

    def test_rejects_nonpositive_radius(self):
        """Test that r <= 0 raises DomainError."""
        with pytest.raises(DomainError):
            sf.log_hypersphere_surface(3, 0.0)
