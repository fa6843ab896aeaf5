"""Unit tests for the Monte-Carlo sampling pipeline."""

import numpy as np
import pytest
from scipy import stats

from smoothcert import harness
from smoothcert.distributions import Family, esg, mass_within, radius_for_mass
from smoothcert.dsrs_cert import feasibility_check, heuristic_T
from smoothcert.errors import SolverError
from smoothcert.harness import (
    ClassifierKind,
    SamplingConfig,
    SyntheticClassifier,
    average_certified_radius,
    clopper_pearson_lower,
    conservative_pair,
    count_successes,
    estimate_probability,
    preset_spec,
    run_pipeline,
    shell_probabilities,
    stream_generator,
)


class TestClopperPearson:
    """Test cases for the one-sided exact binomial bound."""

    def test_no_successes(self):
        """Test that zero successes give a zero bound."""
        assert clopper_pearson_lower(0, 1000, 1e-3) == 0.0

    def test_all_successes(self):
        """Test that n of n successes give alpha^(1/n)."""
        assert clopper_pearson_lower(500, 500, 1e-3) == pytest.approx(1e-3 ** (1 / 500), rel=1e-10)

    @pytest.mark.parametrize("k, n, alpha", [(37, 100, 1e-3), (4990, 10000, 5e-4), (1, 20, 0.05)])
    def test_binomial_tail(self, k, n, alpha):
        """Test that the bound solves P(Bin(n, p) >= k) = alpha."""
        p = clopper_pearson_lower(k, n, alpha)
        assert stats.binom.sf(k - 1, n, p) == pytest.approx(alpha, rel=1e-6)

    def test_rejects_bad_counts(self):
        """Test that successes > n raises ValueError."""
        with pytest.raises(ValueError):
            clopper_pearson_lower(11, 10, 0.01)


class TestSyntheticClassifier:
    """Test cases for SyntheticClassifier."""

    def test_kind_from_string(self):
        """Test that the kind accepts its string value."""
        classifier = SyntheticClassifier("always_correct")
        assert classifier.kind == ClassifierKind.ALWAYS_CORRECT

    def test_validation(self):
        """Test that norm-based kinds need t_star and valid probabilities."""
        with pytest.raises(ValueError):
            SyntheticClassifier.concentrated(0.0)
        with pytest.raises(ValueError):
            SyntheticClassifier.shell(1.0, 1.5, 0.0)

    def test_concentrated_decisions(self):
        """Test that the concentrated classifier is exactly the ball indicator."""
        classifier = SyntheticClassifier.concentrated(2.0)
        radii = np.array([1.0, 2.0, 3.0])
        assert list(classifier.decide(radii, np.random.default_rng(0))) == [True, True, False]

    def test_estimate_probability(self):
        """Test the empirical rate against the ball mass."""
        spec = esg(100, 1.0, 2.0)
        classifier = SyntheticClassifier.concentrated(radius_for_mass(spec, 0.3))
        count, n = estimate_probability(classifier, spec, 40000, np.random.default_rng(1))
        assert n == 40000
        assert abs(count / n - 0.3) <= 4 * np.sqrt(0.3 * 0.7 / n)


class TestStreams:
    """Test cases for counter-based sampling streams."""

    def test_reproducible(self):
        """Test that identical (seed, stream, chunk) give identical draws."""
        a = stream_generator(5, 1, 3).standard_normal(4)
        b = stream_generator(5, 1, 3).standard_normal(4)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        """Test that streams and chunks are distinct."""
        base = stream_generator(5, 0, 0).standard_normal(4)
        assert not np.array_equal(base, stream_generator(5, 1, 0).standard_normal(4))
        assert not np.array_equal(base, stream_generator(5, 0, 1).standard_normal(4))

    def test_worker_count_does_not_change_counts(self):
        """Test that threaded chunk evaluation matches serial evaluation."""
        spec = esg(50, 1.0, 1.0)
        classifier = SyntheticClassifier.shell(radius_for_mass(spec, 0.5), 0.9, 0.2)
        serial = count_successes(classifier, spec, 25000, 11, 0, workers=1, chunk_size=4000)
        threaded = count_successes(classifier, spec, 25000, 11, 0, workers=4, chunk_size=4000)
        assert serial == threaded

    def test_classifier_seed_keys_coin_flips(self):
        """Test that rng_seed changes a random classifier's count but not a deterministic one's."""
        spec = esg(50, 1.0, 1.0)
        t_star = radius_for_mass(spec, 0.5)
        shell = [count_successes(SyntheticClassifier.shell(t_star, 0.9, 0.2, rng_seed=s), spec, 20000, 11, 0)
                 for s in (0, 1, 0)]
        assert shell[0] == shell[2]
        assert shell[0] != shell[1]
        concentrated = [count_successes(SyntheticClassifier.concentrated(t_star, rng_seed=s), spec, 20000, 11, 0)
                        for s in (0, 1)]
        assert concentrated[0] == concentrated[1]


class TestConservativePair:
    """Test cases for the minimal conservative completion."""

    def test_feasible_pair_unchanged(self):
        """Test that a feasible pair is kept."""
        pair = conservative_pair(0.6, 0.6, 2.0)
        assert (pair.A, pair.B, pair.note) == (0.6, 0.6, "unchanged")
        assert pair.provenance == "clopper_pearson"

    def test_lowers_B(self):
        """Test that B above C*A is lowered onto the edge."""
        pair = conservative_pair(0.2, 0.6, 2.0)
        assert pair.A == 0.2
        assert pair.B == pytest.approx(0.4)
        pair = conservative_pair(0.4, 1.0, 2.0)
        assert (pair.A, pair.B) == (0.4, pytest.approx(0.8))

    def test_lowers_A(self):
        """Test that B below C(A - 1) + 1 pulls A down."""
        pair = conservative_pair(0.9, 0.6, 2.0)
        assert pair.A == pytest.approx(0.8)
        assert pair.B == 0.6

    def test_always_feasible_and_weaker(self):
        """Test feasibility and monotonicity over a grid of inputs."""
        for A1 in np.linspace(0.0, 1.0, 11):
            for B1 in np.linspace(0.0, 1.0, 11):
                for C in (1.0, 1.5, 4.0):
                    pair = conservative_pair(A1, B1, C)
                    assert feasibility_check(pair.A, pair.B, C)
                    assert pair.A <= A1 + 1e-12 and pair.B <= B1 + 1e-12


class TestShellProbabilities:
    """Test cases for the exact classifier probabilities."""

    def test_concentrated(self):
        """Test that a concentrated classifier has B = 1 when T <= t_star."""
        spec = esg(200, 1.0, 2.0)
        T = heuristic_T(spec, 0.5)
        A, B = shell_probabilities(SyntheticClassifier.concentrated(T), spec, T)
        assert A == pytest.approx(0.5, rel=1e-10)
        assert B == 1.0

    def test_shell_with_wider_ball(self):
        """Test B when the truncation ball extends past t_star."""
        spec = esg(200, 1.0, 2.0)
        t_star, T = radius_for_mass(spec, 0.3), radius_for_mass(spec, 0.6)
        A, B = shell_probabilities(SyntheticClassifier.shell(t_star, 0.9, 0.5), spec, T)
        assert A == pytest.approx(0.9 * 0.3 + 0.5 * 0.7, rel=1e-10)
        assert B == pytest.approx((0.9 * 0.3 + 0.5 * 0.3) / 0.6, rel=1e-10)

    def test_constant_classifiers(self):
        """Test the always-correct and always-wrong classifiers."""
        spec = esg(10, 1.0, 2.0)
        assert shell_probabilities(SyntheticClassifier("always_correct"), spec, 1.0) == (1.0, 1.0)
        assert shell_probabilities(SyntheticClassifier("always_wrong"), spec, 1.0) == (0.0, 0.0)


class TestPipeline:
    """Test cases for run_pipeline."""

    @pytest.fixture
    def sampling(self):
        return SamplingConfig(N1=20000, N2=20000, N_np=20000)

    @pytest.fixture
    def spec(self):
        return esg(1000, 1.0, 2.0)

    def test_concentrated_classifier(self, spec, sampling):
        """Test that sampling under Q lets DSRS beat NP."""
        classifier = SyntheticClassifier.concentrated(radius_for_mass(spec, 0.7))
        report = run_pipeline(classifier, spec, kappa=0.5, config=sampling, seed=3, tol=1e-3)
        assert report.count_q == report.n_q
        assert report.B1 == pytest.approx(sampling.alpha2 ** (1 / sampling.N2), rel=1e-10)
        assert report.C == pytest.approx(2.0, rel=1e-10)
        assert mass_within(spec, report.T) == pytest.approx(0.5, rel=1e-10)
        assert report.radius_dsrs > report.radius_np > 0

    def test_always_wrong(self, spec, sampling):
        """Test that a classifier that is never correct certifies nothing."""
        report = run_pipeline(SyntheticClassifier("always_wrong"), spec, kappa=0.5, config=sampling, seed=1,
                              tol=1e-3)
        assert (report.A1, report.B1) == (0.0, 0.0)
        assert report.radius_np == 0.0
        assert report.radius_dsrs == 0.0

    def test_kappa_stand_in(self, spec, sampling):
        """Test that a missing kappa falls back to the clipped A1."""
        classifier = SyntheticClassifier.concentrated(radius_for_mass(spec, 0.6))
        report = run_pipeline(classifier, spec, config=sampling, seed=2, tol=1e-3)
        assert report.kappa_source == "A1 stand-in"
        assert report.kappa == report.A1

    def test_deterministic(self, spec, sampling):
        """Test that a fixed seed reproduces the report, whatever the worker count."""
        classifier = SyntheticClassifier.shell(radius_for_mass(spec, 0.6), 0.95, 0.3)
        first = run_pipeline(classifier, spec, kappa=0.5, config=sampling, seed=9, tol=1e-3)
        threaded = SamplingConfig(N1=20000, N2=20000, N_np=20000, workers=3)
        second = run_pipeline(classifier, spec, kappa=0.5, config=threaded, seed=9, tol=1e-3)
        assert first.to_record() == second.to_record()

    def test_report_record(self, spec, sampling):
        """Test that spec and classifier fields are flattened."""
        report = run_pipeline(SyntheticClassifier("always_correct"), spec, kappa=0.5, config=sampling, seed=0,
                              tol=1e-2)
        record = report.to_record()
        assert record["spec_d"] == 1000
        assert record["classifier_kind"] == "always_correct"
        assert "spec" not in record

    def test_solver_failure_returns_partial_report(self, spec, sampling, monkeypatch):
        """Test that a solver failure comes back in the report with the estimates kept."""
        def fail(problem):
            raise SolverError("bracket not found", bracket=(-60.0, 60.0))

        monkeypatch.setattr(harness, "dsrs_certify", fail)
        classifier = SyntheticClassifier.concentrated(radius_for_mass(spec, 0.7))
        report = run_pipeline(classifier, spec, kappa=0.5, config=sampling, seed=3, tol=1e-3)
        assert report.error == "bracket not found"
        assert report.count_p > 0 and report.count_q == report.n_q
        assert report.C == pytest.approx(2.0, rel=1e-10)
        assert report.radius_np > 0
        assert report.radius_dsrs == 0.0


class TestHelpers:
    """Test cases for presets, ACR and SamplingConfig."""

    def test_average_certified_radius(self):
        """Test that abstentions count as zero."""
        records = [{"radius": 1.0}, {"radius": None}, {"radius": 2.0}]
        assert average_certified_radius(records) == pytest.approx(1.0)
        assert average_certified_radius([]) == 0.0

    def test_presets(self):
        """Test the CIFAR-10 and ImageNet dimensions."""
        spec = preset_spec("cifar10", Family.EGG, 0.5, 2.0)
        assert (spec.d, spec.k) == (3072, 1530)
        assert preset_spec("imagenet", "esg", 0.5, 1.0).k == 0
        with pytest.raises(ValueError):
            preset_spec("mnist", Family.ESG, 0.5, 2.0)

    def test_sampling_config_validation(self):
        """Test that SamplingConfig rejects bad sizes and levels."""
        with pytest.raises(ValueError):
            SamplingConfig(N1=0)
        with pytest.raises(ValueError):
            SamplingConfig(alpha2=1.0)
