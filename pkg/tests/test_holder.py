"""
Tests for the moment and path directions of the Hoelder characterisation.
"""
import os
import sys

import numpy as np
import pytest

# Add the parent directory to the path to import from analysis
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from analysis.grr import GrrConfig, analyze_path, beta_window
from analysis.holder import (exp_moment_check, field_variance_scaling, fit_scaling, iff_report,
                             oscillation_profile, pathwise_exponent, variance_scaling)
from config import config
from errors import DomainError
from models.base_model import ModelSpec, SamplePath
from models.model_manager import get_model_manager

DYADIC_LAGS = [2.0 ** -k for k in range(3, 9)]


class TestFitScaling:
    """Test the log-log regression."""

    def test_exact_power_law(self):
        """lag^(2H) recovers H exactly."""
        fit = fit_scaling(DYADIC_LAGS, [1.7 * lag ** 0.6 for lag in DYADIC_LAGS])
        assert fit.alpha_hat == pytest.approx(0.3)
        assert fit.intercept == pytest.approx(np.log(1.7))
        assert fit.r_value == pytest.approx(1.0)
        assert len(fit.to_rows()) == len(DYADIC_LAGS)

    def test_scale_invariance(self):
        """Multiplying every moment by a constant leaves the slope alone."""
        moments = np.array([lag ** 1.4 for lag in DYADIC_LAGS])
        scaled = fit_scaling(DYADIC_LAGS, 25.0 * moments)
        assert scaled.slope == pytest.approx(fit_scaling(DYADIC_LAGS, moments).slope)

    def test_too_few_lags(self):
        with pytest.raises(DomainError):
            fit_scaling(DYADIC_LAGS[:4], [1.0] * 4)

    def test_non_dyadic_lag(self):
        with pytest.raises(DomainError):
            fit_scaling([0.3] + DYADIC_LAGS[1:], [1.0] * len(DYADIC_LAGS))

    def test_degenerate_model(self):
        """A vanishing second moment is reported as degenerate."""
        with pytest.raises(DomainError, match="degenerate"):
            fit_scaling(DYADIC_LAGS, [0.0] * len(DYADIC_LAGS))


class TestVarianceScaling:
    """Test the Monte Carlo moment direction."""

    def test_brownian_motion(self):
        """E(Delta B)^2 = lag gives alpha_hat near 1/2."""
        fit = variance_scaling(ModelSpec.fbm(0.5, seed=4), n_paths=1000, grid=257)
        assert fit.lags == DYADIC_LAGS
        assert fit.alpha_hat == pytest.approx(0.5, abs=0.02)

    def test_needs_paths(self):
        with pytest.raises(DomainError):
            variance_scaling(ModelSpec.fbm(0.5), n_paths=10, grid=257)

    def test_brownian_sheet_axes(self):
        """Per-axis and diagonal exponents of a sheet with H = (0.5, 0.3)."""
        report = field_variance_scaling(ModelSpec.fbm_sheet(0.5, 0.3, seed=9), n_paths=1000, grid=(33, 33))
        assert report.alpha_hats == pytest.approx((0.5, 0.3), abs=0.05)
        assert report.diagonal_fit.alpha_hat == pytest.approx(0.8, abs=0.05)


class TestPathwiseExponent:
    """Test the dyadic oscillation slope."""

    def test_linear(self):
        """f(t) = t has exponent 1."""
        path = SamplePath.from_function(lambda t: t, 1025)
        assert pathwise_exponent(path) == pytest.approx(1.0)

    def test_square_root(self):
        """f(t) = sqrt(t) has exponent 1/2, attained at the origin."""
        path = SamplePath.from_function(np.sqrt, 1025)
        assert pathwise_exponent(path) == pytest.approx(0.5, abs=1e-9)

    def test_constant(self):
        """A constant path has no finite exponent."""
        path = SamplePath.from_function(lambda t: np.zeros_like(t), 1025)
        assert pathwise_exponent(path) == np.inf

    @pytest.mark.parametrize("hurst", [0.3, 0.5, 0.7])
    def test_fbm_agrees_with_moment_direction(self, hurst):
        """Median over 100 fBm paths is near H and near the moment estimate."""
        paths = get_model_manager().sample_batch(ModelSpec.fbm(hurst, seed=40), 1025, 100)
        median = float(np.median([pathwise_exponent(path) for path in paths]))
        assert median == pytest.approx(hurst, abs=0.07)
        moment = variance_scaling(ModelSpec.fbm(hurst, seed=41), n_paths=1000, grid=257)
        assert abs(median - moment.alpha_hat) <= 0.1

    def test_anchored_pair_count(self):
        """Anchored scales use the same eight starts; unanchored use every pair."""
        path = SamplePath.from_function(lambda t: t, 1025)
        anchored = oscillation_profile(path)
        assert [row.scale for row in anchored] == list(range(3, 11))
        assert {row.n_pairs for row in anchored} == {8}
        free = oscillation_profile(path, scales=[4], anchored=False)
        assert free[0].n_pairs == 1025 - 64


class TestExpMoment:
    """Test the exponential-moment stability check."""

    def test_constant_samples(self):
        """Identical constants are stable with estimate e^(beta C^(1/iota))."""
        report = exp_moment_check(np.full(1000, 2.0), 0.1, 0.5)
        assert report.stable
        assert report.verdict == "stable"
        assert report.estimate == pytest.approx(np.exp(0.4))

    def test_beta_too_large(self):
        """An overflowing exponent is its own verdict."""
        report = exp_moment_check(np.full(1000, 10.0), 100.0, 0.5)
        assert not report.stable
        assert report.verdict == "beta too large"

    def test_beta_sweep(self):
        """Gaussian-tailed constants are stable for small beta and unstable for large beta."""
        samples = np.abs(np.random.default_rng(8).standard_normal(4000))
        assert exp_moment_check(samples, 0.05, 0.5).stable
        assert not exp_moment_check(samples, 2.0, 0.5).stable

    def test_needs_samples(self):
        with pytest.raises(DomainError):
            exp_moment_check(np.ones(10), 0.1, 0.5)


def _doubling_change(samples: np.ndarray) -> float:
    full = samples.mean()
    return abs(full - samples[: samples.size // 2].mean()) / full


def _trim_change(samples: np.ndarray) -> float:
    keep = int(np.floor(samples.size * (1.0 - config.exp_moment_trim_fraction)))
    full = samples.mean()
    return abs(full - np.sort(samples)[:keep].mean()) / full


class TestMomentWindow:
    """B on fBm paths inside and outside the finite-moment beta window."""

    @pytest.fixture(scope="class")
    def paths(self):
        return get_model_manager().sample_batch(ModelSpec.fbm(0.5, seed=31), 65, 2000)

    def test_mean_B_stable_inside_window(self, paths):
        """Doubling the path count and trimming the top 1% barely move the mean of B."""
        grr_config = GrrConfig(beta=0.5 * beta_window(2.0, 0.5), iota=0.5, alpha=0.5, C0=2.0)
        B = np.array([analyze_path(path, grr_config).B for path in paths])
        assert _doubling_change(B) < config.exp_moment_doubling_tolerance
        assert _trim_change(B) < config.exp_moment_trim_tolerance

    def test_mean_B_unstable_outside_window(self, paths):
        """At beta far above the window the top 1% of paths carry the mean."""
        grr_config = GrrConfig(beta=2.0, iota=0.5, alpha=0.5)
        with pytest.raises(DomainError):
            GrrConfig(beta=2.0, iota=0.5, alpha=0.5, C0=2.0)
        B = np.array([analyze_path(path, grr_config).B for path in paths])
        assert _trim_change(B) > config.exp_moment_trim_tolerance


class TestIffReport:
    """Test the combined report."""

    def test_linear_path_at_alpha_one(self):
        """f(t) = t passes both directions at alpha = 1."""
        report = iff_report(ModelSpec.deterministic("linear"), alpha=1.0, n_paths=1000, grid=257)
        assert report.moment.alpha_hat == pytest.approx(1.0)
        assert report.path.alpha_hat == pytest.approx(1.0)
        assert report.sobolev_violations == {0.05: 0, 0.1: 0, 0.2: 0}
        assert report.exp_moment is not None and report.exp_moment.stable
        assert report.passed
        assert report.to_record()["passed"] is True

    def test_fbm_claimed_alpha_too_large(self):
        """fBm(0.3) does not have alpha = 0.7; both directions say so."""
        report = iff_report(ModelSpec.fbm(0.3, seed=6), alpha=0.7, n_paths=1000, grid=257)
        assert report.moment.alpha_hat == pytest.approx(0.3, abs=0.05)
        assert not report.moment.passed
        assert not report.path.passed
        assert report.consistent
        assert not report.passed

    def test_fbm_at_its_hurst_exponent(self):
        """fBm(0.7) at alpha = 0.7 passes both directions with zero Sobolev violations."""
        report = iff_report(ModelSpec.fbm(0.7, seed=5), alpha=0.7, n_paths=1000, grid=257)
        assert report.moment.passed
        assert report.path.passed
        assert report.sobolev_violations == {0.05: 0, 0.1: 0, 0.2: 0}
        assert report.agreement <= 0.1
        assert report.passed
