"""
Tests for the hypercontractivity moment layer: analytic oracles, the empirical
ratio, the (C0, iota) fit and the parameter combination rules.
"""
import os
import sys

import numpy as np
import pytest
from scipy import special

# Add the parent directory to the path to import from analysis
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from analysis.moments import (HyperParams, chaos_moment_comparison, chaos_moment_ratio, combine_linear_params,
                              combine_product_params, dyadic_lags, empirical_moment_ratio, fit_hyper_params,
                              gaussian_abs_moment, hermite_abs_moment, hyper_bound_holds,
                              increment_moment_table, pooled_increments)
from errors import DomainError
from models.base_model import ModelSpec
from models.model_manager import get_model_manager


def _ratios(n_paths, spec, grid=2, p_grid=(2, 3, 4, 5, 6)):
    paths = get_model_manager().sample_batch(spec, grid, n_paths)
    increments = pooled_increments([p.values for p in paths], 1)
    return {p: empirical_moment_ratio(increments, p) for p in p_grid}


class TestGaussianOracle:
    """Test the Gaussian absolute moments."""

    def test_known_values(self):
        """E|Z| = sqrt(2/pi), E Z^2 = 1, E Z^4 = 3."""
        assert gaussian_abs_moment(1) == pytest.approx(np.sqrt(2 / np.pi))
        assert gaussian_abs_moment(2) == pytest.approx(1.0)
        assert gaussian_abs_moment(4) == pytest.approx(3.0)

    def test_order_below_one(self):
        """p < 1 is out of range."""
        with pytest.raises(DomainError):
            gaussian_abs_moment(0.5)

    def test_empirical_matches_oracle(self):
        """Ratios of 10^6 standard normals match E|Z|^p within 4 standard errors."""
        z = np.random.default_rng(2024).standard_normal(1_000_000)
        squares = z * z
        m2 = squares.mean()
        for p in range(2, 9):
            powers = np.abs(z) ** p
            mp = powers.mean()
            gradient = np.array([m2 ** (-p / 2), -0.5 * p * mp * m2 ** (-p / 2 - 1)])
            covariance = np.cov(np.vstack([powers, squares])) / z.size
            se = np.sqrt(gradient @ covariance @ gradient)
            ratio = empirical_moment_ratio(z, p)
            assert abs(ratio - gaussian_abs_moment(p)) <= 4 * se + 1e-12

    def test_analytic_fit_is_subgaussian(self):
        """Fitting the exact Gaussian ratios gives iota in [0.4, 0.6]."""
        estimate = fit_hyper_params({p: gaussian_abs_moment(p) for p in range(2, 11)})
        assert 0.4 <= estimate.params.iota <= 0.6
        assert estimate.r_squared > 0.99


class TestChaosOracle:
    """Test the Hermite moment oracles."""

    def test_second_moment_is_factorial(self):
        """E He_n(Z)^2 = n!."""
        for order in range(0, 5):
            assert hermite_abs_moment(order, 2) == pytest.approx(special.factorial(order), rel=1e-8)
            assert chaos_moment_ratio(order, 2) == pytest.approx(1.0, rel=1e-8)

    def test_fourth_moment_of_second_chaos(self):
        """E (Z^2 - 1)^4 = 60."""
        assert hermite_abs_moment(2, 4) == pytest.approx(60.0, rel=1e-8)

    def test_order_two_fit(self):
        """Exact chaos-2 ratios give iota in [0.85, 1.15]."""
        estimate = fit_hyper_params({p: chaos_moment_ratio(2, p) for p in range(2, 9)})
        assert 0.85 <= estimate.params.iota <= 1.15

    def test_comparison_constant(self):
        """((r - 1) / (q - 1))^(p/2)."""
        assert chaos_moment_comparison(2, 4, 2) == pytest.approx(3.0)
        with pytest.raises(DomainError):
            chaos_moment_comparison(1, 4, 2)
        with pytest.raises(DomainError):
            chaos_moment_comparison(4, 2, 2)


class TestEmpiricalRatio:
    """Test the plug-in ratio."""

    def test_order_two_is_one(self):
        """C(2) = 1 for any sample."""
        samples = np.random.default_rng(1).exponential(size=500)
        assert empirical_moment_ratio(samples, 2) == pytest.approx(1.0)

    def test_rejections(self):
        """Too few or all-equal samples are rejected."""
        with pytest.raises(DomainError):
            empirical_moment_ratio(np.arange(10.0), 3)
        with pytest.raises(DomainError):
            empirical_moment_ratio(np.ones(200), 3)

    def test_wick_chaos_fit(self):
        """Monte Carlo Wick order 2 gives iota near 1."""
        ratios = _ratios(100_000, ModelSpec.wick_chaos(2, 0.5, seed=8))
        estimate = fit_hyper_params(ratios)
        assert 0.8 <= estimate.params.iota <= 1.25

    def test_product_closure(self):
        """A product of independent fBm paths satisfies the combined bound."""
        spec = ModelSpec.product(ModelSpec.fbm(0.5), ModelSpec.fbm(0.7), seed=3)
        ratios = _ratios(100_000, spec)
        combined = combine_product_params(HyperParams(2.0, 0.5), HyperParams(2.0, 0.5))
        assert all(hyper_bound_holds(ratios, combined).values())
        assert fit_hyper_params(ratios).params.iota <= combined.iota + 0.15


class TestFit:
    """Test the least-squares inversion."""

    def test_exact_recovery(self):
        """Ratios built from (C0, iota) are fitted back exactly."""
        truth = HyperParams(C0=1.5, iota=0.7)
        estimate = fit_hyper_params({p: truth.bound(p) for p in (1.5, 2, 3, 4, 6)})
        assert estimate.params.C0 == pytest.approx(1.5, rel=1e-9)
        assert estimate.params.iota == pytest.approx(0.7, rel=1e-9)
        assert estimate.residual_rms == pytest.approx(0.0, abs=1e-9)

    def test_errors(self):
        """Too few orders, bad ratios and bounded increments are rejected."""
        with pytest.raises(DomainError):
            fit_hyper_params({2: 1.0, 3: 1.5, 4: 3.0})
        with pytest.raises(DomainError):
            fit_hyper_params({2: 1.0, 3: -1.0, 4: 3.0, 5: 4.0})
        with pytest.raises(DomainError):
            fit_hyper_params({2: 1.0, 3: 1.0, 4: 1.0, 5: 1.0})

    def test_params_validation(self):
        """iota = 0 and C0 <= 0 are refused."""
        with pytest.raises(DomainError):
            HyperParams(C0=1.0, iota=0.0)
        with pytest.raises(DomainError):
            HyperParams(C0=0.0, iota=0.5)


class TestCombinationRules:
    """Test the product and linear combination rules."""

    def test_product_rule(self):
        """(2^(iX + iY) C0X C0Y, iX + iY)."""
        combined = combine_product_params(HyperParams(2.0, 0.5), HyperParams(3.0, 1.0))
        assert combined.C0 == pytest.approx(2 ** 1.5 * 6.0)
        assert combined.iota == pytest.approx(1.5)

    def test_linear_rule(self):
        """sqrt(k) max C0 over nonzero weights, max iota."""
        params = [HyperParams(2.0, 0.5), HyperParams(5.0, 2.0), HyperParams(1.0, 1.0)]
        combined = combine_linear_params([1.0, 0.0, 3.0], params)
        assert combined.C0 == pytest.approx(np.sqrt(2) * 2.0)
        assert combined.iota == pytest.approx(1.0)
        with pytest.raises(DomainError):
            combine_linear_params([0.0, 0.0, 0.0], params)


class TestMomentTable:
    """Test the increment moment table."""

    def test_table_on_fbm(self):
        """fBm increments satisfy the (2, 1/2) bound at every order."""
        paths = get_model_manager().sample_batch(ModelSpec.fbm(0.5, seed=6), 65, 200)
        rows = increment_moment_table(paths, params=HyperParams(2.0, 0.5))
        assert rows[0].p == 2.0 and rows[0].ratio == pytest.approx(1.0)
        assert all(row.passed for row in rows)
        assert all(row.max_ratio >= row.ratio - 1e-12 for row in rows)

    def test_dyadic_lags(self):
        """Lags double while enough increments remain."""
        assert dyadic_lags(65) == [1, 2, 4, 8, 16, 32]
