"""
Tests for supremum tails, the beta0 window and the second-moment diagnostics.
"""
import os
import sys

import numpy as np
import pytest

# Add the parent directory to the path to import from analysis
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from analysis.grr import beta_window
from analysis.tails import (TailConfig, additive_constants, beta0_max, c_beta0_kappa, estimate_C_beta0,
                            field_sup_tail_experiment, paley_zygmund, paley_zygmund_check,
                            sup_box_increment, sup_tail_experiment, tail_bound_curve,
                            tightness_diagnostic)
from errors import DomainError
from models.base_model import ModelSpec, SampleField, SamplePath


def default_tail_config(C0=2.0, iota=0.5, alphas=(0.5,)):
    """beta and beta0 at half of their windows."""
    return TailConfig(beta=0.5 * beta_window(C0, iota), beta0=0.5 * beta0_max(C0, iota, len(alphas)),
                      iota=iota, alphas=alphas, C0=C0)


class TestBeta0Window:
    """Test beta0_max, kappa and C(beta0)."""

    def test_beta0_max(self):
        """e iota / (8^n C0 3^max(iota-1,0))^(1/iota)."""
        assert beta0_max(2.0, 0.5) == pytest.approx(np.e * 0.5 / 256.0)
        assert beta0_max(1.0, 2.0, 2) == pytest.approx(np.e * 2.0 / np.sqrt(64.0 * 3.0))

    def test_kappa_is_one_at_default_choice(self):
        """Halving both windows gives kappa = 1."""
        for C0, iota, n in [(2.0, 0.5, 1), (3.0, 1.5, 1), (2.0, 0.5, 2)]:
            beta = 0.5 * beta_window(C0, iota)
            beta0 = 0.5 * beta0_max(C0, iota, n)
            assert c_beta0_kappa(beta0, beta, iota, n) == pytest.approx(1.0)

    def test_config_rejects_beta0_outside_window(self):
        """beta0 at or above beta0_max is refused."""
        with pytest.raises(DomainError):
            TailConfig(beta=0.1, beta0=beta0_max(2.0, 0.5), iota=0.5, alphas=(0.5,), C0=2.0)

    def test_C_beta0_of_constant_B(self):
        """B = 1 everywhere gives C(beta0) = 4^n."""
        estimate = estimate_C_beta0(np.ones(50), beta0=0.001, beta=0.1, iota=0.5)
        assert estimate.value == pytest.approx(4.0)
        assert estimate.n_samples == 50
        assert estimate.warning is None

    def test_C_beta0_warns_outside_moment_window(self):
        """kappa past the finite-moment threshold warns instead of failing."""
        beta = 0.5 * beta_window(2.0, 0.5)
        estimate = estimate_C_beta0([1.0, 1.5], beta0=3.0 * beta0_max(2.0, 0.5), beta=beta, iota=0.5, C0=2.0)
        assert estimate.kappa == pytest.approx(6.0)
        assert estimate.warning is not None

    def test_additive_constants(self):
        """Derived and stated additive constants."""
        derived, statement = additive_constants(2.0, 0.5, 1.0)
        assert derived == pytest.approx(2.0 * np.exp(-1.0) * 2.0)
        assert statement == pytest.approx(2.0 * np.exp(-0.5))

    def test_bound_decreasing(self):
        """The tail bound decreases in u."""
        bound = tail_bound_curve([0.5, 1.0, 2.0], 4.0, 0.1, 0.5)
        assert bound[0] == pytest.approx(4.0 * np.exp(-0.1 * 0.25))
        assert np.all(np.diff(bound) < 0)


class TestSupremum:
    """Test the supremum of increments on a box."""

    def test_linear_path(self):
        """sup over [0, 1/2] of |t - 0| is 1/2."""
        path = SampleField.from_path(SamplePath.from_function(lambda t: t, 17))
        assert sup_box_increment(path, (0.0,), (0.5,), (0.0,)) == pytest.approx(0.5)
        assert sup_box_increment(path, (0.25,), (1.0,), (0.5,)) == pytest.approx(0.5)

    def test_product_field(self):
        """xy from base (0, 0) over the unit square peaks at 1."""
        field = SampleField.from_function(lambda x, y: x * y, (9, 9))
        assert sup_box_increment(field, (0.0, 0.0), (1.0, 1.0), (0.0, 0.0)) == pytest.approx(1.0)

    def test_misaligned_interval(self):
        """Interval ends must be grid nodes and contain the base point."""
        path = SampleField.from_path(SamplePath.from_function(lambda t: t, 17))
        with pytest.raises(DomainError):
            sup_box_increment(path, (0.1,), (0.5,), (0.1,))
        with pytest.raises(DomainError):
            sup_box_increment(path, (0.0,), (0.5,), (0.75,))


class TestTailExperiment:
    """Test the Monte Carlo tail curves."""

    def test_brownian_motion_passes(self):
        """Brownian motion stays under the bound at every u."""
        result = sup_tail_experiment(ModelSpec.fbm(0.5, seed=7), u_grid=(0.5, 1.0, 2.0, 4.0), n_paths=1000,
                                     tail_config=default_tail_config(), grid=65)
        assert result.curve.passed
        assert result.C_beta0.kappa == pytest.approx(1.0)
        assert result.C_beta0.value >= 4.0
        rows = result.curve.to_rows()
        assert [row["u"] for row in rows] == [0.5, 1.0, 2.0, 4.0]
        assert result.to_record()["passed"] is True

    @pytest.mark.parametrize("spec,C0,iota,alpha", [
        (ModelSpec.fbm(0.3, seed=21), 2.0, 0.5, 0.3),
        (ModelSpec.fbm(0.7, seed=22), 2.0, 0.5, 0.7),
        (ModelSpec.wick_chaos(2, 0.5, seed=23), 1.0, 1.0, 0.5),
    ])
    def test_hypercontractive_paths_pass(self, spec, C0, iota, alpha):
        """fBm at both Hurst extremes and the order-2 Wick power stay under the bound."""
        result = sup_tail_experiment(spec, u_grid=(0.5, 1.0, 2.0, 4.0), n_paths=1000,
                                     tail_config=default_tail_config(C0=C0, iota=iota, alphas=(alpha,)), grid=65)
        assert result.curve.passed
        assert result.C_beta0.kappa == pytest.approx(1.0)
        assert all(0.0 <= p <= 1.0 for p in result.curve.empirical)

    def test_too_few_paths(self):
        """Tail experiments need 1000 paths."""
        with pytest.raises(DomainError):
            sup_tail_experiment(ModelSpec.fbm(0.5), n_paths=100, tail_config=default_tail_config(), grid=65)

    def test_needs_one_parameter_config(self):
        """A field TailConfig is refused on the path experiment."""
        with pytest.raises(DomainError):
            sup_tail_experiment(ModelSpec.fbm(0.5), n_paths=1000,
                                tail_config=default_tail_config(alphas=(0.5, 0.5)), grid=65)

    def test_brownian_sheet_passes(self):
        """The field curve on a Brownian sheet stays under the bound."""
        result = field_sup_tail_experiment(ModelSpec.fbm_sheet(0.5, 0.5, seed=3), (0.0, 0.0), (1.0, 1.0),
                                           (0.0, 0.0), u_grid=(0.5, 1.0, 2.0), n_paths=1000,
                                           tail_config=default_tail_config(alphas=(0.5, 0.5)), grid=(17, 17))
        assert result.curve.passed
        assert result.grid_points == (17, 17)


class TestSecondMoment:
    """Test the Paley-Zygmund and tightness diagnostics."""

    def test_paley_zygmund(self):
        """(1 - theta)^2 m^2 / m2."""
        assert paley_zygmund(1.0, 2.0, 0.5) == pytest.approx(0.125)
        with pytest.raises(DomainError):
            paley_zygmund(2.0, 1.0, 0.5)

    def test_paley_zygmund_holds_on_samples(self):
        """The empirical probability respects the lower bound."""
        samples = np.random.default_rng(1).exponential(size=10000)
        check = paley_zygmund_check(samples, 0.5)
        assert check["holds"]
        assert check["empirical_prob"] == pytest.approx(np.exp(-0.5), abs=0.03)

    def test_tightness_brownian_motion(self):
        """Gaussian increments: bounded second moment and a ratio near 3."""
        report = tightness_diagnostic(ModelSpec.fbm(0.5, seed=2), 0.1, n_paths=1000, grid=129)
        assert report.premise_holds
        assert report.second_moment_bounded
        assert report.f2_slope == pytest.approx(0.2, abs=0.05)
        assert report.rows[0].ratio == pytest.approx(3.0, abs=0.2)

    def test_tightness_claimed_alpha_too_large(self):
        """Claiming alpha = 0.9 for fBm(0.3) blows up the second moment."""
        report = tightness_diagnostic(ModelSpec.fbm(0.3, seed=2), 0.1, alpha=0.9, n_paths=1000, grid=129)
        assert not report.second_moment_bounded

    def test_tightness_degenerate(self):
        """A constant path gives a degenerate report."""
        report = tightness_diagnostic(ModelSpec.deterministic("zero"), 0.1, alpha=0.5, n_paths=1000, grid=33)
        assert report.degenerate
        assert report.premise_holds
