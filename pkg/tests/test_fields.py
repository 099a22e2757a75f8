"""
Tests for rectangular increments and the multiparameter GRR engine.
"""
import os
import sys

import numpy as np
import pytest

# Add the parent directory to the path to import from analysis
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from analysis.fields import (FieldGrrConfig, analyze_field, box_increment, box_increment_operator,
                             c_tilde, c_tilde_closed_form, c_tilde_grid_search, compute_B_field_detail,
                             estimate_d_metric, field_limsup_ratio, field_sobolev_bound,
                             subsample_field, verify_field_modulus)
from analysis.grr import beta_window
from errors import DomainError
from models.base_model import ModelSpec, SampleField, uniform_grid
from models.model_manager import get_model_manager


@pytest.fixture
def sheet_spec():
    return ModelSpec.fbm_sheet(0.5, 0.5, seed=11)


class TestBoxIncrement:
    """Test the corner sum against the operator form."""

    @pytest.mark.parametrize("sizes", [(9, 9), (5, 7, 6)])
    def test_operator_matches_corner_sum(self, sizes):
        """prod (I - V_k) f (t) equals the alternating corner sum."""
        rng = np.random.default_rng(42)
        field = SampleField.on_uniform_grid(rng.standard_normal(sizes))
        for _ in range(25):
            s = [rng.choice(axis) for axis in field.axes]
            t = [rng.choice(axis) for axis in field.axes]
            assert box_increment(field, s, t) == pytest.approx(box_increment_operator(field, s, t), abs=1e-12)

    def test_product_function(self):
        """f(x, y) = xy has box increment (t1 - s1)(t2 - s2)."""
        field = SampleField.from_function(lambda x, y: x * y, (9, 9))
        assert box_increment(field, (0.25, 0.5), (0.75, 1.0)) == pytest.approx(0.25, abs=1e-12)

    def test_degenerate_box(self):
        """A box with a zero side has zero increment."""
        field = SampleField.on_uniform_grid(np.random.default_rng(0).standard_normal((5, 5)))
        assert box_increment(field, (0.5, 0.0), (0.5, 1.0)) == pytest.approx(0.0, abs=1e-15)

    def test_off_grid_point(self):
        """Points must be grid nodes."""
        field = SampleField.on_uniform_grid(np.zeros((5, 5)))
        with pytest.raises(DomainError):
            box_increment(field, (0.1, 0.0), (1.0, 1.0))


class TestFieldB:
    """Test the field integral B."""

    def test_product_function(self):
        """f(x, y) = xy with alpha = (1, 1): B = e^beta (1 - w) + w."""
        field = SampleField.from_function(lambda x, y: x * y, (17, 17))
        B, weight = compute_B_field_detail(field, (1.0, 1.0), 0.4, 1.0)
        assert weight == pytest.approx(1.0 - (15.0 / 16.0) ** 2)
        assert B == pytest.approx(np.exp(0.4) * (1.0 - weight) + weight, rel=1e-9)

    def test_zero_field(self):
        """A zero field gives B = 1."""
        field = SampleField.on_uniform_grid(np.zeros((9, 9)))
        result = analyze_field(field, FieldGrrConfig(beta=0.5, iota=0.5, alphas=(0.5, 0.5)))
        assert result.B == pytest.approx(1.0)
        assert result.alpha == (0.5, 0.5)

    def test_exponent_count(self):
        """One exponent per axis."""
        field = SampleField.on_uniform_grid(np.zeros((9, 9)))
        with pytest.raises(DomainError):
            compute_B_field_detail(field, (0.5,), 0.5, 0.5)

    def test_subsample_keeps_endpoints(self):
        """Subsampling keeps both ends of each axis."""
        field = SampleField.from_function(lambda x, y: x + y, (65, 33))
        small = subsample_field(field, 17)
        assert small.grid_sizes == (17, 17)
        assert np.allclose(small.axes[0], uniform_grid(17))
        assert small.values[-1, -1] == pytest.approx(2.0)


class TestFieldModulus:
    """Test the pathwise field bounds on Brownian sheets."""

    def test_sheets_dominated(self, sheet_spec):
        """50 Brownian sheets on a 33 x 33 grid respect their modulus bound."""
        model = get_model_manager().create_model(sheet_spec)
        c0, iota = model.hyper_witness()
        alphas = model.holder_exponents()
        grr_config = FieldGrrConfig(beta=0.5 * beta_window(c0, iota), iota=iota, alphas=alphas, C0=c0)
        for field in get_model_manager().sample_batch(sheet_spec, (33, 33), 50):
            result = analyze_field(field, grr_config)
            report = verify_field_modulus(field, result, alphas, iota)
            assert report.violations == 0
            assert report.n_pairs > 0

    def test_sobolev_bound(self, sheet_spec):
        """The multiparameter Sobolev bound holds on a sheet."""
        field = get_model_manager().sample(sheet_spec, (33, 33))
        result = field_sobolev_bound(field, (0.5, 0.5), 0.2)
        assert result.gammas == pytest.approx((0.4, 0.4))
        assert result.report.violations == 0

    def test_limsup_ratio_finite(self, sheet_spec):
        """The small-box ratio is finite and positive."""
        field = get_model_manager().sample(sheet_spec, (33, 33))
        ratio = field_limsup_ratio(field, (0.5, 0.5), 0.5)
        assert 0.0 < ratio < np.inf


class TestCTilde:
    """Test the small-scale constant C_tilde."""

    @pytest.mark.parametrize("alphas,iota", [((0.5, 0.8), 0.5), ((0.3, 0.3), 1.0), ((1.0, 0.6), 2.0)])
    def test_matches_grid_search(self, alphas, iota):
        """Reduced search and brute-force tensor search agree."""
        assert c_tilde(alphas, iota, 1.0) == pytest.approx(c_tilde_grid_search(alphas, iota, 1.0), rel=1e-6)

    def test_one_dimension(self):
        """n = 1: e^-iota (iota / alpha)^iota."""
        assert c_tilde((0.4,), 0.5, 1.0) == pytest.approx(np.exp(-0.5) * (0.5 / 0.4) ** 0.5, rel=1e-8)
        assert c_tilde((0.4, 0.9), 0.5, 3.0) == pytest.approx(c_tilde_closed_form((0.4, 0.9), 0.5, 3.0),
                                                              rel=1e-8)

    def test_domain(self):
        """alpha outside (0, 1] is refused."""
        with pytest.raises(DomainError):
            c_tilde((0.0, 0.5), 0.5, 1.0)


class TestDMetric:
    """Test the Monte Carlo d_X estimate."""

    def test_brownian_sheet(self, sheet_spec):
        """d_X = sqrt(area) for the Brownian sheet, within 4 standard errors."""
        n_paths = 1000
        estimate = estimate_d_metric(sheet_spec, (0.25, 0.25), (0.75, 1.0), n_paths, grid=(17, 17))
        expected = np.sqrt(0.375)
        standard_error = expected * 0.5 * np.sqrt(2.0 / n_paths)
        assert abs(estimate - expected) <= 4 * standard_error

    def test_needs_paths(self, sheet_spec):
        """Fewer than 1000 paths is refused."""
        with pytest.raises(DomainError):
            estimate_d_metric(sheet_spec, (0.0, 0.0), (1.0, 1.0), 100)
