"""
Tests for the hyperlab model system

Covers the exact-covariance samplers, the model specification, the built-in
model plugins, the registry and the model manager including custom model files.
"""
import os
import sys
import textwrap

import numpy as np
import pytest
from scipy import stats

# Add the parent directory to the path to import from models
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import DomainError, ModelLoadError, NumericalError
from models.base_model import ModelSpec, SampleField, SamplePath, uniform_grid
from models.model_manager import ModelManager, get_model_manager, sample_product
from models.registry import ModelRegistry
from models.builtin import FBmPlugin
from models.sampling import (fbm_covariance, fbm_covariance_matrix, hermite, sample_fbm, sample_fbm_sheet,
                             sample_wick_chaos, scaled_hermite)
from analysis.moments import HyperParams, combine_linear_params, combine_product_params
from montecarlo import derive_seed


@pytest.fixture
def manager():
    """Fresh manager with the built-in models only."""
    return ModelManager()


class TestFbmCovariance:
    """Test the fBm covariance function."""

    def test_unit_variance_at_one(self):
        """Variance at t = 1 is 1."""
        assert fbm_covariance(1.0, 1.0, 0.5) == pytest.approx(1.0)

    def test_brownian_case_is_min(self):
        """H = 1/2 gives min(s, t)."""
        assert fbm_covariance(0.5, 1.0, 0.5) == pytest.approx(0.5)

    def test_diagonal_and_symmetry(self):
        """Cov(t, t) = t^2H and the covariance is symmetric."""
        rng = np.random.default_rng(3)
        for _ in range(20):
            s, t, h = rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0.05, 0.95)
            assert fbm_covariance(t, t, h) == pytest.approx(t ** (2 * h))
            assert fbm_covariance(s, t, h) == pytest.approx(fbm_covariance(t, s, h))

    def test_domain_errors(self):
        """Hurst outside (0, 1) and times outside [0, 1] are rejected."""
        with pytest.raises(DomainError):
            fbm_covariance(0.5, 0.5, 1.0)
        with pytest.raises(DomainError):
            fbm_covariance(-0.1, 0.5, 0.5)


class TestSampleFbm:
    """Test the Cholesky fBm sampler."""

    def test_deterministic_in_seed(self):
        """Same (n_points, H, seed) gives bitwise-identical paths."""
        first = sample_fbm(65, 0.3, 42)
        second = sample_fbm(65, 0.3, 42)
        assert np.array_equal(first.values, second.values)
        assert first.values[0] == 0.0

    def test_variance_at_one(self):
        """E X_1^2 = 1 within 4 standard errors."""
        squares = np.array([sample_fbm(3, 0.7, derive_seed(1, i)).values[-1] ** 2 for i in range(10000)])
        se = np.std(squares) / np.sqrt(squares.size)
        assert abs(squares.mean() - 1.0) <= 4 * se

    def test_brownian_increments_uncorrelated(self):
        """Disjoint Brownian increments have zero correlation."""
        pairs = np.array([np.diff(sample_fbm(5, 0.5, derive_seed(2, i)).values)[[0, 2]] for i in range(10000)])
        products = pairs[:, 0] * pairs[:, 1]
        se = np.std(products) / np.sqrt(products.size)
        assert abs(products.mean()) <= 4 * se

    def test_path_cap(self):
        """Paths above MAX_PATH_POINTS are refused."""
        with pytest.raises(DomainError):
            sample_fbm(100000, 0.5, 0)

    def test_marginal_is_gaussian(self):
        """X_(1/2) / (1/2)^H passes a Kolmogorov-Smirnov test against N(0, 1)."""
        scale = 0.5 ** 0.3
        values = np.array([sample_fbm(9, 0.3, derive_seed(3, i)).values[4] / scale for i in range(4000)])
        assert stats.kstest(values, "norm").pvalue > 1e-3

    def test_sample_covariance_on_nine_points(self):
        """The sample covariance matches fbm_covariance entrywise within 4 standard errors."""
        paths = np.array([sample_fbm(9, 0.7, derive_seed(4, i)).values for i in range(10000)])
        products = paths[:, :, None] * paths[:, None, :]
        se = products.std(axis=0) / np.sqrt(paths.shape[0])
        expected = fbm_covariance_matrix(uniform_grid(9), 0.7)
        inner = slice(1, None)
        assert np.all(np.abs(products.mean(axis=0) - expected)[inner, inner] <= 4 * se[inner, inner])


class TestHermite:
    """Test the Hermite recurrence."""

    def test_known_values(self):
        """He_0 = 1, He_2(1) = 0, He_3(2) = 2."""
        assert hermite(0, 3.7) == 1.0
        assert hermite(2, 1.0) == pytest.approx(0.0)
        assert hermite(3, 2.0) == pytest.approx(2.0)

    def test_zero_variance_gives_power(self):
        """v^(n/2) He_n(x / sqrt v) at v = 0 is x^n."""
        assert scaled_hermite(4, 1.5, 0.0) == pytest.approx(1.5 ** 4)

    def test_errors(self):
        """Negative order and overflow are reported."""
        with pytest.raises(DomainError):
            hermite(-1, 0.0)
        with pytest.raises(NumericalError):
            hermite(400, 1e200)


class TestWickChaos:
    """Test the Wick power sampler."""

    def test_order_one_is_fbm(self):
        """Order 1 returns the underlying fBm path."""
        assert np.array_equal(sample_wick_chaos(33, 1, 0.5, 7).values, sample_fbm(33, 0.5, 7).values)

    def test_order_two_formula(self):
        """Order 2 is X_t^2 - t^2H with Y_0 = 0."""
        base = sample_fbm(33, 0.4, 9)
        wick = sample_wick_chaos(33, 2, 0.4, 9)
        expected = base.values ** 2 - base.grid_points ** 0.8
        assert wick.values[0] == 0.0
        assert np.allclose(wick.values[1:], expected[1:])

    def test_order_two_moments(self):
        """He_2 at t = 1: E Y_1 = 0 and E Y_1^2 = 2 within 4 standard errors."""
        ends = np.array([sample_wick_chaos(3, 2, 0.5, derive_seed(6, i)).values[-1] for i in range(10000)])
        assert abs(ends.mean()) <= 4 * ends.std() / np.sqrt(ends.size)
        squares = ends ** 2
        assert abs(squares.mean() - 2.0) <= 4 * squares.std() / np.sqrt(squares.size)


class TestFbmSheet:
    """Test the Brownian sheet sampler."""

    def test_vanishes_on_axes(self):
        """Values are zero on both coordinate axes."""
        field = sample_fbm_sheet(9, 9, 0.5, 0.5, 11)
        assert np.all(field.values[0, :] == 0.0)
        assert np.all(field.values[:, 0] == 0.0)

    def test_unit_variance_at_corner(self):
        """E X_(1,1)^2 = 1 within 4 standard errors."""
        squares = np.array([sample_fbm_sheet(3, 3, 0.5, 0.5, derive_seed(5, i)).values[-1, -1] ** 2
                            for i in range(5000)])
        se = np.std(squares) / np.sqrt(squares.size)
        assert abs(squares.mean() - 1.0) <= 4 * se


class TestSampleContainers:
    """Test SamplePath, SampleField and ModelSpec."""

    def test_path_validation(self):
        """Non-uniform grids and non-finite values are rejected."""
        with pytest.raises(DomainError):
            SamplePath(np.array([0.0, 0.3, 1.0]), np.zeros(3))
        with pytest.raises(DomainError):
            SamplePath(uniform_grid(3), np.array([0.0, np.nan, 1.0]))

    def test_field_from_flat_is_row_major(self):
        """from_flat reshapes in row-major order."""
        field = SampleField.from_flat((2, 3), range(6))
        assert field.values[1, 0] == 3.0
        assert np.array_equal(field.flat_values, np.arange(6.0))

    def test_spec_seed_range(self):
        """Seeds must be 64-bit unsigned."""
        with pytest.raises(DomainError):
            ModelSpec.fbm(0.5, seed=2 ** 64)

    def test_describe(self):
        """Labels are stable."""
        spec = ModelSpec.product(ModelSpec.fbm(0.5), ModelSpec.wick_chaos(2, 0.3))
        assert spec.describe() == "product(fbm(H=0.5), wick(order=2, H=0.3))"


class TestModelRegistry:
    """Test the thread-safe registry."""

    def test_register_and_duplicate(self):
        """A kind registers once."""
        registry = ModelRegistry()
        assert registry.register_model("fbm", FBmPlugin)
        assert not registry.register_model("fbm", FBmPlugin)
        assert registry.is_registered("fbm")
        assert registry.count() == 1


class TestModelManager:
    """Test model creation and custom model loading."""

    def test_builtins_registered(self, manager):
        """Every built-in kind is available."""
        kinds = manager.get_registry().get_model_kinds()
        assert kinds == sorted(["combination", "deterministic", "fbm", "product", "sheet", "wick"])

    def test_unknown_kind(self, manager):
        """An unknown kind is a domain error."""
        with pytest.raises(DomainError):
            manager.create_model(ModelSpec(kind="ou"))

    def test_invalid_specs(self, manager):
        """Specification problems are caught at creation."""
        with pytest.raises(DomainError):
            manager.create_model(ModelSpec.fbm(1.2))
        with pytest.raises(DomainError):
            manager.create_model(ModelSpec.wick_chaos(0, 0.5))
        with pytest.raises(DomainError):
            manager.create_model(ModelSpec.product(ModelSpec.fbm(0.5), ModelSpec.fbm_sheet(0.5, 0.5)))
        with pytest.raises(DomainError):
            manager.create_model(ModelSpec.combination([1.0], [ModelSpec.fbm(0.5), ModelSpec.fbm(0.3)]))

    def test_witnesses(self, manager):
        """Hyper witnesses follow the combination rules."""
        assert manager.create_model(ModelSpec.fbm(0.3)).hyper_witness() == (2.0, 0.5)
        assert manager.create_model(ModelSpec.wick_chaos(3, 0.3)).hyper_witness() == (1.0, 1.5)
        product = manager.create_model(ModelSpec.product(ModelSpec.fbm(0.5), ModelSpec.wick_chaos(2, 0.5)))
        expected = combine_product_params(HyperParams(2.0, 0.5), HyperParams(1.0, 1.0))
        assert product.hyper_witness() == pytest.approx((expected.C0, expected.iota))
        combination = manager.create_model(
            ModelSpec.combination([1.0, 0.0, -2.0], [ModelSpec.fbm(0.3), ModelSpec.fbm(0.9), ModelSpec.fbm(0.6)]))
        expected = combine_linear_params([1.0, 0.0, -2.0], [HyperParams(2.0, 0.5)] * 3)
        assert combination.hyper_witness() == pytest.approx((expected.C0, expected.iota))
        assert combination.holder_exponents() == (0.3,)

    def test_product_seed_splitting(self, manager):
        """Factor k of a product uses derive_seed(seed, k + 1)."""
        path = sample_product(ModelSpec.fbm(0.5), ModelSpec.fbm(0.7), 17, seed=99)
        first = sample_fbm(17, 0.5, derive_seed(99, 1))
        second = sample_fbm(17, 0.7, derive_seed(99, 2))
        assert np.array_equal(path.values, first.values * second.values)

    def test_product_with_constant_factor(self, manager):
        """X times the constant-one path is X itself."""
        spec = ModelSpec.product(ModelSpec.fbm(0.5), ModelSpec.deterministic("one"), seed=4)
        path = manager.sample(spec, 33)
        assert np.array_equal(path.values, sample_fbm(33, 0.5, derive_seed(4, 1)).values)

    def test_sample_batch_independent_of_workers(self, manager):
        """Batches are ordered by path index whatever the worker count."""
        spec = ModelSpec.fbm(0.5, seed=12)
        serial = manager.sample_batch(spec, 33, 8, workers=1)
        threaded = manager.sample_batch(spec, 33, 8, workers=4)
        for a, b in zip(serial, threaded):
            assert np.array_equal(a.values, b.values)
        assert np.array_equal(serial[3].values, sample_fbm(33, 0.5, derive_seed(12, 3)).values)

    def test_deterministic_shapes(self, manager):
        """Deterministic paths ignore the seed."""
        model = manager.create_model(ModelSpec.deterministic("sqrt"))
        path = model.sample(5, seed=1)
        assert np.allclose(path.values, np.sqrt(uniform_grid(5)))
        assert np.array_equal(path.values, model.sample(5, seed=2).values)
        assert model.holder_exponents() == (0.5,)

    def test_product_unit_second_moment(self, manager):
        """Independent unit-variance factors give E Z_1^2 = 1 within 4 standard errors."""
        spec = ModelSpec.product(ModelSpec.fbm(0.5), ModelSpec.fbm(0.7), seed=13)
        squares = np.array([path.values[-1] ** 2 for path in manager.sample_batch(spec, 3, 10000)])
        assert abs(squares.mean() - 1.0) <= 4 * squares.std() / np.sqrt(squares.size)

    def test_sheet_grid_cap(self, manager):
        """Sheet grids above MAX_FIELD_POINTS_PER_AXIS are refused by the model."""
        with pytest.raises(DomainError, match="points per axis"):
            manager.sample(ModelSpec.fbm_sheet(0.5, 0.5), 1000)

    def test_sheet_grid_normalisation(self, manager):
        """A single grid size applies to both axes."""
        field = manager.sample(ModelSpec.fbm_sheet(0.5, 0.5, seed=1), 9)
        assert field.grid_sizes == (9, 9)

    def test_load_custom_model(self, tmp_path):
        """A model file in the custom directory is discovered and loaded."""
        source = textwrap.dedent('''
            from typing import Optional, Tuple
            from models.base_model import BaseProcessModel, SamplePath

            PLUGIN_METADATA = {"kind": "ramp", "version": "0.1.0", "dims": 1,
                               "description": "2t"}


            class RampModel(BaseProcessModel):
                @property
                def model_name(self) -> str:
                    return "ramp"

                @property
                def dims(self) -> int:
                    return 1

                def sample(self, grid, seed: Optional[int] = None) -> SamplePath:
                    (n,) = self.normalize_grid(grid)
                    return SamplePath.from_function(lambda t: 2 * t, n)

                def hyper_witness(self) -> Tuple[float, float]:
                    return 1.0, 0.5

                def holder_exponents(self) -> Tuple[float, ...]:
                    return (1.0,)
        ''')
        (tmp_path / "ramp_model.py").write_text(source)
        manager = ModelManager(model_directory=str(tmp_path))
        assert manager.discover_models()[0]["has_plugin_metadata"]
        assert manager.load_custom_models() == ["ramp"]
        path = manager.sample(ModelSpec(kind="ramp"), 3)
        assert np.allclose(path.values, [0.0, 1.0, 2.0])
        with pytest.raises(ModelLoadError):
            manager.load_model_file(str(tmp_path / "ramp_model.py"))
        assert manager.get_manager_info()["custom_models"] == ["ramp"]

    def test_incomplete_custom_model(self, tmp_path):
        """A model class with abstract members left is rejected."""
        source = textwrap.dedent('''
            from models.base_model import BaseProcessModel

            class Broken(BaseProcessModel):
                @property
                def model_name(self):
                    return "broken"
        ''')
        path = tmp_path / "broken.py"
        path.write_text(source)
        with pytest.raises(ModelLoadError):
            ModelManager(model_directory=str(tmp_path)).load_model_file(str(path))

    def test_global_manager_is_shared(self):
        """get_model_manager returns one instance."""
        assert get_model_manager() is get_model_manager()
