"""
Product Model Plugin

Pointwise product Z_t = X_t Y_t of two independently sampled processes.
"""
import logging
from typing import List, Optional, Tuple

from analysis.moments import HyperParams, combine_product_params
from errors import DomainError
from montecarlo import derive_seed
from ..base_model import BaseProcessModel, ProcessModelPlugin, SamplePath, Grid

logger = logging.getLogger(__name__)

# Plugin metadata
PLUGIN_METADATA = {
    "name": "Independent product",
    "kind": "product",
    "version": "1.0.0",
    "author": "hyperlab",
    "description": "Pointwise product of two independent one-parameter processes",
    "dims": 1,
    "category": "composite",
    "supported_features": ["seed_splitting", "parameter_combination"]
}


class ProductModel(BaseProcessModel):
    """
    Product of two independent factors.

    Factor k (k = 0, 1) is sampled with seed derive_seed(seed, k + 1).
    """

    def __init__(self, spec, factory=None):
        super().__init__(spec, factory)
        self._factors: Optional[List[BaseProcessModel]] = None

    @property
    def model_name(self) -> str:
        return "product"

    @property
    def dims(self) -> int:
        return 1

    @property
    def factors(self) -> List[BaseProcessModel]:
        if self._factors is None:
            self._factors = [self.build(factor) for factor in self.spec.factors]
        return self._factors

    def _spec_issues(self) -> List[str]:
        if len(self.spec.factors) != 2:
            return [f"product needs exactly two factors, got {len(self.spec.factors)}"]
        issues = []
        try:
            for factor in self.factors:
                if factor.dims != 1:
                    issues.append(f"product factors must be processes, got {factor.model_name} "
                                  f"with {factor.dims} dims")
        except DomainError as e:
            issues.append(f"invalid factor: {e}")
        return issues

    def sample(self, grid: Grid, seed: Optional[int] = None) -> SamplePath:
        (n_points,) = self.normalize_grid(grid)
        master = self._seed(seed)
        first, second = (factor.sample(n_points, derive_seed(master, k + 1))
                         for k, factor in enumerate(self.factors))
        return SamplePath(first.grid_points, first.values * second.values)

    def hyper_witness(self) -> Tuple[float, float]:
        first, second = (HyperParams(*factor.hyper_witness()) for factor in self.factors)
        combined = combine_product_params(first, second)
        return combined.C0, combined.iota

    def holder_exponents(self) -> Tuple[float, ...]:
        return (min(factor.holder_exponents()[0] for factor in self.factors),)


ProductPlugin = ProcessModelPlugin(model_class=ProductModel, metadata=PLUGIN_METADATA)
