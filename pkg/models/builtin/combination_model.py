"""
Linear Combination Model Plugin

Finite weighted sum of independent one-parameter processes.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from analysis.moments import HyperParams, combine_linear_params
from errors import DomainError
from montecarlo import derive_seed
from ..base_model import BaseProcessModel, ProcessModelPlugin, SamplePath, Grid

logger = logging.getLogger(__name__)

# Plugin metadata
PLUGIN_METADATA = {
    "name": "Linear combination",
    "kind": "combination",
    "version": "1.0.0",
    "author": "hyperlab",
    "description": "Weighted sum of independent processes, e.g. fBm plus a Wick power",
    "dims": 1,
    "category": "composite",
    "supported_features": ["seed_splitting", "parameter_combination"]
}


class LinearCombinationModel(BaseProcessModel):
    """Sum of w_k X^(k) with factor k sampled from derive_seed(seed, k + 1)."""

    def __init__(self, spec, factory=None):
        super().__init__(spec, factory)
        self._factors: Optional[List[BaseProcessModel]] = None

    @property
    def model_name(self) -> str:
        return "combination"

    @property
    def dims(self) -> int:
        return 1

    @property
    def factors(self) -> List[BaseProcessModel]:
        if self._factors is None:
            self._factors = [self.build(factor) for factor in self.spec.factors]
        return self._factors

    def _spec_issues(self) -> List[str]:
        issues = []
        if not self.spec.factors:
            issues.append("combination needs at least one factor")
        if len(self.spec.weights) != len(self.spec.factors):
            issues.append(f"got {len(self.spec.weights)} weights for {len(self.spec.factors)} factors")
        if self.spec.weights and all(w == 0.0 for w in self.spec.weights):
            issues.append("at least one weight must be nonzero")
        if any(not np.isfinite(w) for w in self.spec.weights):
            issues.append("weights must be finite")
        if issues:
            return issues
        try:
            for factor in self.factors:
                if factor.dims != 1:
                    issues.append(f"combination factors must be processes, got {factor.model_name}")
        except DomainError as e:
            issues.append(f"invalid factor: {e}")
        return issues

    def sample(self, grid: Grid, seed: Optional[int] = None) -> SamplePath:
        (n_points,) = self.normalize_grid(grid)
        master = self._seed(seed)
        total = np.zeros(n_points)
        grid_points = None
        for k, (weight, factor) in enumerate(zip(self.spec.weights, self.factors)):
            path = factor.sample(n_points, derive_seed(master, k + 1))
            grid_points = path.grid_points
            if weight != 0.0:
                total = total + weight * path.values
        return SamplePath(grid_points, total)

    def hyper_witness(self) -> Tuple[float, float]:
        params = [HyperParams(*factor.hyper_witness()) for factor in self.factors]
        combined = combine_linear_params(self.spec.weights, params)
        return combined.C0, combined.iota

    def holder_exponents(self) -> Tuple[float, ...]:
        return (min(factor.holder_exponents()[0]
                    for weight, factor in zip(self.spec.weights, self.factors) if weight != 0.0),)


LinearCombinationPlugin = ProcessModelPlugin(model_class=LinearCombinationModel, metadata=PLUGIN_METADATA)
