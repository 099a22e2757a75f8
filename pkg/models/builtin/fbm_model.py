"""
Fractional Brownian Motion Model Plugin

Gaussian reference model sampled by exact Cholesky factorization.
"""
import logging
from typing import List, Optional, Tuple

from ..base_model import BaseProcessModel, ProcessModelPlugin, SamplePath, Grid
from ..sampling import fbm_covariance, sample_fbm

logger = logging.getLogger(__name__)

# Plugin metadata
PLUGIN_METADATA = {
    "name": "Fractional Brownian motion",
    "kind": "fbm",
    "version": "1.0.0",
    "author": "hyperlab",
    "description": "Centered Gaussian process with covariance 1/2(t^2H + s^2H - |t-s|^2H)",
    "dims": 1,
    "category": "gaussian",
    "supported_features": ["exact_cholesky", "analytic_covariance"]
}


class FBmModel(BaseProcessModel):
    """fBm with Hurst parameter H in (0, 1)."""

    @property
    def model_name(self) -> str:
        return "fbm"

    @property
    def dims(self) -> int:
        return 1

    @property
    def hurst(self) -> float:
        return self.spec.hurst[0]

    def _spec_issues(self) -> List[str]:
        issues = []
        if len(self.spec.hurst) != 1:
            issues.append(f"fbm needs exactly one Hurst parameter, got {len(self.spec.hurst)}")
        elif not (0.0 < self.hurst < 1.0):
            issues.append(f"Hurst parameter must lie in (0, 1), got {self.hurst}")
        return issues

    def sample(self, grid: Grid, seed: Optional[int] = None) -> SamplePath:
        (n_points,) = self.normalize_grid(grid)
        return sample_fbm(n_points, self.hurst, self._seed(seed))

    def covariance(self, s: float, t: float) -> float:
        return fbm_covariance(s, t, self.hurst)

    def hyper_witness(self) -> Tuple[float, float]:
        # E|Z|^p <= 2^p p^(p/2) for every p >= 1
        return 2.0, 0.5

    def holder_exponents(self) -> Tuple[float, ...]:
        return (self.hurst,)


FBmPlugin = ProcessModelPlugin(model_class=FBmModel, metadata=PLUGIN_METADATA)
