"""
Fractional Brownian Sheet Model Plugin

Two-parameter Gaussian field whose covariance is the product of per-axis
fBm covariances.
"""
import logging
from typing import List, Optional, Tuple

from config import config
from errors import DomainError
from ..base_model import BaseProcessModel, ProcessModelPlugin, SampleField, Grid
from ..sampling import fbm_covariance, sample_fbm_sheet

logger = logging.getLogger(__name__)

# Plugin metadata
PLUGIN_METADATA = {
    "name": "Fractional Brownian sheet",
    "kind": "sheet",
    "version": "1.0.0",
    "author": "hyperlab",
    "description": "Gaussian field on [0,1]^2 with product fBm covariance, zero on the axes",
    "dims": 2,
    "category": "gaussian",
    "supported_features": ["kronecker_cholesky", "rectangular_increments"]
}


class FBmSheetModel(BaseProcessModel):
    """fBm sheet with per-axis Hurst parameters (H1, H2)."""

    @property
    def model_name(self) -> str:
        return "sheet"

    @property
    def dims(self) -> int:
        return 2

    def _spec_issues(self) -> List[str]:
        issues = []
        if len(self.spec.hurst) != 2:
            issues.append(f"sheet needs two Hurst parameters, got {len(self.spec.hurst)}")
        for k, hurst in enumerate(self.spec.hurst, start=1):
            if not (0.0 < hurst < 1.0):
                issues.append(f"Hurst parameter H{k} must lie in (0, 1), got {hurst}")
        return issues

    def sample(self, grid: Grid, seed: Optional[int] = None) -> SampleField:
        n1, n2 = self.normalize_grid(grid)
        cap = config.max_field_points_per_axis
        if n1 > cap or n2 > cap:
            raise DomainError(f"Sheet grid {n1}x{n2} exceeds {cap} points per axis")
        h1, h2 = self.spec.hurst
        return sample_fbm_sheet(n1, n2, h1, h2, self._seed(seed))

    def covariance(self, s: Tuple[float, float], t: Tuple[float, float]) -> float:
        h1, h2 = self.spec.hurst
        return fbm_covariance(s[0], t[0], h1) * fbm_covariance(s[1], t[1], h2)

    def hyper_witness(self) -> Tuple[float, float]:
        return 2.0, 0.5

    def holder_exponents(self) -> Tuple[float, ...]:
        return tuple(self.spec.hurst)


FBmSheetPlugin = ProcessModelPlugin(model_class=FBmSheetModel, metadata=PLUGIN_METADATA)
