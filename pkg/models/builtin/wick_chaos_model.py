"""
Wick Chaos Model Plugin

Wick powers t^{nH} He_n(X_t / t^H) of an fBm path; each value lies in the
n-th Wiener chaos of the generating Gaussian family.
"""
import logging
from typing import List, Optional, Tuple

from ..base_model import BaseProcessModel, ProcessModelPlugin, SamplePath, Grid
from ..sampling import sample_wick_chaos

logger = logging.getLogger(__name__)

# Plugin metadata
PLUGIN_METADATA = {
    "name": "Wick chaos",
    "kind": "wick",
    "version": "1.0.0",
    "author": "hyperlab",
    "description": "Wick power of order n of fractional Brownian motion",
    "dims": 1,
    "category": "chaos",
    "supported_features": ["exact_cholesky", "hermite_recurrence"]
}


class WickChaosModel(BaseProcessModel):
    """Wick power of order n >= 1 built on fBm(H)."""

    @property
    def model_name(self) -> str:
        return "wick"

    @property
    def dims(self) -> int:
        return 1

    @property
    def hurst(self) -> float:
        return self.spec.hurst[0]

    @property
    def order(self) -> int:
        return int(self.spec.order)

    def _spec_issues(self) -> List[str]:
        issues = []
        if len(self.spec.hurst) != 1:
            issues.append(f"wick needs exactly one Hurst parameter, got {len(self.spec.hurst)}")
        elif not (0.0 < self.hurst < 1.0):
            issues.append(f"Hurst parameter must lie in (0, 1), got {self.hurst}")
        if self.order < 1:
            issues.append(f"chaos order must be at least 1, got {self.spec.order}")
        return issues

    def sample(self, grid: Grid, seed: Optional[int] = None) -> SamplePath:
        (n_points,) = self.normalize_grid(grid)
        return sample_wick_chaos(n_points, self.order, self.hurst, self._seed(seed))

    def hyper_witness(self) -> Tuple[float, float]:
        # ||F||_p <= (p - 1)^(n/2) ||F||_2 in chaos n
        return 1.0, self.order / 2.0

    def holder_exponents(self) -> Tuple[float, ...]:
        return (self.hurst,)


WickChaosPlugin = ProcessModelPlugin(model_class=WickChaosModel, metadata=PLUGIN_METADATA)
