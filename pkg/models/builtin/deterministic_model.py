"""
Deterministic Model Plugin

Analytic one-parameter paths used as fixtures: the zero process, the
constant-one factor, f(t) = t and f(t) = sqrt(t).
"""
import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..base_model import BaseProcessModel, ProcessModelPlugin, SamplePath, Grid

logger = logging.getLogger(__name__)

# Plugin metadata
PLUGIN_METADATA = {
    "name": "Deterministic path",
    "kind": "deterministic",
    "version": "1.0.0",
    "author": "hyperlab",
    "description": "Seed-independent analytic paths: zero, one, linear, sqrt",
    "dims": 1,
    "category": "fixture",
    "supported_features": ["analytic"]
}

SHAPES: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "zero": np.zeros_like,
    "one": np.ones_like,
    "linear": lambda t: np.array(t, dtype=float),
    "sqrt": np.sqrt,
}

HOLDER_EXPONENTS = {"zero": 1.0, "one": 1.0, "linear": 1.0, "sqrt": 0.5}


class DeterministicModel(BaseProcessModel):
    """Seed-independent path f(t)."""

    @property
    def model_name(self) -> str:
        return "deterministic"

    @property
    def dims(self) -> int:
        return 1

    def _spec_issues(self) -> List[str]:
        if self.spec.shape not in SHAPES:
            return [f"unknown shape {self.spec.shape!r}, expected one of {sorted(SHAPES)}"]
        return []

    def sample(self, grid: Grid, seed: Optional[int] = None) -> SamplePath:
        (n_points,) = self.normalize_grid(grid)
        return SamplePath.from_function(SHAPES[self.spec.shape], n_points)

    def hyper_witness(self) -> Tuple[float, float]:
        # |increment| is deterministic, so every moment ratio equals 1
        return 1.0, 0.5

    def holder_exponents(self) -> Tuple[float, ...]:
        return (HOLDER_EXPONENTS[self.spec.shape],)


DeterministicPlugin = ProcessModelPlugin(model_class=DeterministicModel, metadata=PLUGIN_METADATA)
