"""
Run configuration for the hyperlab command line.

A RunConfig holds every parameter of one run. It is validated before any
simulation starts, and its resolved form is what a run manifest records.
"""
import logging
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import config

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("simulate", "moments", "grr", "field", "tail", "holder")
MODEL_KINDS = ("fbm", "wick", "product", "sheet", "deterministic", "combination")
MONTE_CARLO_SUBCOMMANDS = ("tail", "holder")
MIN_MONTE_CARLO_PATHS = 1000
FIELD_KINDS = ("sheet",)

DEFAULT_GRID = {
    "simulate": 1025, "moments": 65, "grr": 1025, "field": 33, "tail": 257, "holder": 1025,
}
DEFAULT_FIELD_GRID = {"simulate": 33, "tail": 33, "holder": 33, "field": 33}
DEFAULT_PATHS = {
    "simulate": 1, "moments": 1000, "grr": 100, "field": 50, "tail": 10000, "holder": 1000,
}
DEFAULT_FIELD_TAIL_PATHS = 1000


def _split(value: Any) -> Any:
    """Key-value files carry lists as comma-joined strings."""
    if isinstance(value, str):
        value = value.strip()
        return [item.strip() for item in value.split(",") if item.strip()] if value else []
    return value


class RunConfig(BaseModel):
    """Parameters of one run; unset values are resolved from the model."""
    model_config = ConfigDict(extra="ignore", frozen=True)

    subcommand: Literal["simulate", "moments", "grr", "field", "tail", "holder"]
    model: Literal["fbm", "wick", "product", "sheet", "deterministic", "combination"] = "fbm"
    hurst: List[float] = Field(default_factory=lambda: [0.5])
    order: int = 2
    shape: Literal["zero", "one", "linear", "sqrt"] = "linear"
    weights: List[float] = Field(default_factory=list)
    grid: List[int] = Field(default_factory=list)
    paths: Optional[int] = None
    seed: int = 0
    beta: Optional[float] = None
    beta0: Optional[float] = None
    iota: Optional[float] = None
    c0: Optional[float] = None
    alpha: List[float] = Field(default_factory=list)
    epsilon: List[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2])
    interval: Tuple[float, float] = (0.0, 1.0)
    base: float = 0.0
    u: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0])
    p: List[float] = Field(default_factory=lambda: [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    workers: int = 1
    input: Optional[str] = None
    out: str = "out"

    @field_validator("hurst", "weights", "grid", "alpha", "epsilon", "u", "p", "interval", mode="before")
    @classmethod
    def split_lists(cls, value):
        return _split(value)

    @field_validator("paths", "beta", "beta0", "iota", "c0", "input", mode="before")
    @classmethod
    def empty_is_unset(cls, value):
        if isinstance(value, str) and not value.strip():
            return None
        return value

    @field_validator("hurst")
    @classmethod
    def hurst_in_range(cls, value):
        for h in value:
            if not (0.0 < h < 1.0):
                raise ValueError(f"Hurst parameters must lie in (0, 1), got {h}")
        return value

    @field_validator("order")
    @classmethod
    def order_positive(cls, value):
        if value < 1:
            raise ValueError(f"chaos order must be at least 1, got {value}")
        return value

    @field_validator("seed")
    @classmethod
    def seed_64_bit(cls, value):
        if not (0 <= value < 2 ** 64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        return value

    @field_validator("alpha")
    @classmethod
    def alpha_in_range(cls, value):
        for a in value:
            if not (0.0 < a <= 1.0):
                raise ValueError(f"alpha must lie in (0, 1], got {a}")
        return value

    @field_validator("epsilon")
    @classmethod
    def epsilon_in_range(cls, value):
        for e in value:
            if not (0.0 < e <= 1.0):
                raise ValueError(f"epsilon must lie in (0, 1], got {e}")
        return value

    @field_validator("u")
    @classmethod
    def u_increasing(cls, value):
        if not value or any(u <= 0 for u in value) or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("u grid must be positive and strictly increasing")
        return value

    @field_validator("p")
    @classmethod
    def p_orders(cls, value):
        if any(p < 1 for p in value):
            raise ValueError("moment orders must be at least 1")
        return value

    @field_validator("workers")
    @classmethod
    def workers_positive(cls, value):
        if value < 1:
            raise ValueError("workers must be at least 1")
        return value

    @model_validator(mode="after")
    def check_windows(self) -> "RunConfig":
        issues = []
        if self.iota is not None and self.iota <= 0:
            issues.append(f"iota must be positive, got {self.iota}")
        if self.c0 is not None and self.c0 <= 0:
            issues.append(f"C0 must be positive, got {self.c0}")
        if self.beta is not None and self.beta <= 0:
            issues.append(f"beta must be positive, got {self.beta}")
        if self.beta0 is not None and self.beta0 <= 0:
            issues.append(f"beta0 must be positive, got {self.beta0}")
        if self.paths is not None and self.paths < 1:
            issues.append("paths must be at least 1")
        if (self.subcommand in MONTE_CARLO_SUBCOMMANDS and self.paths is not None
                and self.paths < MIN_MONTE_CARLO_PATHS):
            issues.append(f"{self.subcommand} needs at least {MIN_MONTE_CARLO_PATHS} paths")
        if self.subcommand == "moments" and len(self.p) < 4:
            issues.append("moments needs at least 4 moment orders")
        a, b = self.interval
        if not (0.0 <= a < b <= 1.0):
            issues.append(f"interval must satisfy 0 <= a < b <= 1, got {self.interval}")
        if not (0.0 <= self.base <= 1.0):
            issues.append(f"base point must lie in [0, 1], got {self.base}")
        if self.alpha and self.subcommand == "holder":
            too_large = [e for e in self.epsilon if e >= min(self.alpha)]
            if len(too_large) == len(self.epsilon):
                issues.append("every epsilon is at least alpha; the Sobolev bound needs epsilon < alpha")
        if self.model == "sheet" and len(self.hurst) != 2:
            issues.append("sheet needs two Hurst parameters")
        if self.model == "product" and len(self.hurst) != 2:
            issues.append("product needs two Hurst parameters, one per fBm factor")
        if self.model == "combination" and len(self.weights) != len(self.hurst):
            issues.append("combination needs one weight per Hurst parameter")
        cap = config.max_field_points_per_axis if self.model in FIELD_KINDS else config.max_path_points
        if any(g < 2 or g > cap for g in self.grid):
            issues.append(f"grid sizes must lie in [2, {cap}], got {self.grid}")
        if issues:
            raise ValueError("; ".join(issues))
        return self

    @property
    def is_field(self) -> bool:
        return self.model in FIELD_KINDS

    def default_grid(self) -> List[int]:
        if self.is_field:
            size = DEFAULT_FIELD_GRID.get(self.subcommand, 33)
            return [size] * len(self.hurst)
        return [DEFAULT_GRID[self.subcommand]]

    def default_paths(self) -> int:
        if self.is_field and self.subcommand == "tail":
            return DEFAULT_FIELD_TAIL_PATHS
        return DEFAULT_PATHS[self.subcommand]

    def manifest(self) -> Dict[str, Any]:
        """Settings in declaration order, as written to manifest.txt."""
        return self.model_dump()
