"""
Base Model Interface for the hyperlab model system

This module defines the sample containers, the model specification and the
abstract base class that every process or field model plugin implements.
"""
import abc
import logging
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import DomainError

logger = logging.getLogger(__name__)

GRID_TOLERANCE = 1e-9


def uniform_grid(n_points: int) -> np.ndarray:
    """Uniform grid on [0, 1] including both endpoints."""
    return np.linspace(0.0, 1.0, int(n_points))


def _check_uniform_axis(axis: np.ndarray, name: str) -> None:
    if axis.ndim != 1 or axis.size < 2:
        raise DomainError(f"{name} must be a 1-D grid with at least 2 points")
    if not np.all(np.isfinite(axis)):
        raise DomainError(f"{name} contains non-finite grid points")
    steps = np.diff(axis)
    if np.any(steps <= 0):
        raise DomainError(f"{name} must be strictly increasing")
    if abs(axis[0]) > GRID_TOLERANCE or abs(axis[-1] - 1.0) > GRID_TOLERANCE:
        raise DomainError(f"{name} must start at 0 and end at 1")
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=GRID_TOLERANCE):
        raise DomainError(f"{name} must be uniform")


@dataclass(frozen=True)
class SamplePath:
    """One realization of a process on a uniform grid of [0, 1]."""
    grid_points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.array(self.grid_points, dtype=float)
        values = np.array(self.values, dtype=float)
        _check_uniform_axis(grid, "grid_points")
        if values.shape != grid.shape:
            raise DomainError(f"values has {values.size} entries for {grid.size} grid points")
        if not np.all(np.isfinite(values)):
            raise DomainError("path values must be finite")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid_points", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def on_uniform_grid(cls, values: Sequence[float]) -> "SamplePath":
        values = np.asarray(values, dtype=float)
        return cls(uniform_grid(values.size), values)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], n_points: int) -> "SamplePath":
        grid = uniform_grid(n_points)
        return cls(grid, np.asarray(fn(grid), dtype=float) * np.ones_like(grid))

    @property
    def n_points(self) -> int:
        return int(self.grid_points.size)

    @property
    def step(self) -> float:
        return 1.0 / (self.n_points - 1)

    def scaled(self, factor: float) -> "SamplePath":
        return SamplePath(self.grid_points, self.values * factor)


@dataclass(frozen=True)
class SampleField:
    """One realization of a field on the product of uniform grids of [0, 1]^n.

    ``values`` has shape ``grid_sizes``; ``flat_values`` is its row-major order.
    """
    axes: Tuple[np.ndarray, ...]
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(np.array(axis, dtype=float) for axis in self.axes)
        values = np.array(self.values, dtype=float)
        if not axes:
            raise DomainError("a field needs at least one axis")
        for k, axis in enumerate(axes):
            _check_uniform_axis(axis, f"axis {k + 1}")
        if values.shape != tuple(axis.size for axis in axes):
            raise DomainError(
                f"value array of shape {values.shape} does not match grid sizes "
                f"{tuple(axis.size for axis in axes)}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        for axis in axes:
            axis.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)

    @classmethod
    def on_uniform_grid(cls, values: np.ndarray) -> "SampleField":
        values = np.asarray(values, dtype=float)
        return cls(tuple(uniform_grid(size) for size in values.shape), values)

    @classmethod
    def from_flat(cls, grid_sizes: Sequence[int], flat_values: Sequence[float]) -> "SampleField":
        grid_sizes = tuple(int(size) for size in grid_sizes)
        flat = np.asarray(flat_values, dtype=float)
        if flat.size != int(np.prod(grid_sizes)):
            raise DomainError(f"{flat.size} values for a grid of {np.prod(grid_sizes)} points")
        return cls.on_uniform_grid(flat.reshape(grid_sizes))

    @classmethod
    def from_function(cls, fn: Callable[..., np.ndarray], grid_sizes: Sequence[int]) -> "SampleField":
        axes = tuple(uniform_grid(size) for size in grid_sizes)
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(axes, np.asarray(fn(*mesh), dtype=float) * np.ones(mesh[0].shape))

    @classmethod
    def from_path(cls, path: SamplePath) -> "SampleField":
        return cls((path.grid_points,), path.values)

    @property
    def dims(self) -> int:
        return len(self.axes)

    @property
    def grid_sizes(self) -> Tuple[int, ...]:
        return tuple(int(size) for size in self.values.shape)

    @property
    def steps(self) -> Tuple[float, ...]:
        return tuple(1.0 / (size - 1) for size in self.grid_sizes)

    @property
    def flat_values(self) -> np.ndarray:
        return self.values.ravel(order="C")

    def scaled(self, factor: float) -> "SampleField":
        return SampleField(self.axes, self.values * factor)


Sample = Union[SamplePath, SampleField]
Grid = Union[int, Sequence[int]]


@dataclass(frozen=True)
class ModelSpec:
    """
    Specification of a model variant plus its 64-bit seed.

    ``kind`` selects the registered model plugin; the remaining fields are
    read by the plugin that owns the kind.
    """
    kind: str
    hurst: Tuple[float, ...] = ()
    order: int = 1
    factors: Tuple["ModelSpec", ...] = ()
    weights: Tuple[float, ...] = ()
    shape: str = "zero"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hurst", tuple(float(h) for h in self.hurst))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "factors", tuple(self.factors))
        if not (0 <= int(self.seed) < 2 ** 64):
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @classmethod
    def fbm(cls, hurst: float, seed: int = 0) -> "ModelSpec":
        return cls(kind="fbm", hurst=(hurst,), seed=seed)

    @classmethod
    def wick_chaos(cls, order: int, hurst: float, seed: int = 0) -> "ModelSpec":
        return cls(kind="wick", hurst=(hurst,), order=order, seed=seed)

    @classmethod
    def product(cls, first: "ModelSpec", second: "ModelSpec", seed: int = 0) -> "ModelSpec":
        return cls(kind="product", factors=(first, second), seed=seed)

    @classmethod
    def fbm_sheet(cls, hurst1: float, hurst2: float, seed: int = 0) -> "ModelSpec":
        return cls(kind="sheet", hurst=(hurst1, hurst2), seed=seed)

    @classmethod
    def deterministic(cls, shape: str) -> "ModelSpec":
        return cls(kind="deterministic", shape=shape)

    @classmethod
    def combination(cls, weights: Sequence[float], factors: Sequence["ModelSpec"],
                    seed: int = 0) -> "ModelSpec":
        return cls(kind="combination", weights=tuple(weights), factors=tuple(factors), seed=seed)

    def with_seed(self, seed: int) -> "ModelSpec":
        return replace(self, seed=int(seed))

    def describe(self) -> str:
        """Short human-readable label, stable across runs."""
        if self.kind in ("product", "combination"):
            inner = ", ".join(factor.describe() for factor in self.factors)
            if self.kind == "combination":
                weights = ", ".join(f"{w:g}" for w in self.weights)
                return f"combination[{weights}]({inner})"
            return f"product({inner})"
        if self.kind == "deterministic":
            return f"deterministic({self.shape})"
        label = ", ".join(f"{h:g}" for h in self.hurst)
        if self.kind == "wick":
            return f"wick(order={self.order}, H={label})"
        return f"{self.kind}(H={label})"


class BaseProcessModel(abc.ABC):
    """
    Abstract base class for process and field models.

    All model plugins must inherit from this class and implement the required
    members. Samplers must be pure functions of (spec, grid, seed).
    """

    def __init__(self, spec: ModelSpec, factory: Optional[Callable[[ModelSpec], "BaseProcessModel"]] = None):
        self.spec = spec
        self._factory = factory
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    @property
    @abc.abstractmethod
    def model_name(self) -> str:
        """Return the registry kind of this model."""
        pass

    @property
    @abc.abstractmethod
    def dims(self) -> int:
        """Return the parameter dimension (1 for processes, n for fields)."""
        pass

    @abc.abstractmethod
    def sample(self, grid: Grid, seed: Optional[int] = None) -> Sample:
        """
        Draw one realization.

        Args:
            grid: Points per axis (an int for processes)
            seed: 64-bit seed; defaults to the spec seed

        Returns:
            SamplePath for processes, SampleField for fields
        """
        pass

    @abc.abstractmethod
    def hyper_witness(self) -> Tuple[float, float]:
        """Return a pair (C0, iota) for which the increment moment bound holds."""
        pass

    @abc.abstractmethod
    def holder_exponents(self) -> Tuple[float, ...]:
        """Return per-axis alpha with d_X^2 <= C prod |t_j - s_j|^(2 alpha_j)."""
        pass

    def _spec_issues(self) -> List[str]:
        """Collect specification problems; subclasses extend the list."""
        return []

    def validate_spec(self) -> None:
        """
        Validate the model specification.

        Raises:
            DomainError: listing every issue found
        """
        issues = self._spec_issues()
        if issues:
            for issue in issues:
                self.logger.error(f"Model specification error: {issue}")
            raise DomainError(f"Invalid {self.spec.kind} specification: " + "; ".join(issues))

    def build(self, spec: ModelSpec) -> "BaseProcessModel":
        """Create a factor model through the owning manager."""
        if self._factory is None:
            raise DomainError(f"{self.model_name} needs a model factory to build its factors")
        return self._factory(spec)

    def normalize_grid(self, grid: Grid) -> Tuple[int, ...]:
        """Grid sizes as a tuple with one entry per axis."""
        sizes = (int(grid),) if np.isscalar(grid) else tuple(int(g) for g in grid)
        if len(sizes) == 1 and self.dims > 1:
            sizes = sizes * self.dims
        if len(sizes) != self.dims:
            raise DomainError(f"{self.model_name} needs {self.dims} grid sizes, got {len(sizes)}")
        if any(size < 2 for size in sizes):
            raise DomainError("grid sizes must be at least 2 per axis")
        return sizes

    def _seed(self, seed: Optional[int]) -> int:
        return self.spec.seed if seed is None else int(seed)

    def get_info(self) -> Dict[str, Any]:
        """Get information about this model."""
        c0, iota = self.hyper_witness()
        return {
            "name": self.model_name,
            "spec": self.spec.describe(),
            "dims": self.dims,
            "seed": self.spec.seed,
            "hyper_witness": {"C0": c0, "iota": iota},
            "holder_exponents": list(self.holder_exponents()),
        }


class ProcessModelPlugin:
    """
    Plugin wrapper for process models.

    This class wraps BaseProcessModel implementations and carries their
    metadata (registry kind, version, description).
    """

    def __init__(self, model_class: type, metadata: Dict[str, Any] = None):
        self.model_class = model_class
        self.metadata = metadata or {}
        self.kind = self.metadata.get('kind', model_class.__name__.lower())
        self.version = self.metadata.get('version', '1.0.0')
        self.author = self.metadata.get('author', 'Unknown')
        self.description = self.metadata.get('description', 'Custom process model')
        self.dims = self.metadata.get('dims', 1)

    def create_model(self, spec: ModelSpec,
                     factory: Optional[Callable[[ModelSpec], BaseProcessModel]] = None) -> BaseProcessModel:
        """Create an instance of the model for the given specification."""
        return self.model_class(spec, factory)

    def get_plugin_info(self) -> Dict[str, Any]:
        """Get plugin information."""
        return {
            "model_class": self.model_class.__name__,
            "kind": self.kind,
            "version": self.version,
            "author": self.author,
            "description": self.description,
            "dims": self.dims,
            "metadata": self.metadata
        }
