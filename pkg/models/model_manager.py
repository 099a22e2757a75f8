"""
Model Manager for the hyperlab model system

This module creates model instances from specifications, registers the
built-in models and loads custom model files from a directory.
"""
import os
import sys
import logging
import importlib.util
from typing import Dict, List, Optional, Any, Type

from errors import DomainError, ModelLoadError
from montecarlo import map_paths
from .base_model import BaseProcessModel, ProcessModelPlugin, ModelSpec, Sample, SamplePath, Grid
from .registry import ModelRegistry
from .builtin import BUILTIN_MODELS

logger = logging.getLogger(__name__)


class ModelManager:
    """
    Core manager for process models.

    Handles registration of built-ins, discovery and loading of custom model
    files, and creation of validated model instances.
    """

    def __init__(self, model_directory: str = None):
        """
        Initialize the model manager.

        Args:
            model_directory: Directory searched for custom model files
        """
        self.model_directory = model_directory or os.path.join(os.path.dirname(__file__), "custom")
        self.registry = ModelRegistry()
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

        # Track loaded modules for cleanup
        self._loaded_modules = {}

        for plugin in BUILTIN_MODELS:
            self.registry.register_model(plugin.kind, plugin)
        self.logger.debug(f"Registered {len(BUILTIN_MODELS)} built-in models")

    def discover_models(self) -> List[Dict[str, Any]]:
        """
        Discover custom model files in the model directory.

        Returns:
            List of model file information dictionaries
        """
        discovered = []

        if not os.path.isdir(self.model_directory):
            self.logger.warning(f"Model directory does not exist: {self.model_directory}")
            return discovered

        for item in sorted(os.listdir(self.model_directory)):
            if not item.endswith('.py') or item.startswith('_'):
                continue
            path = os.path.join(self.model_directory, item)
            try:
                with open(path, 'r', encoding='utf-8') as f:
                    content = f.read()
            except IOError as e:
                self.logger.error(f"Error reading model file {path}: {e}")
                continue
            discovered.append({
                "path": path,
                "name": os.path.splitext(item)[0],
                "has_model_class": "BaseProcessModel" in content,
                "has_plugin_metadata": "PLUGIN_METADATA" in content,
            })

        self.logger.info(f"Discovered {len(discovered)} custom models")
        return discovered

    def load_model_file(self, file_path: str) -> ProcessModelPlugin:
        """
        Load a model plugin from a single Python file and register it.

        The file must define a BaseProcessModel subclass; PLUGIN_METADATA
        supplies its kind and description.

        Raises:
            ModelLoadError: if the file cannot be imported, has no model class,
                or its kind is already registered
        """
        module_name = f"hyperlab_custom_{os.path.splitext(os.path.basename(file_path))[0]}"
        try:
            spec = importlib.util.spec_from_file_location(module_name, file_path)
            if not spec or not spec.loader:
                raise ModelLoadError(f"Cannot create spec for {file_path}")

            module = importlib.util.module_from_spec(spec)
            sys.modules[module_name] = module
            spec.loader.exec_module(module)

            model_class = self._find_model_class(module)
            if not model_class:
                raise ModelLoadError(f"No BaseProcessModel subclass found in {file_path}")

            metadata = getattr(module, 'PLUGIN_METADATA', {})
            plugin = ProcessModelPlugin(model_class, metadata)
            self._validate_plugin(plugin)

        except ModelLoadError:
            sys.modules.pop(module_name, None)
            raise
        except Exception as e:
            sys.modules.pop(module_name, None)
            raise ModelLoadError(f"Failed to load model from {file_path}: {e}")

        if not self.registry.register_model(plugin.kind, plugin):
            sys.modules.pop(module_name, None)
            raise ModelLoadError(f"Model kind {plugin.kind} from {file_path} is already registered")

        self._loaded_modules[plugin.kind] = module_name
        self.logger.info(f"Successfully loaded model: {plugin.kind}")
        return plugin

    def load_custom_models(self) -> List[str]:
        """Load every discovered custom model; failures are logged and skipped."""
        loaded = []
        for info in self.discover_models():
            if not info["has_model_class"]:
                continue
            try:
                loaded.append(self.load_model_file(info["path"]).kind)
            except ModelLoadError as e:
                self.logger.error(f"Failed to load model {info['name']}: {e}")
        return loaded

    def _find_model_class(self, module) -> Optional[Type[BaseProcessModel]]:
        """Find BaseProcessModel subclass defined in a module."""
        for attr_name in dir(module):
            attr = getattr(module, attr_name)
            if (isinstance(attr, type) and
                    issubclass(attr, BaseProcessModel) and
                    attr is not BaseProcessModel and
                    attr.__module__ == module.__name__):
                return attr
        return None

    def _validate_plugin(self, plugin: ProcessModelPlugin) -> None:
        """Validate a plugin before registration."""
        if getattr(plugin.model_class, '__abstractmethods__', None):
            missing = ", ".join(sorted(plugin.model_class.__abstractmethods__))
            raise ModelLoadError(f"Model class must implement {missing}")
        if not isinstance(plugin.dims, int) or plugin.dims < 1:
            raise ModelLoadError(f"Model dims must be a positive integer, got {plugin.dims}")
        self.logger.debug(f"Model validation passed for {plugin.model_class.__name__}")

    def create_model(self, spec: ModelSpec) -> BaseProcessModel:
        """
        Create a validated model instance.

        Raises:
            DomainError: for an unknown kind or an invalid specification
        """
        plugin = self.registry.get_model(spec.kind)
        if not plugin:
            raise DomainError(f"Unknown model kind {spec.kind!r}; "
                              f"registered: {', '.join(self.registry.get_model_kinds())}")

        model = plugin.create_model(spec, factory=self.create_model)
        model.validate_spec()
        return model

    def sample(self, spec: ModelSpec, grid: Grid, seed: Optional[int] = None) -> Sample:
        """Draw one realization of spec."""
        return self.create_model(spec).sample(grid, seed)

    def sample_batch(self, spec: ModelSpec, grid: Grid, n_paths: int, seed: Optional[int] = None,
                     workers: Optional[int] = None) -> List[Sample]:
        """
        Draw n_paths realizations; path i uses derive_seed(seed, i).

        The result is ordered by path index and independent of the worker count.
        """
        model = self.create_model(spec)
        master = spec.seed if seed is None else int(seed)
        return map_paths(lambda index, path_seed: model.sample(grid, path_seed),
                         n_paths, master, workers=workers, desc=f"sampling {spec.kind}")

    def get_registry(self) -> ModelRegistry:
        """Get the model registry instance."""
        return self.registry

    def get_manager_info(self) -> Dict[str, Any]:
        """Get manager status information."""
        return {
            "model_directory": self.model_directory,
            "custom_models": sorted(self._loaded_modules),
            "registry": self.registry.get_registry_info(),
        }


# Global manager instance
_model_manager: Optional[ModelManager] = None


def get_model_manager() -> ModelManager:
    """Global model manager with the built-ins and every model file in models/custom."""
    global _model_manager
    if _model_manager is None:
        _model_manager = ModelManager()
        _model_manager.load_custom_models()
    return _model_manager


def sample(spec: ModelSpec, grid: Grid, seed: Optional[int] = None) -> Sample:
    """Draw one realization through the global manager."""
    return get_model_manager().sample(spec, grid, seed)


def sample_product(spec_a: ModelSpec, spec_b: ModelSpec, n_points: int, seed: int) -> SamplePath:
    """Pointwise product of independent samples of spec_a and spec_b."""
    return sample(ModelSpec.product(spec_a, spec_b, seed=seed), n_points)
