"""
Model Registry for the hyperlab model system

This module provides the registry that stores process model plugins by
their kind.
"""
import logging
from typing import Dict, Optional, List, Any
from threading import RLock

from .base_model import ProcessModelPlugin

logger = logging.getLogger(__name__)


class ModelRegistry:
    """
    Thread-safe registry for process model plugins.

    Samplers run on worker threads, so every access goes through a reentrant lock.
    """

    def __init__(self):
        """Initialize the model registry."""
        self._models: Dict[str, ProcessModelPlugin] = {}
        self._lock = RLock()
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def register_model(self, kind: str, plugin: ProcessModelPlugin) -> bool:
        """
        Register a model plugin under its kind.

        Args:
            kind: Unique kind name (e.g. "fbm")
            plugin: Plugin wrapper to register

        Returns:
            True if registration was successful, False if the kind is taken
        """
        with self._lock:
            if kind in self._models:
                self.logger.warning(f"Model kind {kind} is already registered")
                return False

            self._models[kind] = plugin
            self.logger.debug(f"Registered model: {kind}")
            return True

    def get_model(self, kind: str) -> Optional[ProcessModelPlugin]:
        """Return the plugin registered under kind, or None."""
        with self._lock:
            return self._models.get(kind)

    def is_registered(self, kind: str) -> bool:
        with self._lock:
            return kind in self._models

    def get_model_kinds(self) -> List[str]:
        with self._lock:
            return sorted(self._models.keys())

    def count(self) -> int:
        with self._lock:
            return len(self._models)

    def get_registry_info(self) -> Dict[str, Any]:
        """
        Get information about the registry state.

        Returns:
            Dictionary with registry statistics and per-model metadata
        """
        with self._lock:
            model_info = {}
            for kind, plugin in self._models.items():
                model_info[kind] = {
                    "model_class": plugin.model_class.__name__,
                    "version": plugin.version,
                    "author": plugin.author,
                    "description": plugin.description,
                    "dims": plugin.dims
                }

            return {
                "total_models": self.count(),
                "model_kinds": sorted(self._models.keys()),
                "models": model_info
            }
