"""
hyperlab model system

Process and field models are plugins: each wraps a BaseProcessModel subclass
and is registered by kind. Custom models can be dropped into models/custom.
"""

from .base_model import (BaseProcessModel, ProcessModelPlugin, ModelSpec, SamplePath,
                         SampleField, uniform_grid)
from .registry import ModelRegistry
from .model_manager import ModelManager, ModelLoadError, get_model_manager, sample, sample_product

__all__ = [
    'BaseProcessModel',
    'ProcessModelPlugin',
    'ModelSpec',
    'SamplePath',
    'SampleField',
    'uniform_grid',
    'ModelRegistry',
    'ModelManager',
    'ModelLoadError',
    'get_model_manager',
    'sample',
    'sample_product'
]
