"""
Built-in Process Model Plugins

The example processes and fields shipped with the lab.
"""

from .fbm_model import FBmPlugin
from .wick_chaos_model import WickChaosPlugin
from .product_model import ProductPlugin
from .fbm_sheet_model import FBmSheetPlugin
from .deterministic_model import DeterministicPlugin
from .combination_model import LinearCombinationPlugin

BUILTIN_MODELS = [
    FBmPlugin,
    WickChaosPlugin,
    ProductPlugin,
    FBmSheetPlugin,
    DeterministicPlugin,
    LinearCombinationPlugin,
]

__all__ = [
    'FBmPlugin',
    'WickChaosPlugin',
    'ProductPlugin',
    'FBmSheetPlugin',
    'DeterministicPlugin',
    'LinearCombinationPlugin',
    'BUILTIN_MODELS'
]
