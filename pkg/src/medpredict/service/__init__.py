"""HTTP prediction service: one endpoint per registered disease model."""

from .advice import advice_for
from .app import create_app
from .registry import ModelRegistry, load_registry

__all__ = ["advice_for", "create_app", "ModelRegistry", "load_registry"]
