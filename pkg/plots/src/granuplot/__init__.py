"""granuplot: deterministic rendering of granuflow run traces."""

from .bundle import SchemaError, TraceBundle
from . import render

__version__ = "0.1.0"
