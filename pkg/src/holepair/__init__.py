"""Driven-dissipative two-chain steady states built from paired holes."""

from .exact_recursive import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
