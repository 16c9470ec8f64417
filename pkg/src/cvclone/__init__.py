"""Gaussian continuous-variable cloning, CV-QKD analysis and key distillation."""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402

__all__ = ["BACKEND", "__version__"]
