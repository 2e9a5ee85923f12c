"""Topic modelling and evaluation toolkit for short crisis texts."""

from stormtopics._kernels import backend as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
