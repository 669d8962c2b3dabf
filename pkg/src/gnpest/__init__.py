"""Robust estimation of the Erdos-Renyi edge probability under
adversarial node corruption: baseline estimators, the adversaries that
break them, a spectral filtering + trimming estimator, regularity audits,
and the lower-bound coupling construction."""

__version__ = "0.1.0"

from .linalg import available_backends, backend_name

__all__ = ["available_backends", "backend_name", "__version__"]
