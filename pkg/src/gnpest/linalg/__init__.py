from .kernel import available_backends, backend_name
from .spectral import (
    EXACT_SOLVER_CAP,
    CenteredOperator,
    EigenEstimate,
    centered_dense,
    spectral_norm_exact,
    spectral_norm_of_centered,
    top_eigvec_approx,
)

__all__ = [
    "available_backends",
    "backend_name",
    "EXACT_SOLVER_CAP",
    "CenteredOperator",
    "EigenEstimate",
    "centered_dense",
    "spectral_norm_exact",
    "spectral_norm_of_centered",
    "top_eigvec_approx",
]
