"""Simulation and verification tools for EPRB, GHZ and Bell-type arguments."""

__version__ = "0.1.0"

from .errors import ConsistencyError, ModelContractError, UnsupportedObservableError, ValidationError  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "__version__",
    "BACKEND",
    "ConsistencyError",
    "ModelContractError",
    "UnsupportedObservableError",
    "ValidationError",
]
