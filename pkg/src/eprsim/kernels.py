"""Kernel backend selection.

The compiled extension is used when it imports; setting ``EPRSIM_PURE_PYTHON=1``
forces the numpy fallback. Both backends consume the same pre-drawn random
arrays and return identical integers.
"""

import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> "ModuleType | None":
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


compiled = _load_compiled()

if compiled is not None and not os.environ.get("EPRSIM_PURE_PYTHON"):
    impl: ModuleType = compiled
    BACKEND = "cython"
else:
    impl = _kernels_py
    BACKEND = "python"

axis_signs = impl.axis_signs
sign_gram = impl.sign_gram
pair_outcomes = impl.pair_outcomes


def backends() -> dict[str, ModuleType]:
    """Every importable backend by name."""
    out = {"python": _kernels_py}
    if compiled is not None:
        out["cython"] = compiled
    return out
