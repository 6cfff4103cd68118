"""Pick the kernel implementation once, at import time."""
import os

from . import _kernels_py

if os.environ.get("PUMPED_LIOUVILLE_PURE_PYTHON"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"
