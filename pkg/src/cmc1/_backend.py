"""Selects the compiled transport kernels, falling back to pure Python.

Set ``CMC1_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("CMC1_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"
    else:
        BACKEND = "cython"

STATUS_MESSAGES = {
    _kernels_py.OK: "ok",
    _kernels_py.STEP_UNDERFLOW: "step size underflow",
    _kernels_py.TOO_MANY_STEPS: "step budget exhausted",
    _kernels_py.REACHED_END: "path approaches an end of the surface",
    _kernels_py.NOT_FINITE: "state became non-finite",
}
