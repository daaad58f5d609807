"""Pick the lambda-sweep kernel at import time.

The compiled extension is preferred; set ``BANDSEL_PURE_PYTHON=1`` to
force the NumPy fallback.
"""

import importlib
import os

from . import _dimkernel_py


def load(name=None):
    """Return ``(backend_name, kernel_module)``.

    ``name`` may be ``"cython"``, ``"python"`` or ``None`` for the default
    selection; asking for ``"cython"`` when it is not built raises
    ``ImportError``.
    """
    if name == "python":
        return "python", _dimkernel_py
    if name == "cython":
        return "cython", importlib.import_module("bandsel._dimkernel")
    if name is not None:
        raise ValueError(f"unknown backend {name!r}")
    if os.environ.get("BANDSEL_PURE_PYTHON", "") not in ("", "0"):
        return "python", _dimkernel_py
    try:
        return load("cython")
    except ImportError:
        return "python", _dimkernel_py


BACKEND, kernel = load()
