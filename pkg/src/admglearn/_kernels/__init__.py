"""Kernel backend selection.

The compiled Cython kernel is preferred; the NumPy reference implementation
is used when the extension did not build or when ADMGLEARN_FORCE_PYTHON is
set (any non-empty value).  Both expose the same functions and agree to
floating-point roundoff.
"""

import os

from . import _py_ref

if os.environ.get("ADMGLEARN_FORCE_PYTHON"):
    _impl = _py_ref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _py_ref
        BACKEND = "python"

ls_power_value_grad = _impl.ls_power_value_grad
ls_gaussian_value_grad = _impl.ls_gaussian_value_grad

__all__ = ["ls_power_value_grad", "ls_gaussian_value_grad", "BACKEND"]
