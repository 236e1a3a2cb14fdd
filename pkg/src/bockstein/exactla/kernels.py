"""Backend selection for the Smith-form kernel.

The compiled kernel is used for moduli below 2^31 when it imports; set
``BOCKSTEIN_PURE_PYTHON=1`` to force the Python fallback.
"""
import os

from . import _kernel_py

try:
    if os.environ.get("BOCKSTEIN_PURE_PYTHON"):
        raise ImportError("pure Python kernel requested")
    from . import _kernel as _compiled
except ImportError:
    _compiled = None

_LIMIT = 1 << 31


def backend():
    return "cython" if _compiled is not None else "python"


def smith(rows, ncols, coeffs, force=None):
    """Dispatch to the right Smith routine; ``force`` is "python" or "cython"."""
    if coeffs.kind == "plocal":
        return _kernel_py.snf_plocal(rows, ncols, coeffs.p)
    use_c = _compiled is not None and coeffs.modulus < _LIMIT
    if force == "python":
        use_c = False
    elif force == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        use_c = True
    if use_c and rows and ncols:
        return _compiled.snf_modular(rows, ncols, coeffs.p, coeffs.exponent)
    return _kernel_py.snf_modular(rows, ncols, coeffs.p, coeffs.exponent)
