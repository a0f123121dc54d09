"""Select the compiled kernels when available, else the numpy fallback.

Set ``RFPLS_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
if not os.environ.get("RFPLS_PURE_PYTHON"):
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback
    else:
        BACKEND = "cython"
else:
    _impl = _fallback

bspline_design = _impl.bspline_design
weiszfeld = _impl.weiszfeld
kde_columns = _impl.kde_columns
