"""Select the compiled kernels when available, else the numpy fallback.

Set ``TPSPACE_BACKEND=python`` to force the fallback.
"""

import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

_compiled = None
if os.environ.get("TPSPACE_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable, using numpy fallback")

kernels = _compiled if _compiled is not None else _kernels_py
BACKEND = "cython" if _compiled is not None else "python"
FS_NORMALIZATION = _kernels_py.FS_NORMALIZATION


def get_kernels(name=None):
    """Return a kernel module by name (``"cython"``/``"python"``), default the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("tpspace._kernels is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
