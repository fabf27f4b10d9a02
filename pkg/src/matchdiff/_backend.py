"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set MATCHDIFF_FORCE_PYTHON=1 to skip the compiled extension.
"""
import os

if os.environ.get("MATCHDIFF_FORCE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

scaling_loop = _impl.scaling_loop
