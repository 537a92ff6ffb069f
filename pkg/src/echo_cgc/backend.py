"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the
pure-numpy fallback is used.  Override with the environment variable
``ECHO_CGC_BACKEND`` set to ``compiled`` (fail hard if missing),
``python`` (force the fallback), or ``auto`` (the default).
"""

import os

from . import _kernels_py

__all__ = ["kernels", "name", "available_backends"]


def _select():
    forced = os.environ.get("ECHO_CGC_BACKEND", "auto").strip().lower()
    if forced in ("python", "py", "pure"):
        return _kernels_py, "python"
    try:
        from . import _kernels_cy
    except ImportError:
        if forced in ("compiled", "cython", "c"):
            raise ImportError(
                "ECHO_CGC_BACKEND=compiled but the extension is not built; "
                "reinstall with Cython and a C compiler available"
            )
        return _kernels_py, "python"
    return _kernels_cy, "compiled"


kernels, name = _select()


def available_backends():
    """Map of backend name to kernel module, for benchmarks and tests."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels_cy

        out["compiled"] = _kernels_cy
    except ImportError:
        pass
    return out
