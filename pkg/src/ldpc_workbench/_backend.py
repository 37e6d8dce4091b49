"""Pick the compiled kernels when available, else the numpy fallback.

Set ``LDPC_WORKBENCH_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and not os.environ.get("LDPC_WORKBENCH_PURE"):
    kernels = _compiled
    NAME = "compiled"
else:
    kernels = _kernels_py
    NAME = "python"


def available() -> list[str]:
    return ["python"] + (["compiled"] if _compiled is not None else [])


def get(name: str):
    """Kernel module by name, ``"python"`` or ``"compiled"``."""
    if name == "python":
        return _kernels_py
    if name == "compiled" and _compiled is not None:
        return _compiled
    raise ImportError(f"kernel backend {name!r} is not available")
