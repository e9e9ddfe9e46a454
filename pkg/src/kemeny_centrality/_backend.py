"""Pick the kernel implementation at import time.

The compiled extension is used when importable; set
``KEMENY_CENTRALITY_PURE_PYTHON=1`` to force the pure-Python kernels.
"""

import os

from . import _kernels_py

if os.environ.get("KEMENY_CENTRALITY_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND


def available():
    """All importable kernel modules, keyed by backend name."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["compiled"] = _kernels
    return found
