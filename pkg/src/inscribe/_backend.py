"""Select the kernel implementation at import time.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the numpy fallback in ``_pykernels`` takes over. Setting the environment
variable ``INSCRIBE_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

python_kernels: ModuleType = _pykernels
compiled_kernels: ModuleType | None

try:
    from . import _ckernels as compiled_kernels  # type: ignore[no-redef]
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("INSCRIBE_PURE_PYTHON", "") in ("", "0"):
    kernels: ModuleType = compiled_kernels
    name = "cython"
else:
    kernels = python_kernels
    name = "python"


def available() -> dict[str, ModuleType]:
    """All kernel implementations importable in this build, keyed by name."""
    out = {"python": python_kernels}
    if compiled_kernels is not None:
        out["cython"] = compiled_kernels
    return out
