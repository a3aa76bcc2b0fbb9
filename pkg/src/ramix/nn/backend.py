"""Kernel backend selection.

The compiled extension is used when it imports; set ``RAMIX_BACKEND=numpy``
to force the pure-numpy kernels.
"""

import os

from . import _npkernels

numpy_kernels = _npkernels

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None


def _select():
    wanted = os.environ.get("RAMIX_BACKEND", "").strip().lower()
    if wanted == "numpy" or compiled_kernels is None:
        return _npkernels
    return compiled_kernels


kernels = _select()


def available():
    """Names of the kernel backends importable in this environment."""
    return [k.NAME for k in (_npkernels, compiled_kernels) if k is not None]


def get(name):
    if name == _npkernels.NAME:
        return _npkernels
    if compiled_kernels is not None and name == compiled_kernels.NAME:
        return compiled_kernels
    raise ValueError(f"kernel backend {name!r} is not available")
