"""Kernel backend selection: compiled extension when available, numpy otherwise.

The choice is made once at import. Set RATESPLIT_KERNELS=py (or =cy) to
force a backend; forcing cy without the built extension raises.
"""

import os

from . import _kernels_np

_FORCED = os.environ.get("RATESPLIT_KERNELS", "").strip().lower()

if _FORCED in ("py", "numpy"):
    _impl = _kernels_np
    KERNEL_BACKEND = "numpy"
elif _FORCED in ("cy", "cython"):
    from . import _kernels_cy as _impl  # noqa: F401

    KERNEL_BACKEND = "cython"
else:
    try:
        from . import _kernels_cy as _impl

        KERNEL_BACKEND = "cython"
    except ImportError:
        _impl = _kernels_np
        KERNEL_BACKEND = "numpy"

saf_accumulate = _impl.saf_accumulate
sampled_rates = _impl.sampled_rates
