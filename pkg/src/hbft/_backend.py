"""Kernel backend selection.

The compiled extension is preferred; the pure-Python module is a drop-in
replacement.  Set ``HBFT_BACKEND=pure`` (or ``compiled``) to force a choice,
e.g. for benchmarking.
"""

import os

_forced = os.environ.get("HBFT_BACKEND", "").strip().lower()

if _forced == "pure":
    from . import _kernels_py as kernels
elif _forced == "compiled":
    from . import _kernels as kernels  # type: ignore[no-redef]
elif _forced:
    raise ValueError(f"HBFT_BACKEND must be 'pure' or 'compiled', got {_forced!r}")
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND = kernels.NAME
