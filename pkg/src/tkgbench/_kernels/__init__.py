"""Kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the
pure-Python fallback takes over. Set TKGBENCH_PURE_KERNELS=1 to force the
fallback (useful for debugging and for benchmarks comparing the two).
"""

import os

from . import pure

if os.environ.get("TKGBENCH_PURE_KERNELS"):
    impl = pure
else:
    try:
        from . import _native as impl  # type: ignore[no-redef]
    except ImportError:
        impl = pure

BACKEND_NAME = impl.BACKEND_NAME
AVERAGE = impl.AVERAGE
COMPLETE = impl.COMPLETE
body_supports = impl.body_supports
query_candidates = impl.query_candidates
agglomerate = impl.agglomerate


def backend_name() -> str:
    """Name of the active kernel backend ('native' or 'pure')."""
    return BACKEND_NAME
