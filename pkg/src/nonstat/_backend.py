"""Select the deviation-profile kernel at import time.

The compiled extension is preferred; the pure numpy fallback is used when
it is missing or when NONSTAT_BACKEND=python requests it explicitly.
"""

from __future__ import annotations

import os

from . import _profile_np

_requested = os.environ.get("NONSTAT_BACKEND", "").strip().lower()

if _requested in ("python", "numpy"):
    _impl = _profile_np
elif _requested in ("", "auto", "cython", "c"):
    try:
        from . import _profile_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested in ("cython", "c"):
            raise
        _impl = _profile_np
else:
    raise ValueError(f"unknown NONSTAT_BACKEND={_requested!r}; use 'cython' or 'python'")

BACKEND = _impl.BACKEND
profile_kernel = _impl.deviation_profile
relative_profile_kernel = _impl.relative_deviation_profile
