"""Per-question voting kernels with a compiled fast path.

Two interchangeable backends implement the same two functions:

* ``_native`` is a Cython extension built at install time.
* ``_pure`` is the pure-Python reference, used when the extension is
  missing or when explicitly requested.

Selection happens once at import. Set ``ROUTERLAB_KERNELS=pure`` to
force the fallback, or ``ROUTERLAB_KERNELS=native`` to require the
extension (import fails if it is unavailable). Both backends assume the
caller passes equal-length lists with strictly positive weights; the
engine validates that before calling in.
"""

from __future__ import annotations

import os

from . import _pure

_requested = os.environ.get("ROUTERLAB_KERNELS", "").strip().lower()

if _requested == "pure":
    _impl = _pure
    BACKEND = "pure"
elif _requested in ("", "native"):
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        _impl = _pure
        BACKEND = "pure"
else:
    raise RuntimeError(
        f"ROUTERLAB_KERNELS must be 'pure' or 'native', got {_requested!r}"
    )

vote_masses = _impl.vote_masses
cascade_vote = _impl.cascade_vote


def backend_name() -> str:
    """Name of the kernel backend selected at import: native or pure."""
    return BACKEND


__all__ = ["vote_masses", "cascade_vote", "backend_name", "BACKEND"]
