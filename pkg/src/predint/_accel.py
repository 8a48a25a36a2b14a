"""Backend selection for the hot numeric kernels.

Set ``PREDINT_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable.  ``PREDINT_THREADS`` caps worker threads for the Monte
Carlo loops (0 or unset means one worker per CPU).
"""

import os

_FALSY = {"", "0", "false", "no", "off"}


def _flag(name):
    return os.environ.get(name, "").strip().lower() not in _FALSY


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag("PREDINT_DISABLE_NUMBA")


def thread_count(requested=None):
    """Resolve the worker count from an explicit request or ``PREDINT_THREADS``."""
    if requested is None:
        raw = os.environ.get("PREDINT_THREADS", "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError:
            requested = 0
    if requested <= 0:
        requested = os.cpu_count() or 1
    return max(1, int(requested))
