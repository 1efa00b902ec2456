"""Numeric kernel backend selection.

The compiled extension (`textdensity.kernels._core`, built from Cython)
is used when importable; otherwise the pure numpy module `_purepy`
serves as a drop-in fallback. Set TEXTDENSITY_BACKEND=python or =cython
to force one explicitly; forcing cython raises if the extension is
missing instead of silently falling back.

Both backends implement the same functions with identical semantics;
tests/test_kernels.py asserts their agreement whenever both import.
"""

from __future__ import annotations

import os

from . import _purepy


def _select():
    forced = os.environ.get("TEXTDENSITY_BACKEND", "").strip().lower()
    if forced in ("python", "py", "numpy", "purepy"):
        return _purepy
    try:
        from . import _core
    except ImportError:
        if forced in ("cython", "c", "compiled"):
            raise ImportError(
                "TEXTDENSITY_BACKEND requested the compiled backend but "
                "textdensity.kernels._core is not built; reinstall the package "
                "or unset TEXTDENSITY_BACKEND"
            ) from None
        return _purepy
    if forced and forced not in ("cython", "c", "compiled", ""):
        raise ValueError(f"unknown TEXTDENSITY_BACKEND value {forced!r}")
    return _core


_impl = _select()

BACKEND = _impl.BACKEND
window_mean = _impl.window_mean
window_mean_backward = _impl.window_mean_backward
column_softmax = _impl.column_softmax
add_rows = _impl.add_rows
loss_and_grads = _impl.loss_and_grads
gaussian_kde_sum = _impl.gaussian_kde_sum


def available_backends() -> list[str]:
    """Names of importable backends, compiled one first when present."""
    names = []
    try:
        from . import _core

        names.append(_core.BACKEND)
    except ImportError:
        pass
    names.append(_purepy.BACKEND)
    return names


def get_backend(name: str):
    """Return a backend module by name ('cython' or 'numpy')."""
    if name == "numpy":
        return _purepy
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
