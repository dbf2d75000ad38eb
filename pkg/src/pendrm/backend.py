"""Kernel backend selection.

The compiled extension is preferred when importable; the NumPy kernels are
the fallback.  ``PENDRM_BACKEND=python`` (or ``c``) forces a choice at
import time, and :func:`use` / :func:`forced` switch it at runtime, which
the benchmark and the backend-equivalence tests rely on.
"""

import os
from contextlib import contextmanager

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["c"] = _ckernels


def available():
    """Names of the importable backends, sorted."""
    return sorted(_BACKENDS)


def _initial():
    forced = os.environ.get("PENDRM_BACKEND")
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(
                f"PENDRM_BACKEND={forced!r} requested but only "
                f"{available()} are importable"
            )
        return _BACKENDS[forced]
    return _BACKENDS.get("c", _pykernels)


_active = _initial()


def active():
    """The module whose kernels are currently in use."""
    return _active


def backend_name():
    for name, mod in _BACKENDS.items():
        if mod is _active:
            return name
    raise RuntimeError("active backend not registered")


def use(name):
    """Switch the active backend by name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available()}")
    _active = _BACKENDS[name]


@contextmanager
def forced(name):
    """Temporarily switch backends (tests and benchmarks)."""
    previous = backend_name()
    use(name)
    try:
        yield _active
    finally:
        use(previous)
