"""Select the containment engine at import time.

The compiled extension is preferred when it is built and the space is
small enough for its fixed-width masks; the pure-Python engine is the
fallback and the reference.  ``SYNCALG_FORCE_PURE=1`` pins the fallback
(used by the benchmark and the twin-agreement tests).
"""

from __future__ import annotations

import os

from . import _kernel_py

_COMPILED = None
if not os.environ.get("SYNCALG_FORCE_PURE"):
    try:
        from . import _kernel_c as _COMPILED  # type: ignore[no-redef]
    except ImportError:
        _COMPILED = None

# The compiled engine packs a relation into one machine word.
_COMPILED_MAX_STATES = 8


def active_backend(n_states=0):
    if _COMPILED is not None and n_states <= _COMPILED_MAX_STATES:
        return _COMPILED.BACKEND
    return _kernel_py.BACKEND


def make_engine(n_states):
    if _COMPILED is not None and n_states <= _COMPILED_MAX_STATES:
        return _COMPILED.Engine(n_states)
    return _kernel_py.Engine(n_states)


def make_pure_engine(n_states):
    return _kernel_py.Engine(n_states)


def compiled_available():
    return _COMPILED is not None
