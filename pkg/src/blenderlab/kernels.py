"""Kernel selection: compiled extension when importable, else pure Python.

Set ``BLENDERLAB_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels as python_kernels

compiled_kernels = None
if not os.environ.get("BLENDERLAB_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

_active = compiled_kernels if compiled_kernels is not None else python_kernels

BACKEND = "compiled" if compiled_kernels is not None else "python"

pb_taylor = _active.pb_taylor
pb_invert = _active.pb_invert
forward_orbit = _active.forward_orbit
backward_orbit = _active.backward_orbit
word_orbit = _active.word_orbit
word_orbit_patched = _active.word_orbit_patched
series_compose = _active.series_compose
