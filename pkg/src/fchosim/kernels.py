"""Hot-kernel dispatch: compiled extension when available, numpy otherwise.

Set ``FCHOSIM_PURE_PYTHON=1`` to force the numpy path.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("FCHOSIM_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

sos_power = _impl.sos_power
sos_rotate = _impl.sos_rotate
sinr_all = _impl.sinr_all
serving_sinr = _impl.serving_sinr


def streak_update(streak, cond):
    """In place: ``streak + 1`` where ``cond`` holds, 0 elsewhere (int32 / bool, C-contiguous)."""
    _impl.streak_update(streak, np.ascontiguousarray(cond).view(np.uint8))
