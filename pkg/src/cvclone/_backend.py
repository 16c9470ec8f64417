"""Kernel backend selection.

The compiled extension is used when it was built; setting
``CVCLONE_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
cascade_run = _kernels_py.cascade_run

if os.environ.get("CVCLONE_PURE_PYTHON") != "1":
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        cascade_run = _ckernels.cascade_run
