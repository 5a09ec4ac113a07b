"""Selects the motion-kernel backend at import time.

The compiled extension is preferred when it built; set ``BOTSTREAM_PURE=1``
to force the pure-Python kernel.  Both kernels are written to produce
bit-identical results (see ``benchmarks/bench_kernels.py`` for the
comparison and the equivalence check in the test suite).
"""

from __future__ import annotations

import os

from . import _kinematics_py

if os.environ.get("BOTSTREAM_PURE") == "1":
    _active = _kinematics_py
else:
    try:
        from . import _kinematics as _active  # type: ignore[no-redef]
    except ImportError:
        _active = _kinematics_py

advance = _active.advance
BACKEND = "pure" if _active is _kinematics_py else "compiled"


def backends() -> dict:
    """Importable kernel implementations, name -> module."""
    found = {"pure": _kinematics_py}
    try:
        from . import _kinematics

        found["compiled"] = _kinematics
    except ImportError:
        pass
    return found
