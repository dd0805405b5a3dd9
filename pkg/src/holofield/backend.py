"""Selection of the sampling core: compiled extension or numpy fallback.

The compiled core is used when the extension built; setting the environment
variable ``HOLOFIELD_PURE_PYTHON=1`` before import forces the fallback.
Both cores implement the same update rule and consume random numbers
identically, so results agree up to floating-point rounding.
"""

from __future__ import annotations

import os

from . import _core_py

if os.environ.get("HOLOFIELD_PURE_PYTHON"):
    _impl = _core_py
    HAVE_COMPILED = False
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        _impl = _core_py
        HAVE_COMPILED = False

BACKEND = _impl.BACKEND_NAME
run_block = _impl.run_block


def available_backends() -> dict:
    """Map of backend name to run_block callable, for benchmarks and tests."""
    out = {"python": _core_py.run_block}
    try:
        from . import _core  # type: ignore[attr-defined]

        out["compiled"] = _core.run_block
    except ImportError:
        pass
    return out
