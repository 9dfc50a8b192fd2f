"""Hot kernels for tree fitting: compiled extension with a numpy fallback.

The compiled module is preferred when present; set HATEBENCH_PURE_PYTHON=1
to force the fallback (used by the backend-agreement tests and benchmark).
Both backends compute gains with the same expressions in the same order, so
they produce identical trees.
"""

import os

from . import pure as _pure

if os.environ.get("HATEBENCH_PURE_PYTHON"):
    _impl = _pure
    BACKEND = "pure-python"
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure-python"

best_split = _impl.best_split
tree_apply = _impl.tree_apply

__all__ = ["best_split", "tree_apply", "BACKEND", "MIN_GAIN"]

MIN_GAIN = _pure.MIN_GAIN
