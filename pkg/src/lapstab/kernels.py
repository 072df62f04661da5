"""Backend selection for the combinatorial kernels.

The compiled extension ``lapstab._kernels`` is used when it was built;
otherwise, or when ``LAPSTAB_PURE_PYTHON=1`` is set, the pure-Python
versions in ``lapstab._kernels_py`` are used.  Both expose ``rref``,
``max_matching`` and ``walks`` with identical semantics.
"""
import os

from . import _kernels_py

if os.environ.get("LAPSTAB_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

rref = _impl.rref
max_matching = _impl.max_matching
walks = _impl.walks

__all__ = ["BACKEND", "rref", "max_matching", "walks"]
