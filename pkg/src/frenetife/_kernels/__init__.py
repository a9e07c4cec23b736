"""Per-element assembly kernels with a compiled and a numpy backend.

The compiled extension is preferred when it importable; set the
environment variable ``FRENETIFE_KERNELS`` to ``python`` or ``cython``
to force one backend (``cython`` raises if the extension is missing).
"""

import os

_choice = os.environ.get("FRENETIFE_KERNELS", "auto")
if _choice not in ("auto", "cython", "python"):
    raise ValueError(
        f"FRENETIFE_KERNELS must be auto, cython or python, got {_choice!r}")

if _choice in ("auto", "cython"):
    try:
        from . import _fast as _impl
    except ImportError:
        if _choice == "cython":
            raise
        from . import _ref as _impl
else:
    from . import _ref as _impl

BACKEND = _impl.BACKEND
legendre_zero = _impl.legendre_zero
legendre_table = _impl.legendre_table
q_table = _impl.q_table
b_vec = _impl.b_vec
a_block = _impl.a_block
atilde = _impl.atilde

__all__ = ["BACKEND", "legendre_zero", "legendre_table", "q_table",
           "b_vec", "a_block", "atilde"]
