"""Backend selection for the chain kernels.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``LANGEVIN_BACKEND`` is ``python``, the numpy
implementation is used.  Both expose ``affine_chain`` and ``mixture_chain``.
"""
from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def get_backend(name=None):
    """Return the kernel module for ``name`` (``"compiled"``, ``"python"`` or None)."""
    if name is None:
        name = os.environ.get("LANGEVIN_BACKEND", "compiled" if _compiled else "python")
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available; reinstall the package")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    return _compiled is not None


def backend_name(module) -> str:
    return "python" if module is _pykernels else "compiled"


BACKEND_NAME = backend_name(get_backend())
