"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_kernels_py`` module. Set ``DUALTREE_MATMUL_BACKEND`` to
``python`` or ``compiled`` to force one (``compiled`` fails loudly if the
extension is missing).
"""

import os

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _kernels_py}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels


def _select():
    wanted = os.environ.get("DUALTREE_MATMUL_BACKEND", "auto").lower()
    if wanted == "auto":
        return "compiled" if "compiled" in BACKENDS else "python"
    if wanted not in ("python", "compiled"):
        raise ImportError(f"unknown DUALTREE_MATMUL_BACKEND {wanted!r}")
    if wanted not in BACKENDS:
        raise ImportError("compiled kernels requested but _ckernels is not built")
    return wanted


BACKEND = _select()


def get(name=None):
    """Kernel module for ``name`` (default: the backend chosen at import)."""
    return BACKENDS[name or BACKEND]


def naive_multiply(a, b):
    return get().naive_multiply(a, b)
