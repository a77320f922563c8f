"""Backend selection for the OU hot loops.

The Cython extension is used when it is importable; otherwise the NumPy
fallback is used. Setting ``NVBATH_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _ou_fallback

BACKEND = "python"
_impl = _ou_fallback

if os.environ.get("NVBATH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ou_kernel as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _ou_fallback

ou_paths = _impl.ou_paths
ou_integrals = _impl.ou_integrals


def get_backend(name=None):
    """Return the kernel module for ``name`` ('cython' or 'python'), or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _ou_fallback
    if name == "cython":
        from . import _ou_kernel
        return _ou_kernel
    raise ValueError(f"unknown backend {name!r}")
