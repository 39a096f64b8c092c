"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy kernels.
Set ``CRMSSL_BACKEND=python`` to force the fallback.
"""
import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _ckernels as cython_kernels
except ImportError:  # extension not built
    cython_kernels = None

if os.environ.get("CRMSSL_BACKEND", "").lower() == "python" or cython_kernels is None:
    kernels = _pykernels
else:
    kernels = cython_kernels

BACKEND = kernels.NAME
