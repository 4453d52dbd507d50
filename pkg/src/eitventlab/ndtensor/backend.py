"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the numpy
kernels are the fallback. `EITVENTLAB_KERNELS=numpy|cython|auto` overrides,
and tests/benchmarks can switch at runtime via `set_kernel_backend`.
"""

import os

from . import _kernels_numpy

try:
    from . import _convkernels as _compiled
except ImportError:
    _compiled = None

_BACKENDS = {"numpy": _kernels_numpy}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

_active = None


def available_backends():
    return sorted(_BACKENDS)


def set_kernel_backend(name):
    global _active
    if name == "auto":
        name = "cython" if _compiled is not None else "numpy"
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}")
    _active = name
    return _active


def kernel_backend():
    return _active


def kernels():
    return _BACKENDS[_active]


set_kernel_backend(os.environ.get("EITVENTLAB_KERNELS", "auto"))
