"""Backend selection for the numerical hot loops.

The compiled Cython module is used when it was built; otherwise the numpy
implementation in :mod:`athermal._pykernels` takes over transparently.
:func:`get_backend` hands out either implementation explicitly, which is
what the tests and the benchmark use to compare them.
"""

from importlib import import_module

from athermal import _pykernels

try:
    from athermal import _ckernels as _impl

    BACKEND = "cython"
except ImportError:  # extension not built
    _impl = _pykernels
    BACKEND = "python"

_MODULES = {"cython": "athermal._ckernels", "python": "athermal._pykernels"}


def available_backends():
    names = ["python"]
    if BACKEND == "cython":
        names.insert(0, "cython")
    return names


def get_backend(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return _impl
    if name not in _MODULES:
        raise ValueError(f"unknown kernel backend {name!r}")
    return import_module(_MODULES[name])


fisher_sum = _impl.fisher_sum
reflected_step_integral = _impl.reflected_step_integral
qfi_rotated = _impl.qfi_rotated
qfi_fd_gradient = _impl.qfi_fd_gradient
fisher_difference_array = _pykernels.fisher_difference_array
