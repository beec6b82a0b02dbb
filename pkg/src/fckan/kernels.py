"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise the
NumPy kernels take over with identical semantics. Set ``FCKAN_PURE_PYTHON=1``
to force the fallback (useful for the backend-comparison benchmark and for
debugging).
"""

import os

from . import _kernels_py

if os.environ.get("FCKAN_PURE_PYTHON"):
    _active = _kernels_py
else:
    try:
        from . import _kernels_cy as _active  # type: ignore[no-redef]
    except ImportError:
        _active = _kernels_py

BACKEND = _active.BACKEND_NAME
UNARY_KINDS = _active.UNARY_KINDS

unary_values = _active.unary_values
unary_derivs = _active.unary_derivs
bspline_values = _active.bspline_values
bspline_derivs = _active.bspline_derivs
rbf_values = _active.rbf_values
rbf_derivs = _active.rbf_derivs


def backend() -> str:
    """Name of the active backend: 'compiled' or 'python'."""
    return BACKEND


def load_backend(name: str):
    """Return a specific kernel module by name, for side-by-side comparison."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels_cy

        return _kernels_cy
    raise ValueError(f"unknown kernel backend: {name!r}")


def available_backends() -> tuple[str, ...]:
    names = ["python"]
    try:
        from . import _kernels_cy  # noqa: F401

        names.insert(0, "compiled")
    except ImportError:
        pass
    return tuple(names)
