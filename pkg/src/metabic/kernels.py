"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``METABIC_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the pure-Python kernels are used. Both expose the same
functions: ``j0``, ``j0_array``, ``dicke_rhs``, ``dicke_rk4``,
``dicke_rk45`` and ``jacobi_eigh``.
"""
from __future__ import annotations

import os

from . import _pykernels as python_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

_force_python = os.environ.get("METABIC_PURE_PYTHON", "0") not in ("", "0")
backend = python_backend if _force_python or compiled_backend is None else compiled_backend
BACKEND = "compiled" if backend is compiled_backend else "python"

j0 = backend.j0
j0_array = backend.j0_array
dicke_rhs = backend.dicke_rhs
dicke_rk4 = backend.dicke_rk4
dicke_rk45 = backend.dicke_rk45
jacobi_eigh = backend.jacobi_eigh


def available_backends():
    """Backends importable in this process, keyed by name."""
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["compiled"] = compiled_backend
    return out
