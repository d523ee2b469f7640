"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``SSACT_PURE_PYTHON=1`` to force the fallback.  Every importable backend
stays reachable through ``BACKENDS`` for comparison.
"""

import os

from ssact import _pykernels

BACKENDS = {"python": _pykernels}
try:
    from ssact import _ckernels

    BACKENDS["cython"] = _ckernels
except ImportError:  # extension not built
    pass

BACKEND = "python" if os.environ.get("SSACT_PURE_PYTHON") or "cython" not in BACKENDS else "cython"
_impl = BACKENDS[BACKEND]

fixed_path_census = _impl.fixed_path_census
power_iterate = _impl.power_iterate
