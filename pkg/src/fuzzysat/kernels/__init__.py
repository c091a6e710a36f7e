"""Hot evaluation kernels.

The numba backend is used when numba imports and ``FUZZYSAT_DISABLE_JIT``
is unset (or "0"); otherwise the vectorized numpy backend. Both modules
stay importable so tests and the benchmark can compare them directly.
"""

import os

from fuzzysat.kernels import _numpy as numpy_backend

try:
    from fuzzysat.kernels import _numba as numba_backend
except ImportError:  # pragma: no cover - numba is optional
    numba_backend = None

JIT_DISABLED = os.environ.get("FUZZYSAT_DISABLE_JIT", "0") not in ("", "0")
JIT_AVAILABLE = numba_backend is not None

backend = numba_backend if (JIT_AVAILABLE and not JIT_DISABLED) else numpy_backend
BACKEND_NAME = "numba" if backend is numba_backend else "numpy"

eval_batch = backend.eval_batch
check_batch = backend.check_batch
havoc_apply = backend.havoc_apply
