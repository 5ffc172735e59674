"""Backend selection for the classifier hot kernels.

``CURRICULA_KERNELS`` picks the implementation:

* ``numba`` — jitted loop kernels (the default when numba imports),
* ``numpy`` — the pure-numpy fallback.

Unset, numba is used when available and the numpy twin otherwise. Both
backends share the flat parameter layout documented in numpy_backend.
Results are deterministic within a backend; across backends they agree to
floating-point accumulation order (~1e-12 at the model sizes used here).
"""

from __future__ import annotations

import os
import warnings

from ..errors import ConfigurationError
from . import numpy_backend

_requested = os.environ.get("CURRICULA_KERNELS", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ConfigurationError(
        f"CURRICULA_KERNELS must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    BACKEND = "numpy"
    _impl = numpy_backend
else:
    try:
        from . import numba_backend as _impl

        BACKEND = "numba"
    except ImportError as exc:
        if _requested == "numba":
            raise ConfigurationError(f"CURRICULA_KERNELS=numba but numba is unusable: {exc}")
        warnings.warn(f"numba unavailable ({exc}); falling back to numpy kernels")
        BACKEND = "numpy"
        _impl = numpy_backend

forward_probs = _impl.forward_probs
loss_grad = _impl.loss_grad

__all__ = ["BACKEND", "forward_probs", "loss_grad"]
