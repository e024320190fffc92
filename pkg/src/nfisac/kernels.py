"""Backend selection for the belief-filter hot loops.

The compiled Cython module is used when it was built; otherwise the NumPy
fallback is imported. Set ``NFISAC_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("NFISAC_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

gaussian_kernel = _impl.gaussian_kernel
predict_reflect = _impl.predict_reflect
posterior_update = _impl.posterior_update
entropy_bits = _impl.entropy_bits

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "gaussian_kernel",
    "predict_reflect",
    "posterior_update",
    "entropy_bits",
]
