"""Backend selection for the batched zero-forcing kernel.

The compiled extension is used when it was built; otherwise (or when
``COGMIMO_PURE_PYTHON`` is set to a non-empty value other than ``0``) the
numpy implementation is used.  Both return identical results up to
floating-point rounding.
"""

import os

import numpy as np

from . import _zf_numpy

#: Relative Cholesky pivot floor that marks a trial's estimate as singular.
PIVOT_RTOL = 1e-13

try:
    from . import _zf_kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

_force_python = os.environ.get("COGMIMO_PURE_PYTHON", "") not in ("", "0")

BACKEND = "cython" if (_compiled is not None and not _force_python) else "numpy"


def available_backends():
    return ["numpy"] + (["cython"] if _compiled is not None else [])


def zf_snr_batch(est, err, noise, backend=None):
    """Batched post-ZF SNRs; see :func:`cogmimo._zf_numpy.zf_snr_batch`."""
    backend = backend or BACKEND
    est = np.ascontiguousarray(est, dtype=np.complex128)
    err = np.ascontiguousarray(err, dtype=np.complex128)
    noise = np.ascontiguousarray(np.broadcast_to(noise, (est.shape[0],)), dtype=np.float64)
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        return _compiled.zf_snr_batch(est, err, noise, PIVOT_RTOL)
    if backend == "numpy":
        return _zf_numpy.zf_snr_batch(est, err, noise, PIVOT_RTOL)
    raise ValueError(f"unknown backend {backend!r}")
