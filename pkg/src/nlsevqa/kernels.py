"""Backend selection for the statevector kernels.

The compiled extension is used when it imports; otherwise the numpy module
stands in. ``NLSEVQA_BACKEND=python`` forces the fallback.
"""

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

OP_MATRIX = _pykernels.OP_MATRIX
OP_SWAP = _pykernels.OP_SWAP


def _load(name):
    if name == "python":
        return _pykernels
    try:
        from . import _kernels
    except ImportError:
        if name == "compiled":
            raise
        log.debug("compiled kernels unavailable, using numpy fallback")
        return _pykernels
    return _kernels


backend = _load(os.environ.get("NLSEVQA_BACKEND", "auto"))
BACKEND_NAME = "python" if backend is _pykernels else "compiled"


def get_backend(name):
    """Return the kernel module for ``name`` in {"python", "compiled"}."""
    return _load(name)


def apply_matrix(psi, target, cmask, m):
    backend.apply_matrix(psi, target, cmask, m)


def apply_swap(psi, qa, qb, cmask):
    backend.apply_swap(psi, qa, qb, cmask)


def apply_ops(psi, ops):
    backend.apply_ops(psi, *ops)


def ansatz_state(lam, n, d, sign=1.0):
    return backend.ansatz_state(lam, n, d, sign)


def ansatz_overlap_grad(lam, n, d, target, h=1e-7, exact=False):
    return backend.ansatz_overlap_grad(lam, n, d, target, h, exact)
