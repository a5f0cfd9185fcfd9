"""Backend dispatch for the objective kernels.

The HEDGEDESK_BACKEND environment variable selects the implementation:
``numba`` (default when importable), ``numpy``, or ``auto``. Both backends
share signatures and produce matching values; ``benchmarks/bench_kernels.py``
compares their speed.
"""

import os

from . import numpy_backend

_active = None


def _load(name: str):
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        from . import numba_backend

        return numba_backend
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    choice = os.environ.get("HEDGEDESK_BACKEND", "auto").strip().lower()
    if choice in ("auto", ""):
        try:
            return _load("numba")
        except ImportError:
            return numpy_backend
    return _load(choice)


def active_backend():
    global _active
    if _active is None:
        _active = _select()
    return _active


def active_backend_name() -> str:
    return active_backend().NAME


def use_backend(name: str):
    """Force a backend (used by the benchmark and backend-parity tests)."""
    global _active
    _active = _load(name)
    return _active


def logsumexp_affine(payoffs, z, shift, coef):
    return active_backend().logsumexp_affine(payoffs, z, shift, coef)


def softmax_hessian(payoffs, softmax, grad, coef):
    """Hessian of the log-objective: coef^2 P^T diag(s) P - grad grad^T.

    BLAS matmul dominates here on every backend, so this path is shared.
    """
    import numpy as np

    weighted = payoffs * softmax[:, None]
    hess = (coef * coef) * (payoffs.T @ weighted)
    hess -= np.outer(grad, grad)
    return hess
