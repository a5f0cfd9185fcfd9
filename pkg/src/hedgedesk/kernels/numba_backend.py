"""Numba-compiled evaluation of the exponential-loss objective.

Single fused pass over the scenario-payoff matrix; called once per line-search
trial inside the solver, which makes it the hottest loop in the engine.
"""

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True, nogil=True)
def logsumexp_affine(payoffs, z, shift, coef):
    n_scen = payoffs.shape[0]
    projected = np.dot(payoffs, z)  # BLAS matvec; beats hand loops here
    m = -np.inf
    t = np.empty(n_scen)
    for k in range(n_scen):
        t[k] = shift[k] - coef * projected[k]
        if t[k] > m:
            m = t[k]
    total = 0.0
    softmax = np.empty(n_scen)
    for k in range(n_scen):
        softmax[k] = np.exp(t[k] - m)
        total += softmax[k]
    g = m + np.log(total)
    inv = 1.0 / total
    for k in range(n_scen):
        softmax[k] *= inv
    grad = -coef * np.dot(softmax, payoffs)
    return g, softmax, grad
