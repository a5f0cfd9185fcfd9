"""Pure-numpy evaluation of the exponential-loss objective."""

import numpy as np

NAME = "numpy"


def logsumexp_affine(payoffs, z, shift, coef):
    """log-objective of the split portfolio ``z``.

    Computes G = log sum_k exp(shift_k - coef * (payoffs @ z)_k) together
    with the softmax weights and the gradient dG/dz = -coef * payoffs^T s.
    Max-subtraction keeps the sum finite for any feasible exponent.
    """
    t = shift - coef * (payoffs @ z)
    m = t.max()
    e = np.exp(t - m)
    total = e.sum()
    g = m + np.log(total)
    softmax = e / total
    grad = -coef * (payoffs.T @ softmax)
    return g, softmax, grad
