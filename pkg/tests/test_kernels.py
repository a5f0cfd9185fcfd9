import os
import subprocess
import sys

import numpy as np
import pytest

from hedgedesk import kernels


def random_case(seed, n_scen=300, n_var=40):
    rng = np.random.default_rng(seed)
    payoffs = np.ascontiguousarray(rng.normal(size=(n_scen, n_var)) * 50.0)
    z = np.abs(rng.normal(size=n_var)) * 3.0
    shift = rng.normal(size=n_scen) - np.log(n_scen)
    return payoffs, z, shift, 2e-5


@pytest.fixture(autouse=True)
def restore_backend():
    yield
    kernels._active = None  # re-select from the environment afterwards


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_backends_agree(seed):
    payoffs, z, shift, coef = random_case(seed)
    g_np, s_np, gr_np = kernels.use_backend("numpy").logsumexp_affine(
        payoffs, z, shift, coef)
    g_nb, s_nb, gr_nb = kernels.use_backend("numba").logsumexp_affine(
        payoffs, z, shift, coef)
    assert g_nb == pytest.approx(g_np, rel=1e-13, abs=1e-13)
    np.testing.assert_allclose(s_nb, s_np, rtol=1e-11, atol=1e-15)
    np.testing.assert_allclose(gr_nb, gr_np, rtol=1e-11, atol=1e-15)


def test_softmax_sums_to_one():
    payoffs, z, shift, coef = random_case(3)
    _, softmax, _ = kernels.logsumexp_affine(payoffs, z, shift, coef)
    assert softmax.sum() == pytest.approx(1.0, abs=1e-12)


def test_overflow_guarded():
    payoffs, z, shift, coef = random_case(4)
    g, softmax, grad = kernels.logsumexp_affine(payoffs, z, shift + 5000.0, coef)
    assert np.isfinite(g) and g > 4000
    assert np.all(np.isfinite(grad))


def test_gradient_matches_finite_differences():
    payoffs, z, shift, coef = random_case(5, n_scen=120, n_var=12)
    backend = kernels.use_backend("numpy")
    _, _, grad = backend.logsumexp_affine(payoffs, z, shift, coef)
    fd = np.empty_like(grad)
    h = 1e-6
    for j in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[j] += h
        zm[j] -= h
        gp, _, _ = backend.logsumexp_affine(payoffs, zp, shift, coef)
        gm, _, _ = backend.logsumexp_affine(payoffs, zm, shift, coef)
        fd[j] = (gp - gm) / (2 * h)
    rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(grad), np.linalg.norm(fd))
    assert rel <= 1e-6


def test_hessian_matches_gradient_differences():
    payoffs, z, shift, coef = random_case(6, n_scen=80, n_var=8)
    backend = kernels.use_backend("numpy")
    _, softmax, grad = backend.logsumexp_affine(payoffs, z, shift, coef)
    hess = kernels.softmax_hessian(payoffs, softmax, grad, coef)
    np.testing.assert_allclose(hess, hess.T, atol=1e-15)
    h = 1e-5
    fd = np.empty_like(hess)
    for j in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[j] += h
        zm[j] -= h
        _, _, gp = backend.logsumexp_affine(payoffs, zp, shift, coef)
        _, _, gm = backend.logsumexp_affine(payoffs, zm, shift, coef)
        fd[:, j] = (gp - gm) / (2 * h)
    np.testing.assert_allclose(hess, fd, rtol=5e-5, atol=1e-12)


def test_env_flag_selects_backend():
    code = ("import hedgedesk.kernels as k; print(k.active_backend_name())")
    for name in ("numpy", "numba"):
        env = dict(os.environ, HEDGEDESK_BACKEND=name)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        assert out.stdout.strip() == name


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.use_backend("cuda")
