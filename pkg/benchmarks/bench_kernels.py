"""Benchmark the numba kernels against the pure-numpy fallback.

Times the fused objective/gradient kernel on problem sizes bracketing the
bundled market (1000 scenarios x 168 split variables) and prints a
comparison table. Select the backend at runtime with HEDGEDESK_BACKEND.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from hedgedesk import kernels


def bench(backend_name: str, n_scen: int, n_var: int, repeats: int = 200) -> float:
    backend = kernels.use_backend(backend_name)
    rng = np.random.default_rng(7)
    payoffs = np.ascontiguousarray(rng.normal(size=(n_scen, n_var)) * 100.0)
    z = np.abs(rng.normal(size=n_var))
    shift = rng.normal(size=n_scen) - np.log(n_scen)
    coef = 2e-5
    backend.logsumexp_affine(payoffs, z, shift, coef)  # warm-up / JIT
    t0 = time.perf_counter()
    for _ in range(repeats):
        g, softmax, grad = backend.logsumexp_affine(payoffs, z, shift, coef)
    elapsed = (time.perf_counter() - t0) / repeats
    assert np.isfinite(g) and softmax.size == n_scen and grad.size == n_var
    return elapsed


def main():
    sizes = [(250, 40), (1000, 168), (4000, 168), (1000, 888)]
    print(f"{'scenarios':>10} {'variables':>10} {'numpy (us)':>12} "
          f"{'numba (us)':>12} {'speedup':>8}")
    for n_scen, n_var in sizes:
        t_np = bench("numpy", n_scen, n_var)
        try:
            t_nb = bench("numba", n_scen, n_var)
        except ImportError:
            print(f"{n_scen:>10} {n_var:>10} {t_np * 1e6:>12.1f} {'n/a':>12} {'n/a':>8}")
            continue
        print(f"{n_scen:>10} {n_var:>10} {t_np * 1e6:>12.1f} "
              f"{t_nb * 1e6:>12.1f} {t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
