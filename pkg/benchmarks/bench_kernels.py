"""Compare the compiled kernels against the pure-Python reference.

Times the jump-matrix assembly entry points on a synthetic element over
a range of degrees.  Run from the repository root:

    python benchmarks/bench_kernels.py [repeats]
"""

import sys
import time

import numpy as np

from frenetife._kernels import _ref
from frenetife.polyquad import gauss_legendre

try:
    from frenetife._kernels import _fast
except ImportError:
    _fast = None


def _workload(backend, m, jtab, pipk, q0, weights):
    backend.atilde(m, jtab, pipk, q0, 0.05, 0.1, weights)
    for j in range(m - 1):
        backend.a_block(j, m, jtab, pipk, q0, 0.05, 0.1, weights)
        for i in range(m + 1):
            backend.b_vec(i, j, jtab, pipk, 0.1, weights)


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    rng = np.random.default_rng(7)
    print(f"{'m':>3} {'python':>12} {'cython':>12} {'speedup':>9}")
    for m in (2, 4, 6, 8, 10):
        n_line = m + 2
        rule = gauss_legendre(n_line)
        jtab = rng.standard_normal((max(m - 1, 0), 3, n_line))
        p = _ref.legendre_table(m, 2, rule.nodes)
        pipk = np.einsum('idr,kr->ikdr', p, p[:, 0])
        q0 = np.ascontiguousarray(
            _ref.q_table(m, m + 2, np.zeros(1))[:, :, 0])
        args = (m, jtab, pipk, q0, rule.weights)
        t_py = _time(lambda: _workload(_ref, *args), repeats)
        if _fast is None:
            print(f"{m:>3} {t_py * 1e6:>10.1f}us {'missing':>12} {'-':>9}")
            continue
        t_cy = _time(lambda: _workload(_fast, *args), repeats)
        print(f"{m:>3} {t_py * 1e6:>10.1f}us {t_cy * 1e6:>10.1f}us "
              f"{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
