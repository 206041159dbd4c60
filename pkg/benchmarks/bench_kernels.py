"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--nodes 1024] [--repeat 5]

Each kernel is called once on both paths before timing (JIT warm-up) and
the two outputs are compared, so the table also reports the largest
relative disagreement.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from choquard import _kernels
from choquard.grid import build_log_grid
from choquard.riesz import cell_tables


def _best_of(func, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(n_nodes: int):
    rng = np.random.default_rng(0)
    m = 200_000
    r = rng.uniform(0.1, 10.0, m)
    s = r * np.exp(rng.normal(0.0, 0.5, m))
    d = np.abs(r - s)
    yield "angular integral (mu=1.5)", lambda nb: _kernels.angular_integral(r, s, d, 1.5, use_numba=nb)
    yield "angular integral (mu=1.0)", lambda nb: _kernels.angular_integral(r, s, d, 1.0, use_numba=nb)
    u = rng.uniform(0.0, 2.5, m)
    yield "primitive F of exp family", lambda nb: _kernels.exp_primitive(u, 1.0, 2.0, 4.0 * np.pi, use_numba=nb)
    grid = build_log_grid(1e-6, 50.0, n_nodes)
    tables = cell_tables(grid.ratio, n_nodes - 1, 1.0)
    scale = grid.nodes[:-1] ** 3.0
    yield f"kernel scatter (N={n_nodes})", lambda nb: _kernels.scatter_tables(tables, scale, n_nodes, use_numba=nb)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=1024)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if not _kernels._HAVE_NUMBA:
        print("numba is not importable; only the numpy path is available")
        return
    print(f"{'kernel':34s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speed-up':>9s} {'max rel diff':>13s}")
    for name, call in _cases(args.nodes):
        a, b = call(True), call(False)
        scale = np.maximum(np.abs(b), np.finfo(float).tiny)
        diff = float(np.max(np.abs(a - b) / scale))
        t_nb = _best_of(lambda: call(True), args.repeat)
        t_np = _best_of(lambda: call(False), args.repeat)
        print(f"{name:34s} {1e3 * t_nb:11.2f} {1e3 * t_np:11.2f} {t_np / t_nb:9.2f} {diff:13.2e}")


if __name__ == "__main__":
    main()
