"""Time the compiled and numpy kernels on bank-shaped training work.

    python benchmarks/bench_kernels.py [--rows 700] [--epochs 20] [--hidden 8]
"""
import argparse
import time

import numpy as np

from crmssl import _backend
from crmssl.mlp import NetworkTopology, init_network, one_hot


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=700)
    ap.add_argument("--features", type=int, default=31)
    ap.add_argument("--hidden", type=int, default=8)
    ap.add_argument("--epochs", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    topo = NetworkTopology(args.features, (args.hidden,), 2)
    net = init_network(topo, 0)
    X = rng.uniform(-1, 1, (args.rows, args.features))
    T = one_hot(rng.integers(0, 2, args.rows), 2)
    orders = [rng.permutation(args.rows).astype(np.intp) for _ in range(args.epochs)]
    sizes = topo.sizes

    backends = {"python": _backend.python_kernels}
    if _backend.cython_kernels is not None:
        backends["cython"] = _backend.cython_kernels

    results = {}
    for name, k in backends.items():
        def epochs():
            p, v = net.params.copy(), np.zeros_like(net.params)
            for order in orders:
                k.train_epoch(p, v, sizes, X, T, order, 0.3, 0.0)
            return p

        def errors():
            for _ in range(args.epochs):
                k.total_error(net.params, sizes, X, T)

        t_train = best_of(epochs, args.repeat)
        t_err = best_of(errors, args.repeat)
        results[name] = t_train
        steps = args.rows * args.epochs
        print(f"{name:>7}: train {t_train:8.4f}s ({1e6 * t_train / steps:7.2f} us/example), "
              f"error pass {t_err:8.4f}s")
    if len(results) == 2:
        print(f"speedup (train): {results['python'] / results['cython']:.1f}x")
    print(f"active backend: {_backend.BACKEND}")


if __name__ == "__main__":
    main()
