"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--depth 16] [--repeat 3]
"""

import argparse
import time

import numpy as np

from ssact import kernels
from ssact.instance import load_corpus


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--depth", type=int, default=16)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    cl = load_corpus("grigorchuk").closure()
    tables = cl.kernel_tables()
    g = cl.class_of("d")

    rng = np.random.default_rng(0)
    A = rng.integers(0, 4, size=(60, 60)).astype(float)
    B = np.ascontiguousarray(A + np.eye(60))
    x0 = np.full(60, 1 / 60)

    print(f"backends: {', '.join(kernels.BACKENDS)} (default {kernels.BACKEND})")
    print(f"{'kernel':<28}{'backend':<10}{'seconds':>10}")
    baseline = {}
    for label, call in (
        (f"census grigorchuk d={args.depth}", lambda k: k.fixed_path_census(*tables, g, args.depth)),
        ("power iteration 60x60", lambda k: k.power_iterate(B, x0, 1e-13, 100000)),
    ):
        outputs = {}
        for name, impl in kernels.BACKENDS.items():
            seconds, outputs[name] = best_of(lambda: call(impl), args.repeat)
            baseline.setdefault(label, seconds)
            speedup = baseline[label] / seconds
            print(f"{label:<28}{name:<10}{seconds:>10.4f}  x{speedup:.1f}")
        if "cython" in outputs:
            a, b = outputs["python"], outputs["cython"]
            same = all(np.allclose(x, y, rtol=1e-12) for x, y in zip(a, b))
            print(f"{'':<28}outputs agree: {same}")


if __name__ == "__main__":
    main()
