"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 20]

Each kernel is called once untimed (numba compiles on first use), then the
best of ``--repeat`` runs is reported along with the speed-up.
"""

import argparse
import time

import numpy as np

from selfadapt import kernels


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    def boxes(n):
        return np.hstack([rng.uniform(0, 1000, (n, 2)), rng.uniform(20, 120, (n, 2))])

    a, b = boxes(400), boxes(400)
    iou = kernels.numpy_kernels.iou_matrix(boxes(60), boxes(60))
    X, y = rng.normal(size=(128, 64)), rng.random(128)
    w, sw = rng.normal(size=64), np.ones(128)
    return {
        "iou_matrix 400x400": lambda k: k.iou_matrix(a, b),
        "greedy_link 60x60": lambda k: k.greedy_link(iou, 0.3),
        "greedy_match 60x60": lambda k: k.greedy_match(iou, 0.3),
        "loss_grad 128x64": lambda k: k.logistic_loss_grad(w, 0.1, X, y, sw, 1e-7),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()
    if kernels.numba_kernels is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numpy (us)':>12}{'numba (us)':>12}{'speed-up':>10}")
    for name, call in cases(rng).items():
        t_np = best_of(lambda: call(kernels.numpy_kernels), args.repeat)
        t_nb = best_of(lambda: call(kernels.numba_kernels), args.repeat)
        print(f"{name:<22}{t_np * 1e6:>12.1f}{t_nb * 1e6:>12.1f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
