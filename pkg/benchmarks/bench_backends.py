"""Time the numba-jitted kernels against the pure-numpy fallback.

Runs the hot kernels (fused backward step, forward pass, centroid
distance) on batch-sized arrays from the shipped synthetic scenario,
then a short end-to-end training run, under both backends. Prints a
table with per-call times and the numpy/numba speedup ratio.

The numba path is warmed before timing so JIT compilation is excluded.

Usage:
    python3 benchmarks/bench_backends.py [--repeats N] [--epochs N]
"""

import argparse
import time

import numpy as np

import centroid_reg as cr
from centroid_reg import backend

if not backend.NUMBA_AVAILABLE:
    raise SystemExit("numba is not importable; nothing to compare against")


def best_of(fn, repeats, inner):
    """Best mean-per-call over `repeats` loops of `inner` calls."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def bench_kernels(kern, X, y, C, model, repeats):
    W1, b1, W2, b2 = model.W1, model.b1, model.W2, model.b2
    E, _ = kern.forward(X, W1, b1, W2, b2)
    out = {}
    for batch in (8, 64, 512):
        Xb = np.ascontiguousarray(X[:batch])
        yb = np.ascontiguousarray(y[:batch])
        out[f"backward (batch {batch})"] = best_of(
            lambda: kern.backward(Xb, yb, C, W1, b1, W2, b2, 1e-2), repeats, 200
        )
    out["forward (batch 64)"] = best_of(
        lambda: kern.forward(X[:64], W1, b1, W2, b2), repeats, 200
    )
    out["mean_centroid_distance (600)"] = best_of(
        lambda: kern.mean_centroid_distance(E[:600], y[:600], C), repeats, 200
    )
    out["softmax_rows (64 x 6)"] = best_of(
        lambda: kern.softmax_rows(np.dot(E[:64], W2.T)), repeats, 200
    )
    return out


def bench_train(split, cents, epochs, repeats):
    config = cr.TrainConfig(epochs=epochs)
    return best_of(lambda: cr.train(split, cents, config), repeats, 1)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--epochs", type=int, default=10)
    args = parser.parse_args()

    split, _ = cr.generate(cr.default_scenario())
    cents = cr.compute_class_centroids(split.train)
    X = split.train.features()
    y = split.train.labels()
    C = np.ascontiguousarray(cents.centroids)
    model = cr.RegularizedHeadModel.initialize(
        split.train.dimension, cents.dimension, cents.num_classes, cr.SeededRng(0)
    )

    results = {}
    for name in ("numpy", "numba"):
        with backend.use_backend(name) as kern:
            # warm: first call JIT-compiles the numba kernels
            kern.backward(X[:64], y[:64], C, model.W1, model.b1, model.W2, model.b2, 1e-2)
            cr.train(split, cents, cr.TrainConfig(epochs=1))
            results[name] = bench_kernels(kern, X, y, C, model, args.repeats)
            results[name][f"train {args.epochs} epochs (1200 samples)"] = bench_train(
                split, cents, args.epochs, max(2, args.repeats // 2)
            )

    width = max(len(k) for k in results["numpy"])
    print(f"{'kernel':<{width}}  {'numpy':>12}  {'numba':>12}  {'numpy/numba':>11}")
    for key in results["numpy"]:
        a, b = results["numpy"][key], results["numba"][key]
        unit, scale = ("ms", 1e3) if a >= 1e-3 else ("us", 1e6)
        print(
            f"{key:<{width}}  {a * scale:>10.2f}{unit}  {b * scale:>10.2f}{unit}"
            f"  {a / b:>10.2f}x"
        )


if __name__ == "__main__":
    main()
