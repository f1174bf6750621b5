"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_backends.py [--size 256] [--repeat 5] [--json out.json]

Reports per-kernel best-of-N wall time for both backends and a full solve
on a blocked test image, plus the speedup of the compiled path.
"""
import argparse
import json
import sys
import timeit

import numpy as np

from layersplit import SolverConfig, kernels, solve
from layersplit.codec import synthesize_blocking


def test_image(n):
    yy, xx = np.mgrid[0:n, 0:n] / n
    clean = 0.5 + 0.3 * np.sin(yy * 12) * np.cos(xx * 9) + 0.15 * (xx > 0.5)
    return synthesize_blocking(np.clip(clean, 0, 1), 10)


def cases(n, max_iters):
    rng = np.random.default_rng(0)
    field = rng.normal(size=2 * n * n)
    thresholds = rng.random(field.size)
    x3 = rng.normal(size=(n, n, 1))
    out3 = np.empty_like(x3)
    taps = np.array([-1.0, 1.0])
    vecs = [rng.normal(size=2 * n * n) for _ in range(7)]
    c = test_image(n)
    cfg = SolverConfig(max_iters=max_iters, delta=1e-300)

    def uv():
        g, u, v, y1, y2, fi, fa = (a.copy() for a in vecs)
        kernels.uv_step(g, u, v, y1, y2, fi, fa, 0.6, 30.0, 6.0, 0.5, 12.5)

    return {
        "shrink": lambda: kernels.shrink(field, thresholds),
        "circ_filter": lambda: kernels.circ_filter(x3, taps, 0, False, out3),
        "circ_filter_adjoint": lambda: kernels.circ_filter(x3, taps, 0, True, out3),
        "uv_step": uv,
        f"solve_{max_iters}_iters": lambda: solve(c, cfg),
    }


def run(size=256, repeat=5, max_iters=20):
    previous = kernels.BACKEND
    results = {}
    try:
        for backend in sorted(kernels.BACKENDS):
            kernels.use_backend(backend)
            for name, fn in cases(size, max_iters).items():
                fn()  # warm up
                results.setdefault(name, {})[backend] = min(timeit.repeat(fn, number=1, repeat=repeat))
    finally:
        kernels.use_backend(previous)
    return results


def format_table(results):
    backends = sorted({b for r in results.values() for b in r})
    rows = [f"{'kernel':<24}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}"]
    for name, t in results.items():
        speed = t["python"] / t["cython"] if "cython" in t else float("nan")
        rows.append(f"{name:<24}" + "".join(f"{t[b] * 1e3:>10.2f}ms" for b in backends) + f"{speed:>9.2f}x")
    return "\n".join(rows)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--max-iters", type=int, default=20)
    p.add_argument("--json")
    args = p.parse_args(argv)
    results = run(args.size, args.repeat, args.max_iters)
    print(f"image {args.size}x{args.size}, best of {args.repeat}; available backends: {sorted(kernels.BACKENDS)}")
    print(format_table(results))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
