"""Compare the numba and numpy kernel backends on featurization and perceptron training.

    python benchmarks/bench_kernels.py --n 20000 --repeat 3
"""
import argparse
import time

import numpy as np

from subreg import _kernels
from subreg.languages import DEFAULT_LEN_RANGE, default_spec, generate_dataset
from subreg.learners import train_perceptron
from subreg.minterm import minterm_features
from subreg.predicates import build_predicate_set


def _best(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000, help="strings per class")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    cases = []
    for tag, params in (("SL", {"k": 3}), ("SP", {"k": 2}), ("LTT", {"k": 2, "tau": 2})):
        spec = default_spec(tag)
        d = generate_dataset(spec, args.n // 2, args.n - args.n // 2, DEFAULT_LEN_RANGE[tag], args.seed)
        P = build_predicate_set(spec.alphabet, tag, **params)
        cases.append((f"featurize {tag} ({len(P)} preds)", lambda P=P, s=d.strings: P.feature_matrix(s)))

    rng = np.random.default_rng(args.seed)
    bits = rng.integers(0, 2, (args.n, 10)).astype(bool)
    X = minterm_features(bits).astype(np.float64)
    y = np.where(rng.random(2 ** 10) < 0.3, 1, -1)[X.argmax(axis=1)]
    cases.append((f"perceptron {X.shape[0]}x{X.shape[1]}", lambda: train_perceptron(X, y, 20, fit_bias=False)[0].weights))

    prev = _kernels.backend()
    print(f"{'case':<34}{'numpy s':>10}{'numba s':>10}{'speedup':>9}  same")
    try:
        for name, fn in cases:
            times, outs = {}, {}
            for b in ("numpy", "numba"):
                _kernels.set_backend(b)
                fn()  # warm-up (JIT compile / caches)
                outs[b], times[b] = _best(fn, args.repeat)
            same = np.array_equal(outs["numpy"], outs["numba"])
            print(f"{name:<34}{times['numpy']:>10.4f}{times['numba']:>10.4f}"
                  f"{times['numpy'] / times['numba']:>8.1f}x  {same}")
    finally:
        _kernels.set_backend(prev)


if __name__ == "__main__":
    main()
