#!/usr/bin/env python3
"""Benchmark the compiled training kernel against the NumPy fallback.

Both backends train the same synthetic corpus from the same RNG state, so
besides throughput this also reports how far the two drift apart in floats
(update order is pinned; only rounding may differ).

    python benchmarks/bench_kernels.py [--sentences 20000] [--dim 100]
"""

import argparse
import random
import time

import numpy as np

from wembed.trainer import NoiseTable, pure
from wembed.trainer.pure import rng_init

try:
    from wembed.trainer import _kernels
except ImportError:
    _kernels = None


def synthetic_batch(n_sentences, vocab_size, seed=1):
    rng = random.Random(seed)
    sents = [
        [rng.randrange(vocab_size) for _ in range(3)] for _ in range(n_sentences)
    ]
    data = np.array([t for s in sents for t in s], dtype=np.int32)
    offsets = np.array([0] + list(np.cumsum([len(s) for s in sents])), dtype=np.int32)
    return data, offsets


def run(impl, w_in, w_out, data, offsets, cbow, noise, keep, state):
    t0 = time.perf_counter()
    loss, pairs, centers, _ = impl(
        w_in, w_out, data, offsets, cbow, 1, 5, 0.025, noise.cum, keep, True, state
    )
    elapsed = time.perf_counter() - t0
    return elapsed, loss, pairs, centers


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sentences", type=int, default=20_000)
    parser.add_argument("--vocab", type=int, default=5_000)
    parser.add_argument("--dim", type=int, default=100)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    data, offsets = synthetic_batch(args.sentences, args.vocab, args.seed)
    counts = np.arange(args.vocab, 0, -1)
    noise = NoiseTable(counts.tolist())
    total = 3 * args.sentences
    keep = np.minimum(1.0, (np.sqrt(counts / total / 1e-3) + 1) * 1e-3 * total / counts)
    state = rng_init(args.seed, 0)
    rs = np.random.RandomState(args.seed)
    init_in = ((rs.rand(args.vocab, args.dim) - 0.5) / args.dim).astype(np.float32)

    backends = [("python (numpy)", pure.train_batch)]
    if _kernels is not None:
        backends.append(("compiled (cython)", _kernels.train_batch))
    else:
        print("compiled extension not built; benchmarking the fallback only")

    print(f"corpus: {args.sentences} sentences x 3 tokens, vocab {args.vocab}, dim {args.dim}")
    print(f"{'backend':<20} {'algorithm':<10} {'tokens/s':>12} {'elapsed':>9}")
    results = {}
    for cbow, name in ((True, "cbow"), (False, "sg")):
        for label, impl in backends:
            w_in = init_in.copy()
            w_out = np.zeros_like(w_in)
            elapsed, loss, pairs, centers = run(
                impl, w_in, w_out, data, offsets, cbow, noise, keep, state
            )
            results[(label, name)] = (elapsed, w_in.copy(), w_out.copy())
            print(f"{label:<20} {name:<10} {total / elapsed:>12,.0f} {elapsed:>8.2f}s")

    if _kernels is not None:
        for name in ("cbow", "sg"):
            t_py, in_py, out_py = results[("python (numpy)", name)]
            t_cy, in_cy, out_cy = results[("compiled (cython)", name)]
            drift = max(np.abs(in_py - in_cy).max(), np.abs(out_py - out_cy).max())
            print(f"{name}: speedup x{t_py / t_cy:,.1f}, max |w_python - w_compiled| = {drift:.3g}")


if __name__ == "__main__":
    main()
