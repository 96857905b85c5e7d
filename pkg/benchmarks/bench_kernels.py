"""Compare the numba and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--pairs 5000] [--iterations 1000] [--repeat 3]

Reports the best-of-N wall time for batch edit counts and for bootstrap
resample aggregation, and checks that both backends return identical
results. Compilation happens before timing.
"""

import argparse
import time

import numpy as np

from geezocr import _kernels


def synthetic_corpus(n_pairs, seed):
    rng = np.random.default_rng(seed)
    refs, hyps = [], []
    for _ in range(n_pairs):
        ref = rng.integers(0, 300, int(rng.integers(5, 60)))
        hyp = ref.copy()
        edits = rng.random(len(hyp)) < 0.05
        hyp[edits] = rng.integers(0, 300, int(edits.sum()))
        if rng.random() < 0.2:
            hyp = np.delete(hyp, int(rng.integers(len(hyp))))
        refs.append(ref)
        hyps.append(hyp)

    def pack(seqs):
        off = np.zeros(len(seqs) + 1, dtype=np.int64)
        off[1:] = np.cumsum([len(s) for s in seqs])
        return np.concatenate(seqs).astype(np.int64), off

    return (*pack(refs), *pack(hyps))


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--pairs", type=int, default=5000)
    ap.add_argument("--iterations", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    fr, ro, fh, ho = synthetic_corpus(args.pairs, args.seed)
    rng = np.random.default_rng(args.seed)
    _kernels.batch_counts_numba(fr[:ro[2]], ro[:3], fh[:ho[2]], ho[:3])
    numer = rng.integers(0, 5, args.pairs).astype(np.int64)
    denom = rng.integers(5, 60, args.pairs).astype(np.int64)
    indices = rng.integers(0, args.pairs, (args.iterations, args.pairs))
    _kernels.resample_ratios_numba(indices[:1], numer, denom)

    rows = []
    t_np, c_np = best_of(args.repeat, _kernels.batch_counts_numpy, fr, ro, fh, ho)
    t_nb, c_nb = best_of(args.repeat, _kernels.batch_counts_numba, fr, ro, fh, ho)
    assert np.array_equal(c_np, c_nb)
    rows.append((f"batch edit counts ({args.pairs} pairs)", t_np, t_nb))

    t_np, r_np = best_of(args.repeat, _kernels.resample_ratios_numpy, indices, numer, denom)
    t_nb, r_nb = best_of(args.repeat, _kernels.resample_ratios_numba, indices, numer, denom)
    assert np.array_equal(r_np, r_nb)
    rows.append((f"bootstrap ratios ({args.iterations} x {args.pairs})", t_np, t_nb))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy (s)':>10}  {'numba (s)':>10}  {'speedup':>8}")
    for name, a, b in rows:
        print(f"{name:<{width}}  {a:>10.4f}  {b:>10.4f}  {a / b:>7.1f}x")


if __name__ == "__main__":
    main()
