"""Time the numba and numpy backends of the subset kernels.

    python benchmarks/bench_kernels.py [--max-p 16] [--batch 8] [--repeat 5]

Each row is the best of ``--repeat`` runs on a random connected curve with
``p`` components; the first numba call is made beforehand so compile time is
excluded.  Both backends are also checked for identical output.
"""
import argparse
import time

import numpy as np

from jacobel import kernels


def random_adjacency(p, rng):
    adj = np.zeros((p, p), dtype=np.int64)
    for k in range(1, p):
        j = int(rng.integers(0, k))
        adj[j, k] += 1
        adj[k, j] += 1
    for _ in range(p):
        i, j = (int(x) for x in rng.integers(0, p, size=2))
        adj[i, j] += 1
        if i != j:
            adj[j, i] += 1
    return adj


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-p", type=int, default=4)
    ap.add_argument("--max-p", type=int, default=16)
    ap.add_argument("--batch", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not kernels.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(args.seed)
    warm = random_adjacency(3, rng)
    kernels.beta_table(np.ones((1, 3)), warm, 2, backend="numba")
    kernels.connected_masks(warm, backend="numba")

    print(f"{'kernel':<16}{'p':>4}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for p in range(args.min_p, args.max_p + 1, 2):
        adj = random_adjacency(p, rng)
        w = rng.integers(-5, 6, size=(args.batch, p))
        cases = {
            "beta_table": lambda b: kernels.beta_table(w, adj, 3, backend=b),
            "connected": lambda b: kernels.connected_masks(adj, backend=b),
        }
        for name, run in cases.items():
            t_np, out_np = best_of(lambda: run("numpy"), args.repeat)
            t_nb, out_nb = best_of(lambda: run("numba"), args.repeat)
            if not np.array_equal(out_np, out_nb):
                raise SystemExit(f"{name} backends disagree at p={p}")
            print(f"{name:<16}{p:>4}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}"
                  f"{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
