"""Compare the numba and numpy envy kernels on random allocation batches.

    python benchmarks/bench_envy_kernels.py [--repeat 5]

Both backends are checked for identical output before timing.  The numba
functions are called once beforehand so that compilation is not timed.
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from ef1restore import kernels
from ef1restore.core import Additive, Generators, Instance, Mode, Table

CASES = [
    # (label, mode, n, m, batch)
    ("additive goods", Mode.GOODS, 6, 20, 4000),
    ("additive chores", Mode.CHORES, 6, 20, 4000),
    ("additive mixed", Mode.MIXED, 4, 17, 4000),
    ("generators", Mode.GOODS, 7, 12, 4000),
    ("table", Mode.GOODS, 3, 10, 4000),
]


def make_instance(rng: random.Random, mode: Mode, n: int, m: int, label: str) -> Instance:
    items = [f"g{k}" for k in range(1, m + 1)]
    if label == "generators":
        vals = []
        for _ in range(n):
            sets = [frozenset(rng.sample(items, rng.randint(1, 3))) for _ in range(rng.randint(2, 6))]
            vals.append(Generators(tuple(sets)))
        return Instance(mode, items, tuple(vals))
    if label == "table":
        vals = []
        for _ in range(n):
            entries = [0] * (1 << m)
            for mask in range(1, 1 << m):
                entries[mask] = max(entries[mask ^ (1 << t)] for t in range(m) if mask >> t & 1) + rng.randint(0, 2)
            vals.append(Table(tuple(items), tuple(entries)))
        return Instance(mode, items, tuple(vals))
    lo, hi = {Mode.GOODS: (0, 9), Mode.CHORES: (-9, 0), Mode.MIXED: (-9, 9)}[mode]
    return Instance(mode, items, tuple(Additive({g: rng.randint(lo, hi) for g in items}) for _ in range(n)))


def random_batch(rng: np.random.Generator, n: int, m: int, size: int) -> np.ndarray:
    owners = rng.integers(0, n, size=(size, m))
    bits = np.left_shift(np.int64(1), np.arange(m, dtype=np.int64))
    return np.stack([(np.where(owners == i, bits, 0)).sum(axis=1) for i in range(n)], axis=1).astype(np.int64)


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    nprng = np.random.default_rng(args.seed)

    print(f"{'case':<16} {'n':>2} {'m':>3} {'batch':>6} {'numpy ms':>10} {'numba ms':>10} {'speed-up':>9}")
    for label, mode, n, m, size in CASES:
        inst = make_instance(rng, mode, n, m, label)
        cv = inst.compiled
        B = random_batch(nprng, n, m, size)
        km = {Mode.GOODS: kernels.GOODS, Mode.CHORES: kernels.CHORES, Mode.MIXED: kernels.MIXED}[mode]
        a = kernels.envy_tensor_numpy(cv, B, km)
        b = kernels.envy_tensor_numba(cv, B, km)
        if not np.array_equal(a, b):
            raise SystemExit(f"{label}: backends disagree")
        t_np = best_of(lambda: kernels.envy_tensor_numpy(cv, B, km), args.repeat)
        t_nb = best_of(lambda: kernels.envy_tensor_numba(cv, B, km), args.repeat)
        print(f"{label:<16} {n:>2} {m:>3} {size:>6} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
