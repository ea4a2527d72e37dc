"""Time the numba kernels against their numpy twins.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from automata_agents import _accel
from automata_agents.kernels import IMPLEMENTATIONS


def workloads(rng: np.random.Generator) -> dict:
    n, k = 12, 3
    table = rng.integers(0, n, size=(n, k)).astype(np.int32)
    step = rng.integers(0, 2**n, size=(n, k)).astype(np.uint64)

    mats = rng.random((2, 40, 40))
    mats /= mats.sum(axis=2, keepdims=True)
    schedule = rng.integers(0, 2, size=2000).astype(np.int64)
    init = np.full(40, 1 / 40)
    unsafe = np.zeros(40, dtype=bool)
    unsafe[:3] = True

    trials, steps = 20_000, 100
    cum = np.cumsum(mats, axis=2)
    cum[..., -1] = 1.0
    syms = rng.integers(0, 2, size=(trials, steps)).astype(np.int64)
    starts = rng.integers(3, 40, size=trials).astype(np.int64)
    uniforms = rng.random((trials, steps))

    q, g, rows, width = 8, 3, 4000, 64
    nxt = rng.integers(0, q, size=(q, g)).astype(np.int64)
    wr = rng.integers(0, g, size=(q, g)).astype(np.int64)
    mv = rng.choice([-1, 1], size=(q, g)).astype(np.int64)
    tapes = rng.integers(0, g, size=(rows, width)).astype(np.int64)
    limits = np.full(rows, width - 1, dtype=np.int64)

    return {
        "dfa_word_states": lambda f: f(table, 0, 10),
        "nfa_word_masks": lambda f: f(step, np.uint64(1), 8),
        "absorbed_mass": lambda f: f(mats, schedule, init, unsafe),
        "sample_hits": lambda f: f(cum, syms, starts, uniforms, unsafe),
        "tape_run_batch": lambda f: f(nxt, wr, mv, tapes.copy(), 0, q - 2, q - 1, limits),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    jobs = workloads(np.random.default_rng(args.seed))
    print(f"{'kernel':<18}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, (fast, slow) in IMPLEMENTATIONS.items():
        call = jobs[name]
        call(fast)  # compile outside the timed region
        t_fast = min(timeit.repeat(lambda: call(fast), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: call(slow), number=1, repeat=args.repeat))
        print(f"{name:<18}{t_fast * 1e3:>12.2f}{t_slow * 1e3:>12.2f}{t_slow / t_fast:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
