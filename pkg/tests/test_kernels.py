from __future__ import annotations

import itertools
import os
import subprocess
import sys

import numpy as np
from hypothesis import given, settings, strategies as st

from automata_agents import _accel, kernels

IMPL = kernels.IMPLEMENTATIONS
seeds = st.integers(0, 2**32 - 1)


def test_every_kernel_has_both_versions():
    for name, (fast, slow) in IMPL.items():
        assert fast.__name__.endswith("_numba") and slow.__name__.endswith("_numpy")
        assert getattr(kernels, name) in (fast, slow)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_dfa_word_states(seed):
    rng = np.random.default_rng(seed)
    n, k, L = rng.integers(1, 5), rng.integers(1, 4), rng.integers(0, 5)
    table = rng.integers(0, n, size=(n, k)).astype(np.int32)
    fast, slow = IMPL["dfa_word_states"]
    a, b = fast(table, 0, L), slow(table, 0, L)
    assert np.array_equal(a, b)
    # oracle: walk each word in shortlex order
    walked = []
    for m in range(L + 1):
        for w in itertools.product(range(k), repeat=m):
            q = 0
            for x in w:
                q = table[q, x]
            walked.append(q)
    assert a.tolist() == walked


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_nfa_word_masks(seed):
    rng = np.random.default_rng(seed)
    n, k, L = rng.integers(1, 6), rng.integers(1, 4), rng.integers(0, 4)
    step = rng.integers(0, 2**n, size=(n, k)).astype(np.uint64)
    fast, slow = IMPL["nfa_word_masks"]
    assert np.array_equal(fast(step, np.uint64(1), L), slow(step, np.uint64(1), L))


def _stochastic(rng, a, n):
    m = rng.random((a, n, n)) * (rng.random((a, n, n)) < 0.7)
    m[..., 0] += 1e-3
    return m / m.sum(axis=2, keepdims=True)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_absorbed_mass(seed):
    rng = np.random.default_rng(seed)
    n, a, h = rng.integers(1, 5), rng.integers(1, 3), rng.integers(0, 20)
    mats = _stochastic(rng, a, n)
    schedule = rng.integers(0, a, size=h).astype(np.int64)
    init = rng.dirichlet(np.ones(n))
    unsafe = rng.random(n) < 0.4
    fast, slow = IMPL["absorbed_mass"]
    assert np.allclose(fast(mats, schedule, init, unsafe), slow(mats, schedule, init, unsafe),
                       atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_sample_hits(seed):
    rng = np.random.default_rng(seed)
    n, a, trials, steps = rng.integers(1, 5), rng.integers(1, 3), 50, rng.integers(1, 15)
    cum = np.cumsum(_stochastic(rng, a, n), axis=2)
    cum[..., -1] = 1.0
    syms = rng.integers(0, a, size=(trials, steps)).astype(np.int64)
    starts = rng.integers(0, n, size=trials).astype(np.int64)
    uniforms = rng.random((trials, steps))
    unsafe = rng.random(n) < 0.4
    fast, slow = IMPL["sample_hits"]
    assert np.array_equal(fast(cum, syms, starts, uniforms, unsafe),
                          slow(cum, syms, starts, uniforms, unsafe))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_tape_run_batch(seed):
    rng = np.random.default_rng(seed)
    n, g, rows, width = rng.integers(1, 4) + 2, rng.integers(2, 4), 20, 8
    nxt = rng.integers(-1, n, size=(n, g)).astype(np.int64)
    wr = rng.integers(0, g, size=(n, g)).astype(np.int64)
    mv = rng.choice([-1, 1], size=(n, g)).astype(np.int64)
    tapes = rng.integers(0, g, size=(rows, width)).astype(np.int64)
    limits = np.full(rows, width - 1, dtype=np.int64)  # keeps the head inside the row
    fast, slow = IMPL["tape_run_batch"]
    ta, tb = tapes.copy(), tapes.copy()
    sa, na = fast(nxt, wr, mv, ta, 0, n - 2, n - 1, limits)
    sb, nb = slow(nxt, wr, mv, tb, 0, n - 2, n - 1, limits)
    assert np.array_equal(sa, sb) and np.array_equal(na, nb) and np.array_equal(ta, tb)


def _backend_with(env_value):
    env = dict(os.environ)
    env.pop("AUTOMATA_AGENTS_PURE_NUMPY", None)
    if env_value is not None:
        env["AUTOMATA_AGENTS_PURE_NUMPY"] = env_value
    code = "from automata_agents import _accel, kernels; " \
           "print(_accel.backend(), kernels.dfa_word_states.__name__)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return out.stdout.split()


def test_env_var_selects_numpy():
    assert _backend_with("1") == ["numpy", "dfa_word_states_numpy"]


def test_default_backend():
    expected = "numba" if _accel.HAVE_NUMBA else "numpy"
    assert _backend_with(None) == [expected, f"dfa_word_states_{expected}"]
