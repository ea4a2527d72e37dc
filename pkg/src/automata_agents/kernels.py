"""Numeric inner loops.

Every kernel exists twice: a ``*_numba`` version compiled with numba and a
``*_numpy`` version written with vectorised numpy. Both must return
identical arrays; ``tests/test_kernels.py`` checks this and
``benchmarks/bench_kernels.py`` times them. Public callers go through the
undecorated dispatch names at the bottom of the module.

Word indexing convention: all words of length 0..max_len over an alphabet
of size k are laid out in shortlex order, so the word at offset ``j`` of
level ``L`` has parent ``j // k`` at level ``L-1`` and last symbol ``j % k``.
"""

from __future__ import annotations

import numpy as np

from . import _accel


def level_offsets(k: int, max_len: int) -> np.ndarray:
    """Start offset of each length level in the shortlex layout (length max_len+2)."""
    sizes = [k**L for L in range(max_len + 1)]
    return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)


# -- DFA: final state of every word -----------------------------------------

def dfa_word_states_numpy(table: np.ndarray, start: int, max_len: int) -> np.ndarray:
    levels = [np.array([start], dtype=np.int32)]
    for _ in range(max_len):
        levels.append(table[levels[-1]].reshape(-1).astype(np.int32))
    return np.concatenate(levels)


@_accel.njit
def dfa_word_states_numba(table, start, max_len):
    n_sym = table.shape[1]
    total = 0
    size = 1
    for _ in range(max_len + 1):
        total += size
        size *= n_sym
    out = np.empty(total, dtype=np.int32)
    out[0] = start
    prev_lo = 0
    prev_hi = 1
    for _ in range(max_len):
        w = prev_hi
        for j in range(prev_lo, prev_hi):
            q = out[j]
            for a in range(n_sym):
                out[w] = table[q, a]
                w += 1
        prev_lo, prev_hi = prev_hi, w
    return out


# -- NFA: reachable state set (bitmask) after every word ---------------------

def nfa_word_masks_numpy(step: np.ndarray, start_mask: int, max_len: int) -> np.ndarray:
    """``step[q, a]`` is the epsilon-closed successor mask of state q on symbol a."""
    n_states, n_sym = step.shape
    levels = [np.array([start_mask], dtype=np.uint64)]
    for _ in range(max_len):
        prev = levels[-1]
        nxt = np.zeros((prev.shape[0], n_sym), dtype=np.uint64)
        for q in range(n_states):
            has = ((prev >> np.uint64(q)) & np.uint64(1)).astype(bool)
            if has.any():
                nxt[has] |= step[q][None, :]
        levels.append(nxt.reshape(-1))
    return np.concatenate(levels)


@_accel.njit
def nfa_word_masks_numba(step, start_mask, max_len):
    n_states = step.shape[0]
    n_sym = step.shape[1]
    total = 0
    size = 1
    for _ in range(max_len + 1):
        total += size
        size *= n_sym
    out = np.zeros(total, dtype=np.uint64)
    out[0] = start_mask
    prev_lo = 0
    prev_hi = 1
    one = np.uint64(1)
    for _ in range(max_len):
        w = prev_hi
        for j in range(prev_lo, prev_hi):
            m = out[j]
            for a in range(n_sym):
                acc = np.uint64(0)
                for q in range(n_states):
                    if (m >> np.uint64(q)) & one:
                        acc |= step[q, a]
                out[w] = acc
                w += 1
        prev_lo, prev_hi = prev_hi, w
    return out


# -- PFA: probability mass absorbed in the unsafe set over time --------------

def absorbed_mass_numpy(mats: np.ndarray, schedule: np.ndarray, init: np.ndarray,
                        unsafe: np.ndarray) -> np.ndarray:
    """Return ``r`` with ``r[t]`` = P(unsafe visited within t steps), t = 0..len(schedule).

    ``mats[schedule[t]]`` is the row-stochastic matrix used at step t; unsafe
    rows are replaced by identity so unsafe states absorb.
    """
    absorbing = mats.copy()
    idx = np.flatnonzero(unsafe)
    absorbing[:, idx, :] = 0.0
    absorbing[:, idx, idx] = 1.0
    dist = init.astype(np.float64).copy()
    out = np.empty(schedule.shape[0] + 1)
    out[0] = dist[unsafe].sum()
    for t, m in enumerate(schedule):
        dist = dist @ absorbing[m]
        out[t + 1] = dist[unsafe].sum()
    return out


@_accel.njit
def absorbed_mass_numba(mats, schedule, init, unsafe):
    n = init.shape[0]
    dist = init.copy()
    nxt = np.empty(n)
    steps = schedule.shape[0]
    out = np.empty(steps + 1)
    acc = 0.0
    for i in range(n):
        if unsafe[i]:
            acc += dist[i]
    out[0] = acc
    for t in range(steps):
        m = schedule[t]
        for j in range(n):
            nxt[j] = 0.0
        for i in range(n):
            p = dist[i]
            if p == 0.0:
                continue
            if unsafe[i]:
                nxt[i] += p
            else:
                for j in range(n):
                    nxt[j] += p * mats[m, i, j]
        acc = 0.0
        for i in range(n):
            dist[i] = nxt[i]
            if unsafe[i]:
                acc += dist[i]
        out[t + 1] = acc
    return out


# -- Monte-Carlo: first-hit sampling over a cumulative transition table ------

def sample_hits_numpy(cum: np.ndarray, syms: np.ndarray, starts: np.ndarray,
                      uniforms: np.ndarray, unsafe: np.ndarray) -> np.ndarray:
    """Simulate ``trials`` runs; return the step at which each first hit U (-1 if never).

    ``cum[a, q]`` is the cumulative successor distribution of q on symbol a,
    ``syms[t, s]`` the symbol fed at step s of trial t and ``uniforms[t, s]``
    the uniform draw that resolves the successor.
    """
    trials, steps = syms.shape
    state = starts.astype(np.int64).copy()
    hit = np.where(unsafe[state], 0, -1).astype(np.int64)
    for s in range(steps):
        live = hit < 0
        if not live.any():
            break
        rows = cum[syms[live, s], state[live]]
        nxt = (rows <= uniforms[live, s][:, None]).sum(axis=1)
        nxt = np.minimum(nxt, cum.shape[2] - 1)
        state[live] = nxt
        newly = np.zeros(trials, dtype=bool)
        newly[live] = unsafe[nxt]
        hit[newly] = s + 1
    return hit


@_accel.njit
def sample_hits_numba(cum, syms, starts, uniforms, unsafe):
    trials, steps = syms.shape
    n = cum.shape[2]
    hit = np.full(trials, -1, dtype=np.int64)
    for t in range(trials):
        q = starts[t]
        if unsafe[q]:
            hit[t] = 0
            continue
        for s in range(steps):
            u = uniforms[t, s]
            row = cum[syms[t, s], q]
            j = 0
            while j < n - 1 and row[j] <= u:
                j += 1
            q = j
            if unsafe[q]:
                hit[t] = s + 1
                break
    return hit


# -- tape machines: batch simulation of many inputs ------------------------

def tape_run_batch_numpy(nxt, wr, mv, tapes, start, acc, rej, limits):
    """Run one deterministic tape machine on every row of ``tapes`` in parallel.

    ``nxt[q, x]`` is the successor state (-1 = no move), ``wr`` the written
    symbol and ``mv`` the head offset (+1/-1). Each row stops when it enters
    ``acc`` or ``rej``, has no move, or has taken ``limits[row]`` steps.
    Left moves on cell 0 stay on cell 0. Returns ``(status, steps)`` with
    status 1 accept, 0 reject, 2 limit reached. ``tapes`` is modified.
    """
    rows = tapes.shape[0]
    state = np.full(rows, start, dtype=np.int64)
    head = np.zeros(rows, dtype=np.int64)
    steps = np.zeros(rows, dtype=np.int64)
    status = np.full(rows, -1, dtype=np.int64)
    ar = np.arange(rows)
    while True:
        live = status < 0
        status[live & (state == acc)] = 1
        status[live & (state == rej)] = 0
        live = status < 0
        if not live.any():
            break
        idx = ar[live]
        sym = tapes[idx, head[idx]]
        q = state[idx]
        t = nxt[q, sym]
        stuck = t < 0
        status[idx[stuck]] = 0
        out = steps[idx] >= limits[idx]
        status[idx[out & ~stuck]] = 2
        go = ~stuck & ~out
        idx, q, sym, t = idx[go], q[go], sym[go], t[go]
        tapes[idx, head[idx]] = wr[q, sym]
        head[idx] = np.maximum(head[idx] + mv[q, sym], 0)
        state[idx] = t
        steps[idx] += 1
    return status, steps


@_accel.njit
def tape_run_batch_numba(nxt, wr, mv, tapes, start, acc, rej, limits):
    rows = tapes.shape[0]
    status = np.empty(rows, dtype=np.int64)
    steps = np.zeros(rows, dtype=np.int64)
    for r in range(rows):
        q = start
        h = 0
        n = 0
        while True:
            if q == acc:
                status[r] = 1
                break
            if q == rej:
                status[r] = 0
                break
            x = tapes[r, h]
            t = nxt[q, x]
            if t < 0:
                status[r] = 0
                break
            if n >= limits[r]:
                status[r] = 2
                break
            tapes[r, h] = wr[q, x]
            h += mv[q, x]
            if h < 0:
                h = 0
            q = t
            n += 1
        steps[r] = n
    return status, steps


def _pick(numba_fn, numpy_fn):
    return numba_fn if _accel.USE_NUMBA else numpy_fn


dfa_word_states = _pick(dfa_word_states_numba, dfa_word_states_numpy)
nfa_word_masks = _pick(nfa_word_masks_numba, nfa_word_masks_numpy)
absorbed_mass = _pick(absorbed_mass_numba, absorbed_mass_numpy)
sample_hits = _pick(sample_hits_numba, sample_hits_numpy)
tape_run_batch = _pick(tape_run_batch_numba, tape_run_batch_numpy)

IMPLEMENTATIONS = {
    "dfa_word_states": (dfa_word_states_numba, dfa_word_states_numpy),
    "nfa_word_masks": (nfa_word_masks_numba, nfa_word_masks_numpy),
    "absorbed_mass": (absorbed_mass_numba, absorbed_mass_numpy),
    "sample_hits": (sample_hits_numba, sample_hits_numpy),
    "tape_run_batch": (tape_run_batch_numba, tape_run_batch_numpy),
}
