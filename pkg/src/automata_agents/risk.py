"""Quantitative unsafe-reachability for probabilistic finite automata.

Three ways to get a number: exact propagation up to a horizon, an exact
absorbing-chain solve for the unbounded limit, and Monte Carlo sampling
with a Wilson interval. The input model is never implicit; every query
takes a :class:`Policy`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import binomtest

from . import kernels
from .agents import Oracle, RegularAgent, ScriptedOracle, SeededRandomOracle
from .errors import IllConditioned, InvalidModel, UnknownState, UnknownSymbol

log = logging.getLogger(__name__)

TOL = 1e-9
MAX_COND = 1e12
HALT = "__halt__"


@dataclass(frozen=True, eq=False)
class Pfa:
    """States, per-symbol row-stochastic matrices, initial distribution, unsafe set."""

    states: tuple
    alphabet: tuple
    matrices: Mapping[str, np.ndarray]
    initial: np.ndarray
    unsafe: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "unsafe", frozenset(self.unsafe))
        n = len(self.states)
        mats = {a: np.asarray(m, dtype=np.float64) for a, m in self.matrices.items()}
        init = np.asarray(self.initial, dtype=np.float64)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "initial", init)
        problems = []
        if len(set(self.states)) != n:
            problems.append("states: duplicates")
        if set(mats) != set(self.alphabet):
            problems.append(f"matrices: keys {sorted(mats)} differ from alphabet {sorted(self.alphabet)}")
        for a, m in mats.items():
            if m.shape != (n, n):
                problems.append(f"matrices[{a}]: shape {m.shape}, expected {(n, n)}")
                continue
            if (m < 0).any() or (m > 1).any():
                problems.append(f"matrices[{a}]: entries outside [0, 1]")
            bad = np.flatnonzero(np.abs(m.sum(axis=1) - 1.0) > TOL)
            for i in bad:
                problems.append(f"matrices[{a}][{self.states[i]}]: row sums to {m[i].sum()!r}")
        if init.shape != (n,):
            problems.append(f"initial: length {init.shape}, expected {n}")
        elif (init < 0).any() or abs(init.sum() - 1.0) > TOL:
            problems.append(f"initial: not a distribution (sum {init.sum()!r})")
        if self.unsafe - set(self.states):
            problems.append(f"unsafe: {sorted(self.unsafe - set(self.states))} are not states")
        if problems:
            raise InvalidModel(problems, "pfa")

    def __eq__(self, other):
        if not isinstance(other, Pfa):
            return NotImplemented
        return (self.states == other.states and self.alphabet == other.alphabet
                and self.unsafe == other.unsafe and np.array_equal(self.initial, other.initial)
                and all(np.array_equal(self.matrices[a], other.matrices[a]) for a in self.alphabet))

    __hash__ = None

    @property
    def stacked(self) -> np.ndarray:
        return np.stack([self.matrices[a] for a in self.alphabet])

    @property
    def unsafe_mask(self) -> np.ndarray:
        return np.array([q in self.unsafe for q in self.states])

    def with_unsafe(self, unsafe) -> "Pfa":
        return Pfa(self.states, self.alphabet, self.matrices, self.initial, frozenset(unsafe))


@dataclass(frozen=True)
class Policy:
    """How input symbols are chosen: ``uniform``, a fixed ``word`` or a ``stationary`` distribution."""

    kind: str = "uniform"
    word: tuple = ()
    weights: Mapping[str, float] = field(default_factory=dict)

    @classmethod
    def uniform(cls) -> "Policy":
        return cls("uniform")

    @classmethod
    def fixed_word(cls, word: Sequence) -> "Policy":
        return cls("word", tuple(word))

    @classmethod
    def stationary(cls, weights: Mapping[str, float]) -> "Policy":
        return cls("stationary", weights=dict(weights))

    def symbol_probs(self, alphabet: Sequence) -> np.ndarray:
        if self.kind == "uniform":
            return np.full(len(alphabet), 1.0 / len(alphabet))
        if self.kind == "stationary":
            extra = set(self.weights) - set(alphabet)
            if extra:
                raise UnknownSymbol(sorted(extra)[0])
            p = np.array([float(self.weights.get(a, 0.0)) for a in alphabet])
            if (p < 0).any() or abs(p.sum() - 1.0) > TOL:
                raise InvalidModel([f"policy weights sum to {p.sum()!r}, not 1"], "policy")
            return p
        raise ValueError(f"policy {self.kind!r} has no symbol distribution")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "word":
            out["word"] = list(self.word)
        if self.kind == "stationary":
            out["weights"] = dict(self.weights)
        return out


@dataclass(frozen=True)
class RiskReport:
    probability: float
    method: str
    horizon: int | None = None
    trials: int | None = None
    ci: tuple | None = None
    seed: int | None = None
    policy: Policy | None = None
    hits: int | None = None

    def to_dict(self) -> dict:
        out = {"probability": self.probability, "method": self.method}
        for key in ("horizon", "trials", "seed", "hits"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        if self.ci is not None:
            out["ci95"] = list(self.ci)
        if self.policy is not None:
            out["policy"] = self.policy.to_dict()
        return out


def _effective(p: Pfa, policy: Policy) -> np.ndarray:
    w = policy.symbol_probs(p.alphabet)
    return np.tensordot(w, p.stacked, axes=1)


def _word_indices(p: Pfa, word: Sequence) -> np.ndarray:
    idx = {a: i for i, a in enumerate(p.alphabet)}
    for pos, a in enumerate(word):
        if a not in idx:
            raise UnknownSymbol(a, pos)
    return np.array([idx[a] for a in word], dtype=np.int64)


def horizon_curve(p: Pfa, policy: Policy, h: int) -> np.ndarray:
    """``r[t]`` = P(unsafe visited within t steps) for t = 0..h."""
    if h < 0:
        raise ValueError("horizon must be >= 0")
    if policy.kind == "word":
        schedule = _word_indices(p, policy.word[:h])
        mats = p.stacked
    else:
        schedule = np.zeros(h, dtype=np.int64)
        mats = _effective(p, policy)[None, :, :]
    return kernels.absorbed_mass(np.ascontiguousarray(mats), schedule, p.initial, p.unsafe_mask)


def absorbing_solve(p: Pfa, policy: Policy) -> float:
    """Limit probability of ever reaching U, by a linear solve over the states that can reach it."""
    if policy.kind == "word":
        raise ValueError("absorbing mode needs an infinite input model (uniform or stationary)")
    m = _effective(p, policy)
    unsafe = p.unsafe_mask
    if not unsafe.any():
        return 0.0
    # backward reachability to U in the induced chain
    can = unsafe.copy()
    changed = True
    while changed:
        grow = (m[:, can] > 0).any(axis=1) & ~can
        changed = bool(grow.any())
        can |= grow
    trans = np.flatnonzero(can & ~unsafe)
    x = unsafe.astype(np.float64)
    if trans.size:
        a = np.eye(trans.size) - m[np.ix_(trans, trans)]
        b = m[np.ix_(trans, np.flatnonzero(unsafe))].sum(axis=1)
        cond = np.linalg.cond(a)
        if not np.isfinite(cond) or cond > MAX_COND:
            raise IllConditioned(f"absorbing system condition number {cond:.3g} exceeds {MAX_COND:.0e}")
        x[trans] = np.linalg.solve(a, b)
    return float(np.clip(p.initial @ x, 0.0, 1.0))


def risk_reach_probability(p: Pfa, policy: Policy | None = None, mode: str = "horizon",
                           horizon: int | None = None) -> RiskReport:
    """Exact P(reach U): within ``horizon`` steps (``mode='horizon'``) or ever (``'absorbing'``)."""
    policy = policy or Policy.uniform()
    if mode == "horizon":
        if horizon is None:
            raise ValueError("horizon mode needs a horizon")
        prob = float(np.clip(horizon_curve(p, policy, horizon)[-1], 0.0, 1.0))
        return RiskReport(prob, "exact-horizon", horizon=horizon, policy=policy)
    if mode == "absorbing":
        return RiskReport(absorbing_solve(p, policy), "absorbing-solve", policy=policy)
    raise ValueError(f"mode must be 'horizon' or 'absorbing', not {mode!r}")


# -- Monte Carlo -------------------------------------------------------------

def wilson_interval(hits: int, trials: int) -> tuple:
    ci = binomtest(hits, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def _cumulative(p: Pfa) -> np.ndarray:
    cum = np.cumsum(p.stacked, axis=2)
    # pin the tail at 1 from the last reachable successor on, so rounding
    # can never route a draw to a zero-probability state
    for a in range(cum.shape[0]):
        for q in range(cum.shape[1]):
            last = np.flatnonzero(p.stacked[a, q] > 0)[-1]
            cum[a, q, last:] = 1.0
    return cum


def monte_carlo_pfa(p: Pfa, policy: Policy | None = None, trials: int = 10_000,
                    max_steps: int = 100, seed: int = 0) -> RiskReport:
    """Fraction of sampled runs that visit U within ``max_steps``, with a 95% Wilson interval."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    policy = policy or Policy.uniform()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    starts = rng.choice(len(p.states), size=trials, p=p.initial)
    if policy.kind == "word":
        word = _word_indices(p, policy.word[:max_steps])
        syms = np.broadcast_to(word, (trials, word.size)).copy()
    else:
        probs = policy.symbol_probs(p.alphabet)
        syms = rng.choice(len(p.alphabet), size=(trials, max_steps), p=probs)
    uniforms = rng.random(syms.shape)
    hit = kernels.sample_hits(_cumulative(p), syms.astype(np.int64), starts.astype(np.int64),
                              uniforms, p.unsafe_mask)
    k = int((hit >= 0).sum())
    return RiskReport(k / trials, "monte-carlo", horizon=int(syms.shape[1]), trials=trials,
                      ci=wilson_interval(k, trials), seed=seed, policy=policy, hits=k)


def _edge_distribution(oracle: Oracle, state, symbol, edges) -> list:
    if isinstance(oracle, SeededRandomOracle):
        return oracle.distribution(edges)
    if isinstance(oracle, ScriptedOracle):
        raise ValueError("a scripted oracle has no stationary edge distribution")
    chosen = oracle.choose(state, symbol, edges)
    return [1.0 if e == chosen else 0.0 for e in edges]


def agent_to_pfa(agent: RegularAgent, oracle: Oracle | None = None, unsafe=()) -> Pfa:
    """Markov chain induced by an oracle over the agent's declared edges.

    A state with no declared edge on a symbol moves to a fresh absorbing
    halt state: the run stops there, so it can never reach U afterwards.
    """
    oracle = oracle or agent.make_oracle()
    states = list(agent.states)
    stuck = any(not agent.declared(q, a) for q in agent.states for a in agent.alphabet)
    if stuck:
        states.append(HALT)
    idx = {q: i for i, q in enumerate(states)}
    n = len(states)
    mats = {}
    for a in agent.alphabet:
        m = np.zeros((n, n))
        for q in agent.states:
            edges = agent.declared(q, a)
            if not edges:
                m[idx[q], idx[HALT]] = 1.0
                continue
            for e, w in zip(edges, _edge_distribution(oracle, q, a, edges)):
                m[idx[q], idx[e.dst]] += w
        if stuck:
            m[idx[HALT], idx[HALT]] = 1.0
        mats[a] = m
    init = np.zeros(n)
    init[idx[agent.start]] = 1.0
    for q in unsafe:
        if q not in agent.states:
            raise UnknownState(q)
    return Pfa(tuple(states), agent.alphabet, mats, init, frozenset(unsafe))


def monte_carlo_risk(agent: RegularAgent, unsafe, trials: int = 10_000, max_steps: int = 100,
                     seed: int = 0, oracle: Oracle | None = None,
                     policy: Policy | None = None) -> RiskReport:
    """Sampled risk for an oracle-driven agent.

    The oracle's edge distribution is compiled into a chain once; runs are
    then drawn from ``seed`` alone, so reports are reproducible regardless
    of the oracle's own generator state.
    """
    p = agent_to_pfa(agent, oracle, unsafe)
    return monte_carlo_pfa(p, policy, trials, max_steps, seed)
