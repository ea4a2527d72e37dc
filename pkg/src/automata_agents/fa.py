"""Finite automata: DFA, NFA and Mealy machines.

States and symbols are strings. Their declaration order is kept and used
everywhere an ordering is needed (subset labels, product enumeration, word
enumeration), so every construction here is reproducible run to run.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlphabetMismatch, UnknownSymbol, ValidationError

log = logging.getLogger(__name__)

EPS = "eps"
SINK = "__sink__"

Word = Sequence[str]


@dataclass(frozen=True)
class Trace:
    input: tuple
    visited: tuple
    accepted: bool
    outputs: tuple | None = None

    def to_dict(self) -> dict:
        out = {"input": list(self.input), "visited": [_jsonable(v) for v in self.visited],
               "accepted": self.accepted}
        if self.outputs is not None:
            out["outputs"] = list(self.outputs)
        return out


def _jsonable(v):
    return list(v) if isinstance(v, tuple) else v


def _fresh(name: str, taken) -> str:
    while name in taken:
        name = "_" + name
    return name


def _check_common(states, alphabet, start, accept) -> list[str]:
    problems = []
    if len(set(states)) != len(states):
        problems.append("states: duplicate state ids")
    if len(set(alphabet)) != len(alphabet):
        problems.append("alphabet: duplicate symbols")
    if not states:
        problems.append("states: must be non-empty")
    if start not in states:
        problems.append(f"start: {start!r} is not a state")
    extra = set(accept) - set(states)
    if extra:
        problems.append(f"accept: {sorted(extra)} are not states")
    if EPS in alphabet:
        problems.append(f"alphabet: {EPS!r} is reserved for the empty word")
    return problems


@dataclass(frozen=True)
class Dfa:
    """Complete deterministic finite automaton.

    ``labels`` records, for machines produced by the subset construction,
    the NFA state set each DFA state stands for. ``sink`` names the state
    added when a partial transition table was completed by :meth:`build`.
    """

    states: tuple
    alphabet: tuple
    delta: Mapping
    start: str
    accept: frozenset
    labels: Mapping | None = field(default=None, compare=False)
    sink: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "accept", frozenset(self.accept))
        object.__setattr__(self, "delta", dict(self.delta))
        problems = _check_common(self.states, self.alphabet, self.start, self.accept)
        sset = set(self.states)
        for q in self.states:
            for a in self.alphabet:
                if (q, a) not in self.delta:
                    problems.append(f"delta: missing transition ({q!r}, {a!r})")
        for (q, a), t in self.delta.items():
            if q not in sset or a not in self.alphabet:
                problems.append(f"delta: entry ({q!r}, {a!r}) outside Q x Sigma")
            if t not in sset:
                problems.append(f"delta: target {t!r} of ({q!r}, {a!r}) is not a state")
        if problems:
            raise ValidationError(problems, type(self).__name__)

    __hash__ = None

    @classmethod
    def build(cls, states, alphabet, transitions: Iterable, start, accept, **extra):
        """Build from ``(src, symbol, dst)`` triples, completing missing moves.

        Missing entries go to a fresh non-accepting sink state; the sink name
        is stored on the result and the completion is logged.
        """
        states = list(states)
        delta = {}
        for src, sym, dst in transitions:
            delta[(src, sym)] = dst
        missing = [(q, a) for q in states for a in alphabet if (q, a) not in delta]
        sink = None
        if missing:
            sink = _fresh(SINK, set(states))
            states.append(sink)
            for q, a in missing:
                delta[(q, a)] = sink
            for a in alphabet:
                delta[(sink, a)] = sink
            log.info("completed %d missing transition(s) with sink state %r", len(missing), sink)
        return cls(states, alphabet, delta, start, accept, sink=sink, **extra)

    @cached_property
    def index(self):
        """(state index, symbol index, transition table, accept mask) as numpy arrays."""
        qi = {q: i for i, q in enumerate(self.states)}
        ai = {a: i for i, a in enumerate(self.alphabet)}
        table = np.empty((len(self.states), len(self.alphabet)), dtype=np.int32)
        for (q, a), t in self.delta.items():
            table[qi[q], ai[a]] = qi[t]
        acc = np.array([q in self.accept for q in self.states], dtype=bool)
        return qi, ai, table, acc

    def step(self, q, a):
        try:
            return self.delta[(q, a)]
        except KeyError:
            raise UnknownSymbol(a) from None

    def accepts(self, w: Word) -> bool:
        return run_dfa(self, w).accepted

    def transitions(self):
        for q in self.states:
            for a in self.alphabet:
                yield q, a, self.delta[(q, a)]

    def edge_count(self) -> int:
        return len(self.delta)


@dataclass(frozen=True)
class Mealy(Dfa):
    """DFA with an output symbol on every transition."""

    output_alphabet: tuple = ()
    lam: Mapping = field(default_factory=dict)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "output_alphabet", tuple(self.output_alphabet))
        object.__setattr__(self, "lam", dict(self.lam))
        problems = []
        outs = set(self.output_alphabet)
        for key in self.delta:
            if key not in self.lam:
                problems.append(f"lam: no output for {key!r}")
            elif self.lam[key] not in outs:
                problems.append(f"lam: output {self.lam[key]!r} of {key!r} not in output alphabet")
        if problems:
            raise ValidationError(problems, "Mealy")

    @classmethod
    def build(cls, states, alphabet, transitions: Iterable, start, accept, output_alphabet=None,
              idle_output: str = "noop"):
        """Build from ``(src, symbol, dst, out)`` tuples; completion moves emit ``idle_output``."""
        transitions = list(transitions)
        lam = {(s, a): o for s, a, _, o in transitions}
        outs = list(output_alphabet) if output_alphabet is not None else []
        for o in lam.values():
            if o not in outs:
                outs.append(o)
        base = Dfa.build(states, alphabet, [(s, a, d) for s, a, d, _ in transitions], start, accept)
        if base.sink is not None:
            for key in base.delta:
                lam.setdefault(key, idle_output)
            if idle_output not in outs:
                outs.append(idle_output)
        return cls(base.states, base.alphabet, base.delta, base.start, base.accept,
                   sink=base.sink, output_alphabet=outs, lam=lam)

    def as_dfa(self) -> Dfa:
        return Dfa(self.states, self.alphabet, self.delta, self.start, self.accept, sink=self.sink)


@dataclass(frozen=True)
class Nfa:
    """Nondeterministic automaton; ``delta[(q, a)]`` is a set, ``a`` may be :data:`EPS`."""

    states: tuple
    alphabet: tuple
    delta: Mapping
    start: str
    accept: frozenset

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "accept", frozenset(self.accept))
        object.__setattr__(self, "delta", {k: frozenset(v) for k, v in dict(self.delta).items() if v})
        problems = _check_common(self.states, self.alphabet, self.start, self.accept)
        sset = set(self.states)
        for (q, a), targets in self.delta.items():
            if q not in sset:
                problems.append(f"delta: source {q!r} is not a state")
            if a != EPS and a not in self.alphabet:
                problems.append(f"delta: symbol {a!r} is not in the alphabet")
            bad = targets - sset
            if bad:
                problems.append(f"delta: targets {sorted(bad)} of ({q!r}, {a!r}) are not states")
        if problems:
            raise ValidationError(problems, "Nfa")

    __hash__ = None

    @classmethod
    def build(cls, states, alphabet, transitions: Iterable, start, accept):
        delta: dict = {}
        for src, sym, dst in transitions:
            delta.setdefault((src, sym), set()).add(dst)
        return cls(states, alphabet, delta, start, accept)

    def targets(self, q, a) -> frozenset:
        return self.delta.get((q, a), frozenset())

    def closure(self, states: Iterable) -> frozenset:
        """Epsilon closure by worklist fixpoint."""
        seen = set(states)
        work = list(seen)
        while work:
            q = work.pop()
            for t in self.targets(q, EPS):
                if t not in seen:
                    seen.add(t)
                    work.append(t)
        return frozenset(seen)

    def transitions(self):
        for (q, a), targets in self.delta.items():
            for t in sorted(targets, key=self.state_order.__getitem__):
                yield q, a, t

    def edge_count(self) -> int:
        return sum(len(t) for t in self.delta.values())

    @cached_property
    def state_order(self) -> dict:
        return {q: i for i, q in enumerate(self.states)}

    @cached_property
    def step_masks(self):
        """(start mask, epsilon-closed step masks [n, k], accept mask); needs <= 64 states."""
        if len(self.states) > 64:
            raise ValueError("bitmask view supports at most 64 states")
        order = self.state_order
        closures = {q: self.closure([q]) for q in self.states}

        def mask(qs):
            m = 0
            for q in qs:
                m |= 1 << order[q]
            return m

        step = np.zeros((len(self.states), len(self.alphabet)), dtype=np.uint64)
        for q in self.states:
            for j, a in enumerate(self.alphabet):
                tgt = set()
                for t in self.targets(q, a):
                    tgt |= closures[t]
                step[order[q], j] = mask(tgt)
        return mask(closures[self.start]), step, mask(self.accept)

    def accepts(self, w: Word) -> bool:
        return nfa_accepts(self, w)


def _check_word(alphabet, w) -> tuple:
    w = tuple(w)
    sigma = set(alphabet)
    for i, a in enumerate(w):
        if a not in sigma:
            raise UnknownSymbol(a, i)
    return w


def run_dfa(dfa: Dfa, w: Word) -> Trace:
    w = _check_word(dfa.alphabet, w)
    q = dfa.start
    visited = [q]
    for a in w:
        q = dfa.delta[(q, a)]
        visited.append(q)
    return Trace(w, tuple(visited), q in dfa.accept)


def run_mealy(m: Mealy, w: Word) -> Trace:
    w = _check_word(m.alphabet, w)
    q = m.start
    visited = [q]
    outputs = []
    for a in w:
        outputs.append(m.lam[(q, a)])
        q = m.delta[(q, a)]
        visited.append(q)
    return Trace(w, tuple(visited), q in m.accept, tuple(outputs))


def nfa_accepts(nfa: Nfa, w: Word) -> bool:
    """Direct nondeterministic search: depth-first over (state, position) pairs.

    Kept independent of the subset construction so it can serve as its oracle.
    """
    w = _check_word(nfa.alphabet, w)
    seen = set()
    stack = [(nfa.start, 0)]
    while stack:
        q, i = stack.pop()
        if (q, i) in seen:
            continue
        seen.add((q, i))
        if i == len(w) and q in nfa.accept:
            return True
        for t in nfa.targets(q, EPS):
            stack.append((t, i))
        if i < len(w):
            for t in nfa.targets(q, w[i]):
                stack.append((t, i + 1))
    return False


def subset_name(subset, order: Mapping) -> str:
    return "{" + ",".join(sorted(subset, key=order.__getitem__)) + "}"


def nfa_to_dfa(nfa: Nfa) -> Dfa:
    """Subset construction over reachable subsets only.

    Each DFA state is named after its sorted NFA subset, e.g. ``{q0,q2}``;
    the empty subset, when reachable, is the dead state ``{}``.
    """
    order = nfa.state_order
    start = nfa.closure([nfa.start])
    names = {start: subset_name(start, order)}
    queue = deque([start])
    delta = {}
    while queue:
        cur = queue.popleft()
        for a in nfa.alphabet:
            nxt = set()
            for q in cur:
                nxt |= nfa.targets(q, a)
            nxt = nfa.closure(nxt)
            if nxt not in names:
                names[nxt] = subset_name(nxt, order)
                queue.append(nxt)
            delta[(names[cur], a)] = names[nxt]
    accept = {name for s, name in names.items() if s & nfa.accept}
    labels = {name: s for s, name in names.items()}
    return Dfa(list(names.values()), nfa.alphabet, delta, names[start], accept, labels=labels)


def dfa_to_nfa(dfa: Dfa) -> Nfa:
    return Nfa(dfa.states, dfa.alphabet, {(q, a): {t} for (q, a), t in dfa.delta.items()},
               dfa.start, dfa.accept)


PRODUCT_MODES = ("intersection", "union", "difference", "xor")


def pair_name(qa, qb) -> str:
    return f"({qa},{qb})"


def dfa_product(a: Dfa, b: Dfa, mode: str = "intersection") -> Dfa:
    """Reachable product automaton; ``mode`` picks the acceptance combination.

    ``xor`` (symmetric difference) is used internally by equivalence checking.
    """
    if mode not in PRODUCT_MODES:
        raise ValueError(f"mode must be one of {PRODUCT_MODES}")
    if set(a.alphabet) != set(b.alphabet):
        raise AlphabetMismatch(a.alphabet, b.alphabet)
    start = (a.start, b.start)
    seen = {start: pair_name(*start)}
    queue = deque([start])
    delta = {}
    while queue:
        qa, qb = cur = queue.popleft()
        for s in a.alphabet:
            nxt = (a.delta[(qa, s)], b.delta[(qb, s)])
            if nxt not in seen:
                seen[nxt] = pair_name(*nxt)
                queue.append(nxt)
            delta[(seen[cur], s)] = seen[nxt]
    rule = {
        "intersection": lambda x, y: x and y,
        "union": lambda x, y: x or y,
        "difference": lambda x, y: x and not y,
        "xor": lambda x, y: x != y,
    }[mode]
    accept = {name for (qa, qb), name in seen.items() if rule(qa in a.accept, qb in b.accept)}
    return Dfa(list(seen.values()), a.alphabet, delta, seen[start], accept)
