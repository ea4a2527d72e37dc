"""Pushdown automata, linear bounded automata and Turing machines.

Conventions fixed here and relied on elsewhere:

* PDA stacks are tuples with the top at index 0; a move ``(q', alpha)``
  replaces the popped symbol with ``alpha`` read left to right from the top.
  Acceptance is by final state with the input consumed, any stack.
* LBA tapes are ``<`` + w + ``>``, the head starts on ``<`` (cell 0).
* TM tapes are one-way infinite to the right and grow lazily with blanks;
  a left move on cell 0 leaves the head on cell 0.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import EndmarkerViolation, ValidationError
from .fa import EPS, Trace, _check_word

LEFT_END = "<"
RIGHT_END = ">"
BLANK = "_"
MOVES = ("L", "R")


class Status(str, enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    LOOP = "loop"
    # the engine ran out of its step/configuration budget before deciding
    TIMEOUT = "timeout"
    BUDGET_EXHAUSTED = "timeout"

    @property
    def definitive(self) -> bool:
        return self in (Status.ACCEPT, Status.REJECT, Status.LOOP)


@dataclass(frozen=True)
class TapeSnapshot:
    cells: tuple
    head: int
    step_count: int
    state: str | None = None

    def to_dict(self) -> dict:
        return {"cells": list(self.cells), "head": self.head, "steps": self.step_count,
                "state": self.state}


@dataclass(frozen=True)
class PdaConfig:
    state: str
    index: int
    stack: tuple


@dataclass(frozen=True)
class Verdict:
    """Outcome of running a machine or agent.

    Only the fields relevant to the engine are populated: ``trace`` for
    finite-state and pushdown runs, ``snapshot`` for tape machines, ``path``
    for the configuration chain of an accepting PDA run, ``repeat`` for a
    detected LBA loop as ``(configuration, first_step, repeat_step)``.
    """

    status: Status
    steps: int = 0
    trace: Trace | None = None
    snapshot: TapeSnapshot | None = None
    path: tuple = ()
    repeat: tuple | None = None
    detail: str = ""

    @property
    def accepted(self) -> bool:
        return self.status is Status.ACCEPT

    def to_dict(self) -> dict:
        out = {"status": self.status.value, "steps": self.steps}
        if self.trace is not None:
            out["trace"] = self.trace.to_dict()
        if self.snapshot is not None:
            out["snapshot"] = self.snapshot.to_dict()
        if self.repeat is not None:
            (q, head, cells), first, again = self.repeat
            out["repeat"] = {"state": q, "head": head, "tape": list(cells),
                             "first_step": first, "repeat_step": again}
        if self.detail:
            out["detail"] = self.detail
        return out


# -- PDA ---------------------------------------------------------------------

@dataclass(frozen=True)
class Pda:
    """``delta[(q, a, z)]`` is a set of ``(q', push)`` pairs; ``a``/``z`` may be EPS."""

    states: tuple
    alphabet: tuple
    stack_alphabet: tuple
    delta: Mapping
    start: str
    accept: frozenset
    initial_stack: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "stack_alphabet", tuple(self.stack_alphabet))
        object.__setattr__(self, "accept", frozenset(self.accept))
        object.__setattr__(self, "initial_stack", tuple(self.initial_stack))
        object.__setattr__(self, "delta", {k: frozenset((t, tuple(p)) for t, p in v)
                                           for k, v in dict(self.delta).items() if v})
        problems = []
        sset = set(self.states)
        gamma = set(self.stack_alphabet)
        if self.start not in sset:
            problems.append(f"start: {self.start!r} is not a state")
        if set(self.accept) - sset:
            problems.append(f"accept: {sorted(set(self.accept) - sset)} are not states")
        if EPS in self.alphabet or EPS in gamma:
            problems.append(f"alphabets: {EPS!r} is reserved")
        for z in self.initial_stack:
            if z not in gamma:
                problems.append(f"initial_stack: {z!r} is not a stack symbol")
        for (q, a, z), moves in self.delta.items():
            where = f"delta[{q}, {a}, {z}]"
            if q not in sset:
                problems.append(f"{where}: source is not a state")
            if a != EPS and a not in self.alphabet:
                problems.append(f"{where}: input symbol {a!r} not in alphabet")
            if z != EPS and z not in gamma:
                problems.append(f"{where}: pop symbol {z!r} not in stack alphabet")
            for t, push in moves:
                if t not in sset:
                    problems.append(f"{where}: target {t!r} is not a state")
                for s in push:
                    if s not in gamma:
                        problems.append(f"{where}: push symbol {s!r} not in stack alphabet")
        if problems:
            raise ValidationError(problems, "Pda")

    __hash__ = None

    @classmethod
    def build(cls, states, alphabet, stack_alphabet, transitions: Iterable, start, accept,
              initial_stack=()):
        """Build from ``(src, on, pop, dst, push)`` tuples."""
        delta: dict = {}
        for src, on, pop, dst, push in transitions:
            delta.setdefault((src, on, pop), set()).add((dst, tuple(push)))
        return cls(states, alphabet, stack_alphabet, delta, start, accept, initial_stack)

    def transitions(self):
        for (q, a, z), moves in self.delta.items():
            for t, push in sorted(moves):
                yield q, a, z, t, push

    def moves(self, state, symbol, stack):
        """Successor (state, stack) pairs on ``symbol`` (or EPS) from ``stack``."""
        tops = [EPS] + ([stack[0]] if stack else [])
        for z in tops:
            rest = stack if z == EPS else stack[1:]
            for t, push in self.delta.get((state, symbol, z), ()):
                yield t, push + rest


def _pda_successors(p: Pda, w: tuple, cfg: PdaConfig):
    q, i, stack = cfg.state, cfg.index, cfg.stack
    for t, st in p.moves(q, EPS, stack):
        yield PdaConfig(t, i, st)
    if i < len(w):
        for t, st in p.moves(q, w[i], stack):
            yield PdaConfig(t, i + 1, st)


def run_pda(p: Pda, w: Sequence, budget: int = 100_000) -> Verdict:
    """Breadth-first search over configurations with duplicate suppression.

    ``budget`` bounds the number of configurations expanded. Reject is
    definitive: it is returned only when the frontier empties.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    w = _check_word(p.alphabet, w)
    n = len(w)
    init = PdaConfig(p.start, 0, p.initial_stack)
    parent = {init: None}
    queue = deque([init])
    expanded = 0
    while queue:
        cfg = queue.popleft()
        if cfg.index == n and cfg.state in p.accept:
            path = []
            node = cfg
            while node is not None:
                path.append(node)
                node = parent[node]
            path.reverse()
            trace = Trace(w, tuple(c.state for c in path), True)
            return Verdict(Status.ACCEPT, expanded, trace=trace, path=tuple(path))
        if expanded >= budget:
            return Verdict(Status.BUDGET_EXHAUSTED, expanded,
                           detail=f"{len(parent)} configurations discovered, frontier {len(queue) + 1}")
        expanded += 1
        for nxt in _pda_successors(p, w, cfg):
            if nxt not in parent:
                parent[nxt] = cfg
                queue.append(nxt)
    return Verdict(Status.REJECT, expanded)


def is_deterministic_pda(p: Pda):
    """Return ``(deterministic, conflicts)``.

    A conflict is a pair of moves that can both apply at the same choice
    point: two moves on one ``(q, a, z)``, or moves whose input parts
    overlap (one is an epsilon move) while their stack parts overlap (equal,
    or one pops nothing).
    """
    conflicts = []
    moves = list(p.transitions())
    for i, m1 in enumerate(moves):
        for m2 in moves[i + 1:]:
            if m1[0] != m2[0]:
                continue
            a1, z1 = m1[1], m1[2]
            a2, z2 = m2[1], m2[2]
            inputs_overlap = a1 == a2 or a1 == EPS or a2 == EPS
            stacks_overlap = z1 == z2 or z1 == EPS or z2 == EPS
            if inputs_overlap and stacks_overlap:
                conflicts.append((m1, m2))
    return not conflicts, conflicts


# -- Turing machines ---------------------------------------------------------

@dataclass(frozen=True)
class Tm:
    """Deterministic single-tape TM; ``delta[(q, x)] = (q', y, move)``."""

    states: tuple
    alphabet: tuple
    tape_alphabet: tuple
    delta: Mapping
    start: str
    accept_state: str
    reject_state: str
    blank: str = BLANK
    completed: int = field(default=0, compare=False)

    def __post_init__(self):
        for name in ("states", "alphabet", "tape_alphabet"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "delta", {k: tuple(v) for k, v in dict(self.delta).items()})
        problems = []
        sset = set(self.states)
        gamma = set(self.tape_alphabet)
        for name in ("start", "accept_state", "reject_state"):
            if getattr(self, name) not in sset:
                problems.append(f"{name}: {getattr(self, name)!r} is not a state")
        if self.accept_state == self.reject_state:
            problems.append("accept_state and reject_state must differ")
        if not set(self.alphabet) <= gamma:
            problems.append("alphabet must be a subset of tape_alphabet")
        if self.blank not in gamma:
            problems.append(f"blank {self.blank!r} must be in tape_alphabet")
        if self.blank in self.alphabet:
            problems.append(f"blank {self.blank!r} must not be an input symbol")
        halting = {self.accept_state, self.reject_state}
        for q in self.states:
            if q in halting:
                continue
            for x in self.tape_alphabet:
                if (q, x) not in self.delta:
                    problems.append(f"delta: missing transition ({q!r}, {x!r})")
        for (q, x), (t, y, d) in self.delta.items():
            if q not in sset or x not in gamma:
                problems.append(f"delta: entry ({q!r}, {x!r}) outside Q x Gamma")
            if t not in sset:
                problems.append(f"delta: target {t!r} is not a state")
            if y not in gamma:
                problems.append(f"delta: written symbol {y!r} not in tape alphabet")
            if d not in MOVES:
                problems.append(f"delta: move {d!r} must be L or R")
        if problems:
            raise ValidationError(problems, type(self).__name__)

    __hash__ = None

    @classmethod
    def build(cls, states, alphabet, tape_alphabet, transitions: Iterable, start,
              accept_state, reject_state, blank=BLANK):
        """Build from ``(src, read, dst, write, move)`` tuples.

        Missing moves on non-halting states go to the reject state (the
        symbol is rewritten unchanged and the head moves right); the number of
        completed entries is kept in ``completed``.
        """
        delta = {(q, x): (t, y, d) for q, x, t, y, d in transitions}
        n = 0
        for q in states:
            if q in (accept_state, reject_state):
                continue
            for x in tape_alphabet:
                if (q, x) not in delta:
                    delta[(q, x)] = (reject_state, x, "R")
                    n += 1
        return cls(states, alphabet, tape_alphabet, delta, start, accept_state, reject_state,
                   blank, completed=n)

    def transitions(self):
        for (q, x), (t, y, d) in self.delta.items():
            yield q, x, t, y, d

    @property
    def halting(self):
        return (self.accept_state, self.reject_state)


def run_tm(t: Tm, w: Sequence, budget: int = 10_000) -> Verdict:
    """Execute at most ``budget`` steps; TIMEOUT carries the last snapshot."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    w = _check_word(t.alphabet, w)
    cells = list(w) or [t.blank]
    head = 0
    q = t.start
    steps = 0
    while q not in t.halting and steps < budget:
        q, y, d = t.delta[(q, cells[head])]
        cells[head] = y
        if d == "R":
            head += 1
            if head == len(cells):
                cells.append(t.blank)
        elif head > 0:
            head -= 1
        steps += 1
    snap = TapeSnapshot(tuple(cells), head, steps, q)
    if q == t.accept_state:
        return Verdict(Status.ACCEPT, steps, snapshot=snap)
    if q == t.reject_state:
        return Verdict(Status.REJECT, steps, snapshot=snap)
    return Verdict(Status.TIMEOUT, steps, snapshot=snap)


# -- LBA ---------------------------------------------------------------------

@dataclass(frozen=True)
class Lba:
    """Deterministic linear bounded automaton over the tape ``< w >``.

    ``tape_alphabet`` excludes the endmarkers. Missing moves halt and reject.
    """

    states: tuple
    alphabet: tuple
    tape_alphabet: tuple
    delta: Mapping
    start: str
    accept_state: str
    reject_state: str

    def __post_init__(self):
        for name in ("states", "alphabet", "tape_alphabet"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "delta", {k: tuple(v) for k, v in dict(self.delta).items()})
        problems = []
        ends = []
        sset = set(self.states)
        gamma = set(self.tape_alphabet)
        full = gamma | {LEFT_END, RIGHT_END}
        for name in ("start", "accept_state", "reject_state"):
            if getattr(self, name) not in sset:
                problems.append(f"{name}: {getattr(self, name)!r} is not a state")
        if self.accept_state == self.reject_state:
            problems.append("accept_state and reject_state must differ")
        if LEFT_END in gamma or RIGHT_END in gamma:
            problems.append("tape_alphabet must not contain the endmarkers")
        if not set(self.alphabet) <= gamma:
            problems.append("alphabet must be a subset of tape_alphabet")
        for (q, x), (t, y, d) in self.delta.items():
            where = f"delta[{q}, {x}]"
            if q not in sset or x not in full:
                problems.append(f"{where}: entry outside Q x Gamma")
            if t not in sset:
                problems.append(f"{where}: target {t!r} is not a state")
            if d not in MOVES:
                problems.append(f"{where}: move {d!r} must be L or R")
            if x == LEFT_END and (y != LEFT_END or d != "R"):
                ends.append(f"{where}: must rewrite '<' and move R, got ({y!r}, {d!r})")
            elif x == RIGHT_END and (y != RIGHT_END or d != "L"):
                ends.append(f"{where}: must rewrite '>' and move L, got ({y!r}, {d!r})")
            elif x in gamma and y not in gamma:
                ends.append(f"{where}: writes {y!r}, which is an endmarker or unknown")
        if problems:
            raise ValidationError(problems + ends, "Lba")
        if ends:
            raise EndmarkerViolation(ends, "Lba")

    __hash__ = None

    @classmethod
    def build(cls, states, alphabet, tape_alphabet, transitions: Iterable, start,
              accept_state, reject_state):
        delta = {(q, x): (t, y, d) for q, x, t, y, d in transitions}
        return cls(states, alphabet, tape_alphabet, delta, start, accept_state, reject_state)

    def transitions(self):
        for (q, x), (t, y, d) in self.delta.items():
            yield q, x, t, y, d

    def config_bound(self, n: int) -> int:
        return configuration_bound(len(self.states), len(self.tape_alphabet), n)


def configuration_bound(n_states: int, n_tape: int, n: int) -> int:
    """Distinct LBA configurations on an input of length ``n``: |Q| (n+2) |Gamma|^n."""
    return n_states * (n + 2) * n_tape**n


def lba_initial(l: Lba, w: Sequence):
    w = _check_word(l.alphabet, w)
    return (l.start, 0, (LEFT_END,) + w + (RIGHT_END,))


def lba_step(l: Lba, config):
    """One move from ``(state, head, cells)``; None when no move is defined."""
    q, head, cells = config
    move = l.delta.get((q, cells[head]))
    if move is None:
        return None
    t, y, d = move
    new_head = head + (1 if d == "R" else -1)
    if not 0 <= new_head < len(cells):
        raise EndmarkerViolation([f"head left the tape at step from {config!r}"], "Lba")
    if cells[head] in (LEFT_END, RIGHT_END) and y != cells[head]:
        raise EndmarkerViolation([f"overwrote endmarker at cell {head}"], "Lba")
    if y != cells[head]:
        cells = cells[:head] + (y,) + cells[head + 1:]
    return (t, new_head, cells)


def _lba_halted(l: Lba, config, steps: int):
    q = config[0]
    snap = TapeSnapshot(config[2], config[1], steps, q)
    if q == l.accept_state:
        return Verdict(Status.ACCEPT, steps, snapshot=snap)
    if q == l.reject_state:
        return Verdict(Status.REJECT, steps, snapshot=snap)
    return Verdict(Status.REJECT, steps, snapshot=snap, detail="no move defined")


def _find_cycle(l: Lba, init):
    """Floyd cycle detection on the deterministic configuration sequence.

    Returns ``(config, mu, mu + lam)``: the first repeated configuration and
    the two step indices at which it occurs.
    """
    tort = lba_step(l, init)
    hare = lba_step(l, tort)
    while tort != hare:
        tort = lba_step(l, tort)
        hare = lba_step(l, lba_step(l, hare))
    mu = 0
    tort = init
    while tort != hare:
        tort = lba_step(l, tort)
        hare = lba_step(l, hare)
        mu += 1
    lam = 1
    hare = lba_step(l, tort)
    while tort != hare:
        hare = lba_step(l, hare)
        lam += 1
    return tort, mu, mu + lam


def run_lba(l: Lba, w: Sequence, memo: bool = True) -> Verdict:
    """Simulate on ``< w >`` and decide acceptance, rejection or looping.

    LOOP is returned on an exact configuration repetition (with ``memo``)
    or once the step count exceeds the configuration bound. Either way the
    verdict carries a repeated configuration with both step indices.
    """
    config = lba_initial(l, w)
    n = len(config[2]) - 2
    bound = l.config_bound(n)
    seen = {} if memo else None
    steps = 0
    while True:
        assert 0 <= config[1] <= n + 1
        if config[0] in (l.accept_state, l.reject_state):
            return _lba_halted(l, config, steps)
        if seen is not None:
            if config in seen:
                return Verdict(Status.LOOP, steps, repeat=(config, seen[config], steps),
                               detail="configuration repeated")
            seen[config] = steps
        if steps > bound:
            cfg, first, again = _find_cycle(l, lba_initial(l, w))
            return Verdict(Status.LOOP, steps, repeat=(cfg, first, again),
                           detail=f"step count exceeded configuration bound {bound}")
        nxt = lba_step(l, config)
        if nxt is None:
            return _lba_halted(l, config, steps)
        config = nxt
        steps += 1


def replay_lba(l: Lba, w: Sequence, steps: int):
    """Configuration after exactly ``steps`` moves (None if the machine halts earlier)."""
    config = lba_initial(l, w)
    for _ in range(steps):
        config = lba_step(l, config)
        if config is None:
            return None
    return config
