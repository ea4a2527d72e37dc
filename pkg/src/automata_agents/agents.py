"""Agents as language acceptors, with perception tokenizer and transition oracles.

Four classes, one per memory discipline:

=====================  ==============  =========================
class                  memory          acceptor semantics
=====================  ==============  =========================
:class:`RegularAgent`  none            finite automaton
:class:`CfAgent`       LIFO stack      pushdown automaton
:class:`CsAgent`       k*|w| tape      linear bounded automaton
:class:`TcAgent`       unbounded tape  Turing machine
=====================  ==============  =========================

The oracle stands in for whatever policy (an LLM, a script, a sampler)
picks the next transition. It only ever sees the current state, the
current symbol and the declared outgoing edges, and whatever it returns is
checked against those edges before the agent moves.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

from .errors import (MemoryBoundViolation, NoDeclaredEdge, OracleViolation, UnknownEvent,
                     UnknownState, UnknownSymbol, ValidationError)
from .fa import EPS, Trace, _check_word
from .machines import LEFT_END, MOVES, RIGHT_END, BLANK, Status, TapeSnapshot, Verdict

DISCIPLINES = ("none", "lifo", "bounded_rw", "arbitrary_rw")


class Edge(NamedTuple):
    src: str
    symbol: str
    dst: str
    action: str | None = None


class CfRule(NamedTuple):
    src: str
    symbol: str
    pop: str
    dst: str
    push: tuple = ()


# -- perception tokenizer ----------------------------------------------------

@dataclass
class Tokenizer:
    """Maps raw events to perception symbols and keeps the last ``kappa`` of them."""

    tau: Mapping[str, str]
    kappa: int = 1
    window: deque = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kappa < 1:
            raise ValidationError("kappa: must be a positive count", "Tokenizer")
        self.tau = dict(self.tau)
        self.window = deque(maxlen=self.kappa)

    @property
    def vocabulary(self):
        return tuple(self.tau)

    def reset(self):
        self.window.clear()


def tokenize_window(tk: Tokenizer, events: Sequence[str]) -> list:
    out = []
    for e in events:
        try:
            sym = tk.tau[e]
        except KeyError:
            raise UnknownEvent(e) from None
        tk.window.append(sym)
        out.append(sym)
    return out


# -- oracles -----------------------------------------------------------------

class Oracle:
    """Chooses one edge among the declared ones. Subclasses override :meth:`choose`."""

    def choose(self, state, symbol, edges: Sequence[Edge]) -> Edge:
        return edges[0]

    def _edge_to(self, state, symbol, dst, edges):
        for e in edges:
            if e.dst == dst:
                return e
        return Edge(state, symbol, dst)


class TableOracle(Oracle):
    def __init__(self, table: Mapping | None = None):
        self.table = dict(table or {})

    def choose(self, state, symbol, edges):
        dst = self.table.get((state, symbol))
        if dst is None:
            return edges[0]
        return self._edge_to(state, symbol, dst, edges)


class ScriptedOracle(Oracle):
    """Replays a fixed list of proposals (target states or whole edges)."""

    def __init__(self, script: Sequence):
        self.script = list(script)
        self.pos = 0

    def choose(self, state, symbol, edges):
        if self.pos >= len(self.script):
            return edges[0]
        item = self.script[self.pos]
        self.pos += 1
        if isinstance(item, Edge) or hasattr(item, "_fields"):
            return item
        if isinstance(item, (tuple, list)):
            return Edge(*item)
        return self._edge_to(state, symbol, item, edges)


class SeededRandomOracle(Oracle):
    """Samples among declared edges, uniformly unless ``weights`` says otherwise.

    ``weights`` maps ``(src, symbol, dst)`` to a non-negative weight; edges
    not listed weigh 1.
    """

    def __init__(self, seed: int = 0, weights: Mapping | None = None):
        self.seed = seed
        self.weights = dict(weights or {})
        self.rng = random.Random(seed)

    def distribution(self, edges: Sequence[Edge]) -> list:
        w = [float(self.weights.get((e.src, e.symbol, e.dst), 1.0)) for e in edges]
        total = sum(w)
        if total <= 0:
            raise ValueError("oracle weights over declared edges sum to zero")
        return [x / total for x in w]

    def choose(self, state, symbol, edges):
        if len(edges) == 1:
            return edges[0]
        return self.rng.choices(list(edges), weights=self.distribution(edges))[0]


def make_oracle(config: Mapping | None) -> Oracle:
    """Fresh oracle instance from a spec-file ``oracle`` block."""
    if not config:
        return Oracle()
    kind = config.get("type")
    if kind == "table":
        table = {(r["from"], r["on"]): r["to"] for r in config.get("table", [])}
        return TableOracle(table)
    if kind == "script":
        return ScriptedOracle(config.get("script", []))
    if kind == "seeded_random":
        weights = {(r["from"], r["on"], r["to"]): r["weight"] for r in config.get("weights", [])}
        return SeededRandomOracle(int(config.get("seed", 0)), weights)
    raise ValidationError(f"oracle.type: unknown oracle type {kind!r}", "oracle")


# -- agent classes -----------------------------------------------------------

def _common_problems(states, start, alphabet, accept) -> list:
    problems = []
    sset = set(states)
    if start not in sset:
        problems.append(f"start: {start!r} is not a state")
    if set(accept) - sset:
        problems.append(f"accept: {sorted(set(accept) - sset)} are not states")
    if EPS in alphabet:
        problems.append(f"alphabet: {EPS!r} is reserved")
    return problems


@dataclass(frozen=True)
class RegularAgent:
    """Finite control restricted to declared edges; ``Edge.action`` carries Mealy output."""

    states: tuple
    start: str
    alphabet: tuple
    edges: tuple
    accept: frozenset
    outputs: tuple = ()
    tokenizer: Tokenizer | None = field(default=None, compare=False)
    oracle_config: Mapping | None = field(default=None, compare=False)

    memory = "none"

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        object.__setattr__(self, "accept", frozenset(self.accept))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        problems = _common_problems(self.states, self.start, self.alphabet, self.accept)
        sset = set(self.states)
        for i, e in enumerate(self.edges):
            if e.src not in sset or e.dst not in sset:
                problems.append(f"edges[{i}]: {e.src!r}->{e.dst!r} uses an undeclared state")
            if e.symbol not in self.alphabet:
                problems.append(f"edges[{i}]: symbol {e.symbol!r} not in alphabet")
            if e.action is not None and self.outputs and e.action not in self.outputs:
                problems.append(f"edges[{i}]: action {e.action!r} not in outputs")
        if len(set(self.edges)) != len(self.edges):
            problems.append("edges: duplicate edges")
        if self.tokenizer is not None:
            bad = set(self.tokenizer.tau.values()) - set(self.alphabet)
            if bad:
                problems.append(f"tokenizer: maps onto symbols {sorted(bad)} outside alphabet")
        if problems:
            raise ValidationError(problems, "RegularAgent")
        index: dict = {}
        for e in self.edges:
            index.setdefault((e.src, e.symbol), []).append(e)
        object.__setattr__(self, "_index", {k: tuple(v) for k, v in index.items()})

    __hash__ = None

    def declared(self, state, symbol) -> tuple:
        return self._index.get((state, symbol), ())

    @property
    def deterministic(self) -> bool:
        return all(len(v) == 1 for v in self._index.values())

    @property
    def total(self) -> bool:
        return all((q, a) in self._index for q in self.states for a in self.alphabet)

    def make_oracle(self) -> Oracle:
        return make_oracle(self.oracle_config)


@dataclass(frozen=True)
class CfAgent:
    """Finite control plus a LIFO plan stack (top of stack at index 0)."""

    states: tuple
    start: str
    alphabet: tuple
    stack_alphabet: tuple
    rules: tuple
    accept: frozenset
    initial_stack: tuple = ()

    memory = "lifo"

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "stack_alphabet", tuple(self.stack_alphabet))
        object.__setattr__(self, "rules", tuple(CfRule(r[0], r[1], r[2], r[3], tuple(r[4]))
                                               for r in self.rules))
        object.__setattr__(self, "accept", frozenset(self.accept))
        object.__setattr__(self, "initial_stack", tuple(self.initial_stack))
        problems = _common_problems(self.states, self.start, self.alphabet, self.accept)
        sset, zset = set(self.states), set(self.stack_alphabet)
        for i, r in enumerate(self.rules):
            if r.src not in sset or r.dst not in sset:
                problems.append(f"rules[{i}]: undeclared state")
            if r.symbol != EPS and r.symbol not in self.alphabet:
                problems.append(f"rules[{i}]: symbol {r.symbol!r} not in alphabet")
            if r.pop != EPS and r.pop not in zset:
                problems.append(f"rules[{i}]: pop {r.pop!r} not in stack alphabet")
            for z in r.push:
                if z not in zset:
                    problems.append(f"rules[{i}]: push symbol {z!r} not in stack alphabet")
        for z in self.initial_stack:
            if z not in zset:
                problems.append(f"initial_stack: {z!r} not in stack alphabet")
        if problems:
            raise ValidationError(problems, "CfAgent")
        by_state: dict = {}
        for r in self.rules:
            by_state.setdefault(r.src, []).append(r)
        object.__setattr__(self, "_by_state", by_state)

    __hash__ = None

    def applicable(self, state, symbol, top):
        """Rules usable in ``state`` reading ``symbol`` (or EPS) with ``top`` visible."""
        for r in self._by_state.get(state, ()):
            if r.symbol == symbol and (r.pop == EPS or r.pop == top):
                yield r


@dataclass(frozen=True)
class CsAgent:
    """Agent whose memory tape is exactly ``k*|w| + 2`` cells including endmarkers.

    Memory is laid out in blocks of ``k`` cells, one per input symbol: the
    symbol sits in the first cell of its block and the other ``k-1`` start
    blank. Entering a state of ``accept`` accepts; a missing move rejects.
    """

    states: tuple
    start: str
    alphabet: tuple
    tape_alphabet: tuple
    delta: Mapping
    accept: frozenset
    k: int = 1
    blank: str = BLANK

    memory = "bounded_rw"

    def __post_init__(self):
        for name in ("states", "alphabet", "tape_alphabet"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "accept", frozenset(self.accept))
        object.__setattr__(self, "delta", {kk: tuple(v) for kk, v in dict(self.delta).items()})
        problems = _common_problems(self.states, self.start, self.alphabet, self.accept)
        gamma = set(self.tape_alphabet)
        if self.k < 1:
            problems.append("k: must be a positive count")
        if LEFT_END in gamma or RIGHT_END in gamma:
            problems.append("tape_alphabet: must not contain endmarkers")
        if not set(self.alphabet) <= gamma:
            problems.append("alphabet: must be a subset of tape_alphabet")
        if self.k > 1 and self.blank not in gamma:
            problems.append(f"blank {self.blank!r}: must be in tape_alphabet when k > 1")
        sset = set(self.states)
        full = gamma | {LEFT_END, RIGHT_END}
        for (q, x), (t, y, d) in self.delta.items():
            if q not in sset or t not in sset:
                problems.append(f"delta[{q}, {x}]: undeclared state")
            if x not in full or y not in full:
                problems.append(f"delta[{q}, {x}]: symbol outside tape alphabet")
            if d not in MOVES:
                problems.append(f"delta[{q}, {x}]: move must be L or R")
        if problems:
            raise ValidationError(problems, "CsAgent")

    __hash__ = None

    def memory_size(self, n: int) -> int:
        return self.k * n + 2

    def initial_memory(self, w: Sequence) -> tuple:
        w = tuple(w)
        pad = (self.blank,) * (self.k - 1)
        return (LEFT_END,) + tuple(c for a in w for c in (a, *pad)) + (RIGHT_END,)


@dataclass(frozen=True)
class TcAgent:
    """Agent with an unbounded read/write memory tape holding the input at start."""

    states: tuple
    start: str
    alphabet: tuple
    tape_alphabet: tuple
    delta: Mapping
    accept: frozenset
    blank: str = BLANK

    memory = "arbitrary_rw"

    def __post_init__(self):
        for name in ("states", "alphabet", "tape_alphabet"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "accept", frozenset(self.accept))
        object.__setattr__(self, "delta", {kk: tuple(v) for kk, v in dict(self.delta).items()})
        problems = _common_problems(self.states, self.start, self.alphabet, self.accept)
        gamma = set(self.tape_alphabet)
        if not set(self.alphabet) <= gamma:
            problems.append("alphabet: must be a subset of tape_alphabet")
        if self.blank not in gamma:
            problems.append(f"blank {self.blank!r}: must be in tape_alphabet")
        if self.blank in self.alphabet:
            problems.append(f"blank {self.blank!r}: must not be a perception symbol")
        sset = set(self.states)
        for (q, x), (t, y, d) in self.delta.items():
            if q not in sset or t not in sset:
                problems.append(f"delta[{q}, {x}]: undeclared state")
            if x not in gamma or y not in gamma:
                problems.append(f"delta[{q}, {x}]: symbol outside tape alphabet")
            if d not in MOVES:
                problems.append(f"delta[{q}, {x}]: move must be L or R")
        if problems:
            raise ValidationError(problems, "TcAgent")

    __hash__ = None


AGENT_TYPES = (RegularAgent, CfAgent, CsAgent, TcAgent)


# -- execution ---------------------------------------------------------------

def oracle_step_constrained(agent: RegularAgent, state, symbol, oracle: Oracle | None = None):
    """Advance one step through the oracle; returns ``(next_state, action)``.

    The proposal is checked against the declared edges before anything moves.
    """
    if state not in agent.states:
        raise UnknownState(state)
    if symbol not in agent.alphabet:
        raise UnknownSymbol(symbol)
    edges = agent.declared(state, symbol)
    if not edges:
        raise NoDeclaredEdge(state, symbol)
    edge = (oracle or Oracle()).choose(state, symbol, edges)
    if edge not in edges:
        raise OracleViolation(edge, state, symbol)
    return edge.dst, edge.action


def sample_run(agent: RegularAgent, w: Sequence, oracle: Oracle | None = None) -> Verdict:
    """One concrete trajectory with the oracle resolving every choice."""
    w = _check_word(agent.alphabet, w)
    oracle = oracle if oracle is not None else agent.make_oracle()
    q = agent.start
    visited = [q]
    actions = []
    for i, a in enumerate(w):
        try:
            q, act = oracle_step_constrained(agent, q, a, oracle)
        except NoDeclaredEdge:
            trace = Trace(w[:i], tuple(visited), False, tuple(actions))
            return Verdict(Status.REJECT, i, trace=trace, detail=f"no declared edge on {a!r}")
        visited.append(q)
        actions.append(act)
    ok = q in agent.accept
    return Verdict(Status.ACCEPT if ok else Status.REJECT, len(w),
                   trace=Trace(w, tuple(visited), ok, tuple(actions)))


def _run_regular(agent: RegularAgent, w: tuple) -> Verdict:
    from .equivalence import agent_to_automaton
    from .fa import Dfa, nfa_to_dfa, run_dfa

    machine, _ = agent_to_automaton(agent)
    dfa = machine if isinstance(machine, Dfa) else nfa_to_dfa(machine)
    tr = run_dfa(dfa, w)
    if dfa.labels is not None:
        order = {q: i for i, q in enumerate(agent.states)}
        visited = tuple(tuple(sorted(dfa.labels[s], key=order.__getitem__)) for s in tr.visited)
        tr = Trace(tr.input, visited, tr.accepted)
    return Verdict(Status.ACCEPT if tr.accepted else Status.REJECT, len(w), trace=tr)


def _run_cf(agent: CfAgent, w: tuple, budget: int) -> Verdict:
    start = (agent.start, 0, agent.initial_stack)
    parent = {start: None}
    frontier = deque([start])
    expanded = 0
    while frontier:
        node = frontier.popleft()
        q, i, stack = node
        if i == len(w) and q in agent.accept:
            chain = []
            while node is not None:
                chain.append(node)
                node = parent[node]
            chain.reverse()
            trace = Trace(w, tuple(c[0] for c in chain), True)
            return Verdict(Status.ACCEPT, expanded, trace=trace, path=tuple(chain))
        if expanded >= budget:
            return Verdict(Status.BUDGET_EXHAUSTED, expanded, detail="plan stack search budget spent")
        expanded += 1
        top = stack[0] if stack else None
        symbols = [EPS] + ([w[i]] if i < len(w) else [])
        for a in symbols:
            for r in agent.applicable(q, a, top):
                rest = stack[1:] if r.pop != EPS else stack
                nxt = (r.dst, i + (a != EPS), r.push + rest)
                if nxt not in parent:
                    parent[nxt] = node
                    frontier.append(nxt)
    return Verdict(Status.REJECT, expanded)


def _run_cs(agent: CsAgent, w: tuple) -> Verdict:
    cells = list(agent.initial_memory(w))
    last = len(cells) - 1
    gamma = len(agent.tape_alphabet)
    inner = last - 1
    bound = len(agent.states) * (inner + 2) * gamma**inner
    q, head, steps = agent.start, 0, 0
    seen = {}
    visited = [(q, head)]
    while True:
        if q in agent.accept:
            return Verdict(Status.ACCEPT, steps, trace=Trace(w, tuple(visited), True),
                           snapshot=TapeSnapshot(tuple(cells), head, steps, q))
        config = (q, head, tuple(cells))
        if config in seen or steps > bound:
            first = seen.get(config, steps)
            return Verdict(Status.LOOP, steps, trace=Trace(w, tuple(visited), False),
                           repeat=(config, first, steps))
        seen[config] = steps
        move = agent.delta.get((q, cells[head]))
        if move is None:
            return Verdict(Status.REJECT, steps, trace=Trace(w, tuple(visited), False),
                           snapshot=TapeSnapshot(tuple(cells), head, steps, q))
        t, y, d = move
        if cells[head] in (LEFT_END, RIGHT_END) and y != cells[head]:
            raise MemoryBoundViolation(f"step {steps}: overwrites endmarker at cell {head}")
        if cells[head] not in (LEFT_END, RIGHT_END) and y in (LEFT_END, RIGHT_END):
            raise MemoryBoundViolation(f"step {steps}: writes an endmarker into cell {head}")
        new_head = head + (1 if d == "R" else -1)
        if not 0 <= new_head <= last:
            raise MemoryBoundViolation(
                f"step {steps}: head would leave the {len(cells)}-cell memory at cell {new_head}")
        cells[head] = y
        q, head = t, new_head
        steps += 1
        visited.append((q, head))


def _run_tc(agent: TcAgent, w: tuple, budget: int) -> Verdict:
    memory = list(w) or [agent.blank]
    q, head, steps = agent.start, 0, 0
    visited = [(q, head)]
    while True:
        if q in agent.accept:
            status = Status.ACCEPT
            break
        move = agent.delta.get((q, memory[head]))
        if move is None:
            status = Status.REJECT
            break
        if steps >= budget:
            status = Status.BUDGET_EXHAUSTED
            break
        q, memory[head], d = move
        if d == "R":
            head += 1
            if head == len(memory):
                memory.append(agent.blank)
        else:
            head = max(head - 1, 0)
        steps += 1
        visited.append((q, head))
    return Verdict(status, steps, trace=Trace(w, tuple(visited), status is Status.ACCEPT),
                   snapshot=TapeSnapshot(tuple(memory), head, steps, q))


def run_agent(agent, w: Sequence, budget: int = 10_000, oracle: Oracle | None = None) -> Verdict:
    """Decide whether ``w`` is in the agent's language.

    For a :class:`RegularAgent`, passing ``oracle`` switches from language
    membership to one sampled trajectory (see :func:`sample_run`). ``budget``
    is ignored by regular and context-sensitive agents.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    w = _check_word(agent.alphabet, w)
    if isinstance(agent, RegularAgent):
        if oracle is not None:
            return sample_run(agent, w, oracle)
        return _run_regular(agent, w)
    if isinstance(agent, CfAgent):
        return _run_cf(agent, w, budget)
    if isinstance(agent, CsAgent):
        return _run_cs(agent, w)
    if isinstance(agent, TcAgent):
        return _run_tc(agent, w, budget)
    raise TypeError(f"not an agent: {type(agent).__name__}")


def stack_heights(path: Sequence) -> list:
    """Stack height after each configuration of a CfAgent or PDA accepting path."""
    return [len(c[2]) if isinstance(c, tuple) else len(c.stack) for c in path]
