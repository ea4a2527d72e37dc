"""Multi-agent composition.

A lockstep product of finite agents is itself one finite automaton over
state tuples. A set of finite agents sharing one read/write tape, with a
scheduler serialising access, can run any Turing machine: split the
machine's control states among the agents and let whoever owns the
current state make the move.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlphabetMismatch, SchedulerViolation, ValidationError
from .fa import Dfa, _check_word, nfa_to_dfa
from .machines import Status, TapeSnapshot, Tm, Verdict

ACCEPT_MODES = ("all", "any")


def tuple_name(qs: Sequence) -> str:
    return "(" + ",".join(qs) + ")"


def component_dfa(agent) -> Dfa:
    """The deterministic acceptor a component contributes to a product."""
    from .equivalence import agent_to_automaton

    if isinstance(agent, Dfa):
        return agent
    machine, _ = agent_to_automaton(agent)
    return machine if isinstance(machine, Dfa) else nfa_to_dfa(machine)


@dataclass(frozen=True, eq=False)
class ProductSystem:
    agents: tuple
    components: tuple
    dfa: Dfa
    tuples: dict
    accept: str = "all"
    sync: str = "lockstep-shared-input"

    @property
    def alphabet(self) -> tuple:
        return self.dfa.alphabet

    def language_bits(self, alphabet, max_len) -> np.ndarray:
        """Run every component separately on every word and combine; never touches ``dfa``."""
        from .equivalence import language_bits

        bits = [language_bits(c, alphabet, max_len) for c in self.components]
        combine = np.logical_and if self.accept == "all" else np.logical_or
        return combine.reduce(np.stack(bits), axis=0)

    def joint_run(self, w: Sequence) -> bool:
        qs = [c.start for c in self.components]
        for a in w:
            qs = [c.delta[(q, a)] for c, q in zip(self.components, qs)]
        flags = [q in c.accept for c, q in zip(self.components, qs)]
        return all(flags) if self.accept == "all" else any(flags)


def compose_product(agents: Sequence, accept: str = "all",
                    sync: str = "lockstep-shared-input") -> ProductSystem:
    """Materialise the reachable tuple automaton of ``agents`` reading the same input."""
    if accept not in ACCEPT_MODES:
        raise ValueError(f"accept must be one of {ACCEPT_MODES}")
    if sync != "lockstep-shared-input":
        raise ValueError("only lockstep composition on a shared input is supported")
    if not agents:
        raise ValidationError(["agents: need at least one component"], "product")
    comps = tuple(component_dfa(a) for a in agents)
    alphabet = comps[0].alphabet
    for c in comps[1:]:
        if set(c.alphabet) != set(alphabet):
            raise AlphabetMismatch(alphabet, c.alphabet)
    start = tuple(c.start for c in comps)
    names = {start: tuple_name(start)}
    delta = {}
    queue = deque([start])
    while queue:
        qs = queue.popleft()
        for a in alphabet:
            nxt = tuple(c.delta[(q, a)] for c, q in zip(comps, qs))
            if nxt not in names:
                names[nxt] = tuple_name(nxt)
                queue.append(nxt)
            delta[(names[qs], a)] = names[nxt]
    test = all if accept == "all" else any
    acc = {names[qs] for qs in names if test(q in c.accept for c, q in zip(comps, qs))}
    dfa = Dfa(tuple(names.values()), alphabet, delta, names[start], frozenset(acc))
    return ProductSystem(tuple(agents), comps, dfa, {v: k for k, v in names.items()}, accept, sync)


# -- shared tape ---------------------------------------------------------------

@dataclass(frozen=True)
class TapeAgent:
    """A finite agent owning a slice of the program's control states."""

    name: str
    owns: frozenset
    delta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class StepRecord:
    tick: int
    agent: str
    op: str
    cell: int
    symbol: str
    read: str
    state: str
    next_state: str

    def line(self) -> str:
        return f"{self.tick}\t{self.agent}\t{self.op}\t{self.cell}\t{self.symbol}"

    def to_dict(self) -> dict:
        return {"tick": self.tick, "agent": self.agent, "op": self.op, "cell": self.cell,
                "symbol": self.symbol, "read": self.read, "state": self.state,
                "next_state": self.next_state}


@dataclass(frozen=True, eq=False)
class SharedTapeSystem:
    agents: tuple
    order: tuple
    program: Tm

    @property
    def partition(self) -> dict:
        return {a.name: sorted(a.owns) for a in self.agents}


def partition_program(program: Tm, n_agents: int, names: Sequence[str] | None = None) -> SharedTapeSystem:
    """Round-robin assignment of the program's non-halting states to ``n_agents`` agents."""
    if n_agents < 1:
        raise ValueError("need at least one agent")
    names = list(names) if names else [f"agent{i}" for i in range(n_agents)]
    if len(names) != n_agents or len(set(names)) != n_agents:
        raise ValidationError(["agents: names must be distinct, one per agent"], "system")
    owned = [set() for _ in range(n_agents)]
    active = [q for q in program.states if q not in program.halting]
    for i, q in enumerate(active):
        owned[i % n_agents].add(q)
    agents = tuple(
        TapeAgent(names[i], frozenset(owned[i]),
                  {k: v for k, v in program.delta.items() if k[0] in owned[i]})
        for i in range(n_agents))
    return SharedTapeSystem(agents, tuple(names), program)


def system_from_partition(program: Tm, partition: dict, order: Sequence[str] | None = None) -> SharedTapeSystem:
    """Explicit ownership map ``{agent: [states]}``; every non-halting state needs exactly one owner."""
    problems = []
    owners: dict = {}
    for name, qs in partition.items():
        for q in qs:
            if q not in program.states:
                problems.append(f"partition[{name}]: {q!r} is not a program state")
            owners.setdefault(q, []).append(name)
    for q in program.states:
        if q in program.halting:
            continue
        if len(owners.get(q, ())) != 1:
            problems.append(f"partition: state {q!r} has {len(owners.get(q, ()))} owners, needs 1")
    order = tuple(order) if order else tuple(partition)
    if set(order) != set(partition):
        problems.append("order: must list every agent exactly once")
    if problems:
        raise ValidationError(problems, "system")
    agents = tuple(TapeAgent(n, frozenset(qs), {k: v for k, v in program.delta.items() if k[0] in qs})
                   for n, qs in partition.items())
    return SharedTapeSystem(agents, order, program)


def run_shared_tape(sys: SharedTapeSystem, w: Sequence, budget: int = 10_000,
                    program: Tm | None = None) -> tuple:
    """Execute the program through its agents; returns ``(verdict, step_log)``.

    The scheduler visits agents in ``order`` starting after the one that
    moved last; the first agent owning the current state takes the tick.
    """
    t = program or sys.program
    if budget <= 0:
        raise ValueError("budget must be positive")
    w = _check_word(t.alphabet, w)
    by_name = {a.name: a for a in sys.agents}
    order = [by_name[n] for n in sys.order]
    cells = list(w) or [t.blank]
    head, q, steps = 0, t.start, 0
    log = []
    cursor = 0
    while q not in t.halting and steps < budget:
        holders = [a for a in order if q in a.owns]
        if len(holders) != 1:
            raise SchedulerViolation(f"tick {steps + 1}: {len(holders)} agents claim state {q!r}")
        for i in range(len(order)):
            agent = order[(cursor + i) % len(order)]
            if q in agent.owns:
                cursor = (cursor + i + 1) % len(order)
                break
        x = cells[head]
        nq, y, d = agent.delta[(q, x)]
        cells[head] = y
        log.append(StepRecord(steps + 1, agent.name, "write" if y != x else "read", head, y, x, q, nq))
        if d == "R":
            head += 1
            if head == len(cells):
                cells.append(t.blank)
        elif head > 0:
            head -= 1
        q = nq
        steps += 1
    snap = TapeSnapshot(tuple(cells), head, steps, q)
    if q == t.accept_state:
        status = Status.ACCEPT
    elif q == t.reject_state:
        status = Status.REJECT
    else:
        status = Status.BUDGET_EXHAUSTED
    return Verdict(status, steps, snapshot=snap), log
