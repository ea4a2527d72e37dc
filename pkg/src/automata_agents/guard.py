"""Runtime guard: an oracle-driven agent confined to a verified FA or DPDA core.

The oracle only proposes. A proposal becomes a transition when it is an
edge of the declared core; anything else is logged as a violation and the
agent's state is left untouched. Safety of the core therefore bounds every
possible behaviour of the oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .agents import Edge, Oracle
from .errors import NondeterministicCore, UnknownState, UnknownSymbol, ValidationError
from .fa import EPS, Dfa, Mealy
from .machines import Pda, is_deterministic_pda
from .verification import Check, PAutomaton, fa_safety, pda_prestar, pda_witness


class PdaEdge(NamedTuple):
    src: str
    symbol: str
    dst: str
    pop: str = EPS
    push: tuple = ()

    @property
    def action(self):
        return None


@dataclass(frozen=True)
class Policy:
    """``halt`` stops the agent at the first rejected proposal; ``retry`` allows ``retries`` more tries."""

    kind: str = "halt"
    retries: int = 0

    def __post_init__(self):
        if self.kind not in ("halt", "retry"):
            raise ValueError("violation policy must be 'halt' or 'retry'")
        if self.retries < 0 or (self.kind == "halt" and self.retries):
            raise ValueError("retries must be >= 0 and only used with 'retry'")

    @classmethod
    def parse(cls, text: str) -> "Policy":
        text = text.strip()
        if text == "halt":
            return cls("halt")
        if text.startswith("retry"):
            n = text[5:].strip("():= ")
            return cls("retry", int(n) if n else 1)
        raise ValueError(f"unknown violation policy {text!r}")

    @property
    def attempts(self) -> int:
        return 1 + self.retries

    def __str__(self):
        return "halt" if self.kind == "halt" else f"retry({self.retries})"


@dataclass(frozen=True)
class Committed:
    state: str
    action: object = None
    stack: tuple = ()
    attempts: int = 1

    ok = True


@dataclass(frozen=True)
class Violation:
    report: dict

    ok = False

    @property
    def state(self):
        return self.report["state"]


@dataclass(frozen=True)
class LogRecord:
    step: int
    symbol: str
    proposed: tuple
    verdict: str
    state: str

    def line(self) -> str:
        return f"{self.step}\t{self.symbol}\t{_fmt(self.proposed)}\t{self.verdict}\t{self.state}"

    def to_dict(self) -> dict:
        return {"step": self.step, "symbol": self.symbol, "proposed": list(self.proposed),
                "verdict": self.verdict, "state": self.state}


def _fmt(edge) -> str:
    return f"{edge[0]}-{edge[1]}->{edge[2]}" + (f"/{list(edge[3:])}" if len(edge) > 3 else "")


def _as_tuple(p) -> tuple:
    if isinstance(p, PdaEdge):
        return (p.src, p.symbol, p.dst, p.pop, tuple(p.push))
    if isinstance(p, tuple) and len(p) >= 3:
        return tuple(p[:3])
    return (repr(p), "", "")


@dataclass
class GuardedAgent:
    core: object
    oracle: Oracle = field(default_factory=Oracle)
    policy: Policy = field(default_factory=Policy)
    state: str = field(init=False)
    stack: tuple = field(init=False, default=())
    halted: bool = field(init=False, default=False)
    steps: int = field(init=False, default=0)
    log: list = field(init=False, default_factory=list)

    def __post_init__(self):
        if isinstance(self.core, Pda):
            ok, conflicts = is_deterministic_pda(self.core)
            if not ok:
                raise NondeterministicCore(conflicts)
            eps = [m for m in self.core.transitions() if m[1] == EPS]
            if eps:
                raise ValidationError([f"core move {m[0]}->{m[3]} reads no input; every committed "
                                       "transition must answer one perception" for m in eps], "guard")
        elif not isinstance(self.core, Dfa):
            raise TypeError("the core must be a Dfa/Mealy or a deterministic Pda")
        self.reset()

    def reset(self):
        self.state = self.core.start
        self.stack = tuple(getattr(self.core, "initial_stack", ()))
        self.halted = False
        self.steps = 0
        self.log = []

    @property
    def alphabet(self) -> tuple:
        return self.core.alphabet

    def declared(self, state=None, symbol=None, stack=None) -> tuple:
        """Core edges available from the current (or given) configuration on ``symbol``."""
        state = self.state if state is None else state
        stack = self.stack if stack is None else stack
        if isinstance(self.core, Dfa):
            dst = self.core.delta[(state, symbol)]
            act = self.core.lam.get((state, symbol)) if isinstance(self.core, Mealy) else None
            return (Edge(state, symbol, dst, act),)
        out = []
        for z in ((stack[0],) if stack else ()) + (EPS,):
            for t, push in sorted(self.core.delta.get((state, symbol, z), ())):
                out.append(PdaEdge(state, symbol, t, z, push))
        return tuple(out)


def guarded_step(g: GuardedAgent, symbol) -> Committed | Violation:
    """Ask the oracle for a move and commit it only if the core declares it."""
    if symbol not in g.alphabet:
        raise UnknownSymbol(symbol)
    g.steps += 1
    base = {"step": g.steps, "symbol": symbol, "state": g.state, "stack": list(g.stack)}
    if g.halted:
        return Violation({**base, "reason": "agent halted by an earlier violation", "proposals": []})
    edges = g.declared(g.state, symbol)
    if not edges:
        g.log.append(LogRecord(g.steps, symbol, (g.state, symbol, "-"), "no-edge", g.state))
        if g.policy.kind == "halt":
            g.halted = True
        return Violation({**base, "reason": "core declares no move", "proposals": []})
    proposals = []
    for attempt in range(1, g.policy.attempts + 1):
        p = g.oracle.choose(g.state, symbol, edges)
        if p in edges:
            g.state = p.dst
            if isinstance(p, PdaEdge):
                rest = g.stack[1:] if p.pop != EPS else g.stack
                g.stack = tuple(p.push) + rest
            g.log.append(LogRecord(g.steps, symbol, _as_tuple(p), "commit", g.state))
            return Committed(g.state, p.action, g.stack, attempt)
        proposals.append(_as_tuple(p))
        g.log.append(LogRecord(g.steps, symbol, _as_tuple(p), "violation", g.state))
    if g.policy.kind == "halt":
        g.halted = True
    return Violation({**base, "reason": f"{len(proposals)} undeclared proposal(s)",
                      "proposals": [list(x) for x in proposals], "policy": str(g.policy)})


def guarded_run(g: GuardedAgent, w: Sequence) -> list:
    return [guarded_step(g, a) for a in w]


class AdversarialOracle(Oracle):
    """Proposes arbitrary edges, declared or not, from a seeded generator.

    With probability ``p_declared`` it picks a declared edge; otherwise it
    invents one between any two core states (which may still happen to be
    declared).
    """

    def __init__(self, states: Sequence, stack_alphabet: Sequence = (), seed: int = 0,
                 p_declared: float = 0.5):
        self.states = list(states)
        self.stack_alphabet = list(stack_alphabet)
        self.rng = random.Random(seed)
        self.p_declared = p_declared

    def choose(self, state, symbol, edges):
        r = self.rng
        if edges and r.random() < self.p_declared:
            return r.choice(list(edges))
        src = state if r.random() < 0.8 else r.choice(self.states)
        dst = r.choice(self.states)
        if edges and isinstance(edges[0], PdaEdge):
            pop = r.choice([EPS] + self.stack_alphabet)
            push = tuple(r.choice(self.stack_alphabet) for _ in range(r.randint(0, 2))) \
                if self.stack_alphabet else ()
            return PdaEdge(src, symbol, dst, pop, push)
        return Edge(src, symbol, dst, None)


def certify_core(g: GuardedAgent | Dfa | Pda, unsafe) -> Check:
    """Safety of the core alone; a certificate covers every possible oracle."""
    core = g.core if isinstance(g, GuardedAgent) else g
    unsafe = frozenset(unsafe)
    for q in unsafe:
        if q not in core.states:
            raise UnknownState(q)
    if isinstance(core, Dfa):
        res = fa_safety(core, unsafe)
        if res.holds:
            return Check("certified", True, None, "fa_safety",
                         detail={"claim": "no oracle can drive the core into an unsafe state"})
        return Check("counterexample", False, res.witness, "fa_safety",
                     detail={"reached": res.detail.get("reached")})
    pre = pda_prestar(core, PAutomaton.any_stack(core, unsafe))
    if not pre.accepts(core.start, core.initial_stack):
        return Check("certified", True, None, "pre*",
                     detail={"claim": "no oracle can drive the core into an unsafe state",
                             "prestar_transitions": len(pre.transitions)})
    word = pda_witness(core, PAutomaton.any_stack(core, unsafe))
    return Check("counterexample", False, word, "pre*", detail={"forward_witness": word is not None})
