"""Decidable verification, one procedure per machine class.

Finite automata get safety, inevitability and equivalence by graph search.
Pushdown systems get configuration reachability through ``pre*``
saturation over P-automata; ``post*`` is provided as an independent
forward route for cross-checking. LBAs get a halting decision from the
finite configuration count. Turing-complete agents get nothing beyond
budgeted runs, and the capability matrix says so.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .classes import ClassLabel, Discipline
from .errors import AlphabetMismatch, UnknownState
from .fa import EPS, Dfa, dfa_product
from .machines import Lba, Pda, Status, Verdict, run_lba

BOTTOM = "⊥"


@dataclass(frozen=True)
class Check:
    """Result of a verification query.

    ``holds`` is True for the reassuring outcome (safe, inevitable,
    equivalent, halts, certified) and False otherwise; ``witness`` carries
    the counterexample or lasso when there is one.
    """

    verdict: str
    holds: bool
    witness: object = None
    method: str = ""
    bound: object = None
    detail: Mapping = field(default_factory=dict)

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "holds": self.holds, "witness": _plain(self.witness),
                "method": self.method, "bound": self.bound, **{k: _plain(v) for k, v in self.detail.items()}}


def _plain(v):
    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]
    return v


def _check_states(d, states) -> frozenset:
    states = frozenset(states)
    for q in states:
        if q not in d.states:
            raise UnknownState(q)
    return states


def _bfs_paths(d: Dfa, sources: Iterable, allowed=None):
    """Shortest words from the start to every reachable state (optionally only through ``allowed``)."""
    parent = {}
    queue = deque()
    for s in sources:
        parent[s] = None
        queue.append(s)
    while queue:
        q = queue.popleft()
        for a in d.alphabet:
            t = d.delta[(q, a)]
            if t in parent or (allowed is not None and t not in allowed):
                continue
            parent[t] = (q, a)
            queue.append(t)
    return parent


def _word_to(parent, q) -> tuple:
    word = []
    while parent[q] is not None:
        q, a = parent[q]
        word.append(a)
    return tuple(reversed(word))


def fa_safety(d: Dfa, unsafe: Iterable) -> Check:
    """Safe iff no unsafe state is reachable; the counterexample is a shortest word."""
    unsafe = _check_states(d, unsafe)
    parent = {d.start: None}
    queue = deque([d.start])
    while queue:
        q = queue.popleft()
        if q in unsafe:
            w = _word_to(parent, q)
            return Check("violated", False, w, "bfs", detail={"reached": q})
        for a in d.alphabet:
            t = d.delta[(q, a)]
            if t not in parent:
                parent[t] = (q, a)
                queue.append(t)
    return Check("safe", True, None, "bfs", detail={"explored": len(parent)})


def fa_inevitability(d: Dfa, goal: Iterable) -> Check:
    """Inevitable iff every infinite run from the start eventually visits ``goal``.

    Otherwise the witness is a lasso ``(stem, cycle)``: reading the stem and
    then the cycle forever never enters a goal state. Among all lassos the
    one with the shortest cycle (then shortest stem) is returned.
    """
    goal = _check_states(d, goal)
    if d.start in goal:
        return Check("inevitable", True, None, "lasso-search")
    free = set(d.states) - goal
    stems = _bfs_paths(d, [d.start], allowed=free)
    best = None
    for v in stems:
        back = {}
        queue = deque()
        for a in d.alphabet:
            t = d.delta[(v, a)]
            if t in free and t not in back:
                back[t] = (v, a)
                queue.append(t)
        while queue and v not in back:
            q = queue.popleft()
            for a in d.alphabet:
                t = d.delta[(q, a)]
                if t in free and t not in back:
                    back[t] = (q, a)
                    queue.append(t)
        if v not in back:
            continue
        cycle = []
        q = v
        while True:
            p, a = back[q]
            cycle.append(a)
            q = p
            if q == v:
                break
        cycle = tuple(reversed(cycle))
        stem = _word_to(stems, v)
        key = (len(cycle), len(stem))
        if best is None or key < best[0]:
            best = (key, stem, cycle, v)
    if best is None:
        return Check("inevitable", True, None, "lasso-search")
    _, stem, cycle, v = best
    return Check("evadable", False, (stem, cycle), "lasso-search", detail={"cycle_state": v})


def dfa_equivalence(a: Dfa, b: Dfa) -> Check:
    """Equivalent iff the symmetric-difference product is empty; witness is shortest."""
    if set(a.alphabet) != set(b.alphabet):
        raise AlphabetMismatch(a.alphabet, b.alphabet)
    prod = dfa_product(a, b, "xor")
    res = fa_safety(prod, prod.accept)
    if res.holds:
        return Check("equivalent", True, None, "product-emptiness",
                     detail={"product_states": len(prod.states)})
    return Check("distinguished", False, res.witness, "product-emptiness",
                 detail={"product_states": len(prod.states)})


# -- pushdown reachability ---------------------------------------------------

@dataclass
class PAutomaton:
    """Finite automaton over stack words representing a set of PDA configurations.

    Configuration ``(q, alpha)`` is in the set iff reading ``alpha`` followed
    by the bottom marker from automaton state ``q`` can reach a final state.
    Transitions are ``(src, symbol, dst)`` triples; ``symbol`` may be EPS.
    """

    control: tuple
    transitions: set
    final: frozenset
    extra_states: set = field(default_factory=set)

    @property
    def states(self) -> set:
        out = set(self.control) | set(self.extra_states) | set(self.final)
        for s, _, t in self.transitions:
            out.add(s)
            out.add(t)
        return out

    def _succ(self):
        out = {}
        for s, g, t in self.transitions:
            out.setdefault(s, {}).setdefault(g, set()).add(t)
        return out

    def accepts(self, state, stack: Sequence) -> bool:
        succ = self._succ()

        def close(xs):
            seen = set(xs)
            work = list(xs)
            while work:
                s = work.pop()
                for t in succ.get(s, {}).get(EPS, ()):
                    if t not in seen:
                        seen.add(t)
                        work.append(t)
            return seen

        cur = close({state})
        for g in tuple(stack) + (BOTTOM,):
            nxt = set()
            for s in cur:
                nxt |= succ.get(s, {}).get(g, set())
            cur = close(nxt)
            if not cur:
                return False
        return bool(cur & self.final)

    # constructors for common target sets

    @classmethod
    def configurations(cls, pda: Pda, configs: Iterable) -> "PAutomaton":
        """Exactly the listed ``(state, stack)`` configurations."""
        trans = set()
        fresh = itertools.count()
        final = f"__f{next(fresh)}"
        extra = {final}
        for q, stack in configs:
            cur = q
            for g in tuple(stack):
                nxt = f"__s{next(fresh)}"
                extra.add(nxt)
                trans.add((cur, g, nxt))
                cur = nxt
            trans.add((cur, BOTTOM, final))
        return cls(tuple(pda.states), trans, frozenset({final}), extra)

    @classmethod
    def any_stack(cls, pda: Pda, states: Iterable) -> "PAutomaton":
        """Every configuration whose control state is in ``states``."""
        final, loop = "__f", "__any"
        trans = set()
        for q in states:
            trans.add((q, BOTTOM, final))
            for g in pda.stack_alphabet:
                trans.add((q, g, loop))
        for g in pda.stack_alphabet:
            trans.add((loop, g, loop))
        trans.add((loop, BOTTOM, final))
        return cls(tuple(pda.states), trans, frozenset({final}), {final, loop})

    @classmethod
    def empty_stack(cls, pda: Pda, states: Iterable) -> "PAutomaton":
        final = "__f"
        return cls(tuple(pda.states), {(q, BOTTOM, final) for q in states},
                   frozenset({final}), {final})

    def to_dot(self) -> str:
        lines = ["digraph PAutomaton {", "  rankdir=LR;"]
        for s in sorted(self.states, key=str):
            shape = "doublecircle" if s in self.final else "circle"
            lines.append(f'  "{s}" [shape={shape}];')
        for s, g, t in sorted(self.transitions, key=str):
            label = "ε" if g == EPS else g
            lines.append(f'  "{s}" -> "{t}" [label="{label}"];')
        lines.append("}")
        return "\n".join(lines)


def pds_rules(pda: Pda) -> list:
    """Input-free pushdown rules ``(p, gamma, p2, w)`` with the bottom marker made explicit.

    A move that pops nothing applies above every stack symbol, including the
    bottom marker, so it becomes one rule per symbol that pushes it back.
    """
    rules = set()
    for q, _a, z, t, push in pda.transitions():
        if z != EPS:
            rules.add((q, z, t, tuple(push)))
        else:
            for g in tuple(pda.stack_alphabet) + (BOTTOM,):
                rules.add((q, g, t, tuple(push) + (g,)))
    return sorted(rules)


def pda_prestar(p: Pda, targets: PAutomaton) -> PAutomaton:
    """Saturate ``targets`` into the P-automaton of all predecessor configurations.

    Rule ``<q, g> -> <q2, w>`` adds the transition ``(q, g, s)`` whenever
    ``w`` leads from ``q2`` to ``s``; this repeats until nothing new appears.
    The loop terminates because the state set is fixed.
    """
    trans = set(targets.transitions)
    succ: dict = {}
    for s, g, t in trans:
        succ.setdefault((s, g), set()).add(t)

    def close(xs):
        seen = set(xs)
        work = list(xs)
        while work:
            s = work.pop()
            for t in succ.get((s, EPS), ()):
                if t not in seen:
                    seen.add(t)
                    work.append(t)
        return seen

    def reach(q, w):
        cur = close({q})
        for g in w:
            nxt = set()
            for s in cur:
                nxt |= succ.get((s, g), set())
            cur = close(nxt)
        return cur

    rules = pds_rules(p)
    changed = True
    while changed:
        changed = False
        for q, g, q2, w in rules:
            for s in reach(q2, w):
                if (q, g, s) not in trans:
                    trans.add((q, g, s))
                    succ.setdefault((q, g), set()).add(s)
                    changed = True
    return PAutomaton(targets.control, trans, targets.final, set(targets.extra_states))


def _normalize(rules, control) -> tuple[list, list]:
    """Split pushes longer than two symbols into chains through fresh control states."""
    out, fresh = [], []
    taken = set(control)
    counter = itertools.count()
    for p, g, p2, w in rules:
        if len(w) <= 2:
            out.append((p, g, p2, w))
            continue
        n = len(w)
        mids = []
        for _ in range(n - 2):
            name = f"__m{next(counter)}"
            while name in taken:
                name = f"__m{next(counter)}"
            taken.add(name)
            mids.append(name)
        fresh.extend(mids)
        out.append((p, g, mids[0], (w[n - 2], w[n - 1])))
        for i in range(1, n - 2):
            out.append((mids[i - 1], w[n - 1 - i], mids[i], (w[n - 2 - i], w[n - 1 - i])))
        out.append((mids[-1], w[1], p2, (w[0], w[1])))
    return out, fresh


def pda_poststar(p: Pda, start: PAutomaton) -> PAutomaton:
    """Forward saturation: all configurations reachable from ``start``.

    ``start`` must have no transitions into control states. This is the
    standard worklist algorithm for rules pushing at most two symbols;
    longer pushes are first split through fresh intermediate states.
    """
    rules, mids = _normalize(pds_rules(p), p.states)
    control = set(p.states) | set(mids)
    for s, _, t in start.transitions:
        if t in control:
            raise ValueError("post* needs a P-automaton without transitions into control states")
    by_head: dict = {}
    mid_state = {}
    for r in rules:
        by_head.setdefault((r[0], r[1]), []).append(r)
        if len(r[3]) == 2:
            mid_state.setdefault((r[2], r[3][0]), f"__q[{r[2]},{r[3][0]}]")
    work = deque(t for t in start.transitions if t[0] in control)
    rel = set(t for t in start.transitions if t[0] not in control)
    out_of: dict = {}
    eps_into: dict = {}
    for s, g, t in rel:
        out_of.setdefault(s, set()).add((g, t))

    def add_rel(t):
        rel.add(t)
        out_of.setdefault(t[0], set()).add((t[1], t[2]))
        if t[1] == EPS:
            eps_into.setdefault(t[2], set()).add(t[0])

    while work:
        t = work.popleft()
        if t in rel:
            continue
        add_rel(t)
        q, g, s = t
        if g != EPS:
            for _, _, q2, w in by_head.get((q, g), ()):
                if len(w) == 0:
                    work.append((q2, EPS, s))
                elif len(w) == 1:
                    work.append((q2, w[0], s))
                else:
                    m = mid_state[(q2, w[0])]
                    work.append((q2, w[0], m))
                    if (m, w[1], s) not in rel:
                        add_rel((m, w[1], s))
                    for p2 in list(eps_into.get(m, ())):
                        work.append((p2, w[1], s))
        else:
            for g2, s2 in list(out_of.get(s, ())):
                work.append((q, g2, s2))
    extra = set(start.extra_states) | set(mid_state.values()) | set(mids)
    return PAutomaton(tuple(p.states), rel, start.final, extra)


def pautomata_intersect(a: PAutomaton, b: PAutomaton, control: Iterable) -> bool:
    """Do ``a`` and ``b`` share a configuration with control state in ``control``?"""
    sa, sb = a._succ(), b._succ()

    def eps(succ, s):
        return succ.get(s, {}).get(EPS, ())

    seen = set()
    queue = deque((q, q) for q in control)
    seen.update(queue)
    while queue:
        x, y = queue.popleft()
        if x in a.final and y in b.final:
            return True
        nxt = [(x2, y) for x2 in eps(sa, x)] + [(x, y2) for y2 in eps(sb, y)]
        for g, xs in sa.get(x, {}).items():
            if g == EPS:
                continue
            for y2 in sb.get(y, {}).get(g, ()):
                nxt.extend((x2, y2) for x2 in xs)
        for pair in nxt:
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    return False


def pda_reaches(p: Pda, config, targets: PAutomaton) -> bool:
    """Forward reachability of ``targets`` from one configuration via ``post*``."""
    post = pda_poststar(p, PAutomaton.configurations(p, [config]))
    return pautomata_intersect(post, targets, p.states)


def pda_witness(p: Pda, targets: PAutomaton, max_configs: int = 200_000):
    """Shortest input word driving the PDA from its initial configuration into ``targets``.

    Breadth-first over (state, stack); terminates whenever the target is
    reachable. Returns None if ``max_configs`` is exhausted first.
    """
    init = (p.start, p.initial_stack)
    parent = {init: None}
    queue = deque([init])
    while queue and len(parent) <= max_configs:
        c = queue.popleft()
        if targets.accepts(*c):
            word = []
            while parent[c] is not None:
                c, a = parent[c]
                if a != EPS:
                    word.append(a)
            return tuple(reversed(word))
        q, stack = c
        for a in (EPS,) + p.alphabet:
            for t, st in p.moves(q, a, stack):
                nxt = (t, st)
                if nxt not in parent:
                    parent[nxt] = (c, a)
                    queue.append(nxt)
    return None


# -- LBA halting -------------------------------------------------------------

def lba_halts(l: Lba, w: Sequence) -> Check:
    """Halts(verdict) or Loops, decided via the finite configuration count."""
    v: Verdict = run_lba(l, w)
    bound = l.config_bound(len(tuple(w)))
    if v.status is Status.LOOP:
        return Check("loops", False, v.repeat, "configuration-count", bound,
                     detail={"steps": v.steps})
    return Check("halts", True, v.status.value, "configuration-count", bound,
                 detail={"steps": v.steps})


# -- capability matrix -------------------------------------------------------

DECIDABLE = "decidable"
IF_DETERMINISTIC = "decidable-if-deterministic"
UNDECIDABLE = "undecidable"

QUERIES = ("safety", "inevitability", "membership", "halting", "equivalence")


@dataclass(frozen=True)
class Capability:
    status: str
    claim: str
    implemented: bool = True
    general: str | None = None

    def to_dict(self) -> dict:
        out = {"status": self.status, "claim": self.claim, "implemented": self.implemented}
        if self.general:
            out["in_general"] = self.general
        return out


CAPABILITIES = {
    ClassLabel.Regular: {
        "safety": Capability(DECIDABLE, "state reachability in a finite graph (fa_safety)"),
        "inevitability": Capability(DECIDABLE, "cycle search outside the goal set (fa_inevitability)"),
        "membership": Capability(DECIDABLE, "one pass of the extended transition function (run_dfa)"),
        "halting": Capability(DECIDABLE, "every run stops when the finite input is consumed"),
        "equivalence": Capability(DECIDABLE, "emptiness of the symmetric-difference product (dfa_equivalence)"),
    },
    ClassLabel.ContextFree: {
        "safety": Capability(DECIDABLE, "pushdown reachability by pre* saturation (pda_prestar)"),
        "inevitability": Capability(DECIDABLE, "pushdown liveness model checking; not implemented here",
                                    implemented=False),
        "membership": Capability(DECIDABLE, "configuration search with duplicate suppression (run_pda)"),
        "halting": Capability(DECIDABLE, "epsilon-loop detection over finitely many heads; "
                                         "not implemented beyond budgeted runs", implemented=False),
        "equivalence": Capability(IF_DETERMINISTIC, "undecidable for nondeterministic PDAs; decidable "
                                                    "for DPDAs at very high cost; not implemented",
                                  implemented=False, general=UNDECIDABLE),
    },
    ClassLabel.ContextSensitive: {
        "safety": Capability(UNDECIDABLE, "LBA emptiness is undecidable over all inputs; "
                                          "per-input reachability is decidable via run_lba"),
        "inevitability": Capability(UNDECIDABLE, "as safety: undecidable over all inputs"),
        "membership": Capability(DECIDABLE, "finite configuration space per input (run_lba)"),
        "halting": Capability(DECIDABLE, "configuration count |Q|(n+2)|Gamma|^n bounds any halting run (lba_halts)"),
        "equivalence": Capability(UNDECIDABLE, "LBA language equivalence is undecidable"),
    },
    ClassLabel.TuringComplete: {
        "safety": Capability(UNDECIDABLE, "Rice's theorem: non-trivial semantic properties"),
        "inevitability": Capability(UNDECIDABLE, "Rice's theorem: non-trivial semantic properties"),
        "membership": Capability(UNDECIDABLE, "semi-decidable only; run_tm is budgeted"),
        "halting": Capability(UNDECIDABLE, "the halting problem"),
        "equivalence": Capability(UNDECIDABLE, "Rice's theorem: non-trivial semantic properties"),
    },
}

SUPPORTED_DISCIPLINES = {
    ClassLabel.Regular: {Discipline.none},
    ClassLabel.ContextFree: {Discipline.none, Discipline.lifo},
    ClassLabel.ContextSensitive: {Discipline.none, Discipline.lifo, Discipline.bounded_rw},
    ClassLabel.TuringComplete: set(Discipline),
}


def capability_query(cls: ClassLabel | str, query: str) -> Capability:
    if isinstance(cls, str):
        cls = ClassLabel.parse(cls)
    if query not in QUERIES:
        raise ValueError(f"query must be one of {QUERIES}")
    return CAPABILITIES[cls][query]
