"""Agent <-> automaton constructions, the plan-stack encoding and bounded
trace-equivalence checking.

Regular and context-free constructions are component-wise identities.
Context-sensitive agents with memory factor ``k > 1`` are packed into an
LBA whose cells hold ``k`` agent cells each. Turing-complete agents map to
a TM whose tape is the agent's memory: the agent reads its perceptions off
that tape, so the read-only input view of a two-tape simulation is never
consulted after the input has been copied in, and the memory tape alone
is executed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .agents import (CfAgent, CfRule, CsAgent, Edge, RegularAgent, TcAgent, run_agent)
from .errors import AlphabetMismatch, DisciplineViolation, ValidationError
from .fa import EPS, Dfa, Mealy, Nfa, _fresh
from .machines import LEFT_END, RIGHT_END, Lba, Pda, Tm, run_pda


@dataclass
class ConstructionReport:
    source: str
    target: str
    state_map: dict
    alphabet_map: dict
    notes: list = field(default_factory=list)
    validation: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"source": self.source, "target": self.target,
                "state_map": {str(k): _plain(v) for k, v in self.state_map.items()},
                "alphabet_map": dict(self.alphabet_map), "notes": list(self.notes),
                "validation": dict(self.validation)}


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def _identity(items) -> dict:
    return {x: x for x in items}


# -- agent -> automaton ------------------------------------------------------

def agent_to_automaton(agent):
    """Build the classical machine recognising the agent's language."""
    if isinstance(agent, RegularAgent):
        return _regular_to_fa(agent)
    if isinstance(agent, CfAgent):
        pda = Pda.build(agent.states, agent.alphabet, agent.stack_alphabet,
                        [(r.src, r.symbol, r.pop, r.dst, r.push) for r in agent.rules],
                        agent.start, agent.accept, agent.initial_stack)
        rep = ConstructionReport("context_free", "pda", _identity(agent.states),
                                 _identity(agent.alphabet))
        rep.notes.append(f"stack alphabet Z -> Gamma identity ({len(agent.stack_alphabet)} symbols)")
        return pda, rep
    if isinstance(agent, CsAgent):
        return _cs_to_lba(agent)
    if isinstance(agent, TcAgent):
        return _tc_to_tm(agent)
    raise TypeError(f"not an agent: {type(agent).__name__}")


def _regular_to_fa(agent: RegularAgent):
    state_map = _identity(agent.states)
    alph = _identity(agent.alphabet)
    if agent.deterministic and agent.total:
        delta = {(e.src, e.symbol): e.dst for e in agent.edges}
        if agent.edges and all(e.action is not None for e in agent.edges):
            lam = {(e.src, e.symbol): e.action for e in agent.edges}
            outs = agent.outputs or tuple(dict.fromkeys(lam.values()))
            m = Mealy(agent.states, agent.alphabet, delta, agent.start, agent.accept,
                      output_alphabet=outs, lam=lam)
            return m, ConstructionReport("regular", "mealy", state_map, alph)
        return (Dfa(agent.states, agent.alphabet, delta, agent.start, agent.accept),
                ConstructionReport("regular", "dfa", state_map, alph))
    nfa = Nfa.build(agent.states, agent.alphabet, [(e.src, e.symbol, e.dst) for e in agent.edges],
                    agent.start, agent.accept)
    rep = ConstructionReport("regular", "nfa", state_map, alph)
    rep.notes.append("policy has choice points or missing edges: the induced acceptor is an NFA")
    return nfa, rep


def _tc_to_tm(agent: TcAgent):
    taken = set(agent.states)
    acc = _fresh("q_accept", taken)
    rej = _fresh("q_reject", taken | {acc})
    # agent accept states are never entered: every move into one goes to acc
    states = [s for s in agent.states if s not in agent.accept] + [acc, rej]
    delta = {}
    for s in agent.states:
        if s in agent.accept:
            continue
        for x in agent.tape_alphabet:
            move = agent.delta.get((s, x))
            if move is None:
                delta[(s, x)] = (rej, x, "R")
            else:
                t, y, d = move
                delta[(s, x)] = (acc if t in agent.accept else t, y, d)
    start = acc if agent.start in agent.accept else agent.start
    tm = Tm(states, agent.alphabet, agent.tape_alphabet, delta, start, acc, rej, agent.blank)
    rep = ConstructionReport("turing_complete", "tm", _identity(agent.states),
                             _identity(agent.alphabet))
    rep.state_map.update({f: acc for f in agent.accept})
    rep.notes.append("two-tape view: tape 1 holds w read-only, tape 2 is the memory; "
                     "the agent encodes w on its memory, so tape 2 is executed as the TM tape")
    rep.notes.append(f"entering any of F={sorted(agent.accept)} goes to {acc!r}; missing moves go to {rej!r}")
    return tm, rep


def _pack(block: tuple) -> str:
    return "[" + "|".join(block) + "]"


def _cs_to_lba(agent: CsAgent):
    taken = set(agent.states)
    acc = _fresh("q_accept", taken)
    rej = _fresh("q_reject", taken | {acc})
    k = agent.k
    if k == 1:
        delta = {}
        for (s, x), (t, y, d) in agent.delta.items():
            if s in agent.accept:
                continue
            delta[(s, x)] = (acc if t in agent.accept else t, y, d)
        start = acc if agent.start in agent.accept else agent.start
        lba = Lba(list(agent.states) + [acc, rej], agent.alphabet, agent.tape_alphabet, delta,
                  start, acc, rej)
        rep = ConstructionReport("context_sensitive", "lba", _identity(agent.states),
                                 _identity(agent.alphabet))
        return lba, rep
    return _cs_to_lba_packed(agent, acc, rej)


def _cs_to_lba_packed(agent: CsAgent, acc: str, rej: str):
    """Each LBA cell carries ``k`` agent cells; the LBA state tracks the offset.

    A raw input symbol ``a`` stands for the block ``(a, blank, ..., blank)``.
    Moving within a block is a right move into a helper state followed by a
    left move back, since LBA heads cannot stay put.
    """
    k, blank = agent.k, agent.blank
    gamma = agent.tape_alphabet
    blocks = list(itertools.product(gamma, repeat=k))
    packed = [_pack(b) for b in blocks]
    tape = list(agent.alphabet) + packed
    name = {(s, j): f"{s}@{j}" for s in agent.states for j in range(k)}
    helper = {(s, j): f"{s}@{j}~" for s in agent.states for j in range(k)}

    def target(t, j):
        return acc if t in agent.accept else name[(t, j)]

    delta = {}
    for s in agent.states:
        if s in agent.accept:
            continue
        for j in range(k):
            here = name[(s, j)]
            left = agent.delta.get((s, LEFT_END))
            if left is not None:
                t, y, d = left
                delta[(here, LEFT_END)] = (target(t, 0), y, d)
            right = agent.delta.get((s, RIGHT_END))
            if right is not None:
                t, y, d = right
                delta[(here, RIGHT_END)] = (target(t, k - 1), y, d)
            cells = [((a,) + (blank,) * (k - 1), a) for a in agent.alphabet]
            cells += list(zip(blocks, packed))
            for block, sym in cells:
                move = agent.delta.get((s, block[j]))
                if move is None:
                    continue
                t, y, d = move
                if y in (LEFT_END, RIGHT_END):
                    raise ValidationError(f"delta[{s}, {block[j]}]: writes an endmarker", "CsAgent")
                written = _pack(block[:j] + (y,) + block[j + 1:])
                if d == "R" and j == k - 1:
                    delta[(here, sym)] = (target(t, 0), written, "R")
                elif d == "L" and j == 0:
                    delta[(here, sym)] = (target(t, k - 1), written, "L")
                else:
                    nj = j + 1 if d == "R" else j - 1
                    nxt = acc if t in agent.accept else helper[(t, nj)]
                    delta[(here, sym)] = (nxt, written, "R")
    for (t, j), h in helper.items():
        for sym in tape:
            delta[(h, sym)] = (name[(t, j)], sym, "L")
        delta[(h, RIGHT_END)] = (name[(t, j)], RIGHT_END, "L")
    start = acc if agent.start in agent.accept else name[(agent.start, 0)]
    states = list(name.values()) + list(helper.values()) + [acc, rej]
    lba = Lba(states, agent.alphabet, tape, delta, start, acc, rej)
    rep = ConstructionReport("context_sensitive", "lba",
                             {s: tuple(name[(s, j)] for j in range(k)) for s in agent.states},
                             _identity(agent.alphabet))
    rep.notes.append(f"k={k}: each LBA cell packs {k} memory cells; {len(blocks)} block symbols")
    return lba, rep


# -- automaton -> agent ------------------------------------------------------

def automaton_to_agent(machine):
    """Inverse constructions: every machine becomes the agent that simulates it."""
    if isinstance(machine, Mealy):
        edges = [Edge(q, a, t, machine.lam[(q, a)]) for q, a, t in machine.transitions()]
        agent = RegularAgent(machine.states, machine.start, machine.alphabet, edges,
                             machine.accept, outputs=machine.output_alphabet)
        return agent, ConstructionReport("mealy", "regular", _identity(machine.states),
                                         _identity(machine.alphabet))
    if isinstance(machine, (Dfa, Nfa)):
        if isinstance(machine, Nfa) and any(a == EPS for _, a in machine.delta):
            from .fa import nfa_to_dfa
            machine = nfa_to_dfa(machine)
            note = "epsilon moves removed by the subset construction first"
        else:
            note = None
        edges = [Edge(q, a, t) for q, a, t in machine.transitions()]
        agent = RegularAgent(machine.states, machine.start, machine.alphabet, edges, machine.accept)
        kind = "dfa" if isinstance(machine, Dfa) else "nfa"
        rep = ConstructionReport(kind, "regular", _identity(machine.states),
                                 _identity(machine.alphabet))
        if note:
            rep.notes.append(note)
        return agent, rep
    if isinstance(machine, Pda):
        rules = [CfRule(q, a, z, t, push) for q, a, z, t, push in machine.transitions()]
        agent = CfAgent(machine.states, machine.start, machine.alphabet, machine.stack_alphabet,
                        rules, machine.accept, machine.initial_stack)
        return agent, ConstructionReport("pda", "context_free", _identity(machine.states),
                                         _identity(machine.alphabet))
    if isinstance(machine, Lba):
        delta = {(q, x): m for (q, x), m in machine.delta.items()
                 if q not in (machine.accept_state, machine.reject_state)}
        agent = CsAgent(machine.states, machine.start, machine.alphabet, machine.tape_alphabet,
                        delta, {machine.accept_state}, k=1)
        return agent, ConstructionReport("lba", "context_sensitive", _identity(machine.states),
                                         _identity(machine.alphabet))
    if isinstance(machine, Tm):
        delta = {(q, x): m for (q, x), m in machine.delta.items() if q not in machine.halting}
        agent = TcAgent(machine.states, machine.start, machine.alphabet, machine.tape_alphabet,
                        delta, {machine.accept_state}, machine.blank)
        rep = ConstructionReport("tm", "turing_complete",
                                 {q: (q, "i") for q in machine.states}, _identity(machine.alphabet))
        rep.notes.append("agent state is the pair (TM state, head index); memory holds the tape")
        return agent, rep
    raise TypeError(f"no agent construction for {type(machine).__name__}")


# -- plan stacks -------------------------------------------------------------

@dataclass(frozen=True)
class PlanFrame:
    """One pending subgoal; ``return_point`` is ``alternative:next_child`` inside it."""

    subgoal: str
    return_point: str

    @property
    def symbol(self) -> str:
        return f"{self.subgoal}[{self.return_point}]"


BOTTOM = "$"


def plan_symbols(subgoal: str) -> tuple:
    return f"enter:{subgoal}", f"done:{subgoal}"


def plan_to_pda(rules: Mapping, root: str, frames: Sequence[PlanFrame] | None = None) -> Pda:
    """Encode a hierarchical plan as a PDA over ``enter:g`` / ``done:g`` perceptions.

    ``rules[g]`` lists alternative expansions of subgoal ``g``, each a
    sequence of child subgoals; a subgoal without rules is a leaf. Entering a
    child pushes its frame over the parent's resumed frame; completing a
    subgoal pops its frame. Steps that are not plain subgoal names (e.g.
    ``{"jump": g}``) would transfer control into a non-top frame and are
    refused.
    """
    goals = _reachable_goals(rules, root)
    expansions = {g: [tuple(e) for e in rules.get(g, [()])] or [()] for g in goals}
    needed = []
    for g in goals:
        for a, exp in enumerate(expansions[g]):
            for i in range(len(exp) + 1):
                needed.append(PlanFrame(g, f"{a}:{i}"))
    if frames is not None:
        missing = set(needed) - set(frames)
        if missing:
            raise DisciplineViolation(
                f"frame vocabulary lacks {sorted(f.symbol for f in missing)}")
    alphabet = [s for g in goals for s in plan_symbols(g)]
    stack = [f.symbol for f in needed] + [BOTTOM]
    moves = []
    for a in range(len(expansions[root])):
        moves.append(("idle", f"enter:{root}", EPS, "active", (PlanFrame(root, f"{a}:0").symbol, BOTTOM)))
    for g in goals:
        for a, exp in enumerate(expansions[g]):
            for i, child in enumerate(exp):
                here = PlanFrame(g, f"{a}:{i}").symbol
                resume = PlanFrame(g, f"{a}:{i + 1}").symbol
                for ca in range(len(expansions[child])):
                    moves.append(("active", f"enter:{child}", here, "active",
                                  (PlanFrame(child, f"{ca}:0").symbol, resume)))
            moves.append(("active", f"done:{g}", PlanFrame(g, f"{a}:{len(exp)}").symbol, "active", ()))
    moves.append(("active", EPS, BOTTOM, "complete", ()))
    return Pda.build(["idle", "active", "complete"], alphabet, stack, moves, "idle", {"complete"})


def _reachable_goals(rules: Mapping, root: str) -> list:
    order, seen, work = [], {root}, [root]
    while work:
        g = work.pop(0)
        order.append(g)
        for exp in rules.get(g, []):
            for step in exp:
                if not isinstance(step, str):
                    raise DisciplineViolation(
                        f"subgoal {g!r}: step {step!r} is not a plain subgoal call; "
                        "jumps into non-top frames and interleaved stacks break LIFO discipline")
                if step not in seen:
                    seen.add(step)
                    work.append(step)
    return order


# -- bounded trace equivalence -----------------------------------------------

def all_words(alphabet: Sequence, max_len: int):
    """All words of length 0..max_len in shortlex order (the kernel layout)."""
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def word_at(alphabet: Sequence, index: int) -> tuple:
    k = len(alphabet)
    n, base = 0, 0
    while index >= base + k**n:
        base += k**n
        n += 1
    off = index - base
    digits = []
    for _ in range(n):
        off, r = divmod(off, k)
        digits.append(alphabet[r])
    return tuple(reversed(digits))


def _dfa_bits(dfa: Dfa, alphabet, max_len) -> np.ndarray:
    qi, ai, table, acc = dfa.index
    table = np.ascontiguousarray(table[:, [ai[a] for a in alphabet]])
    states = kernels.dfa_word_states(table, np.int32(qi[dfa.start]), max_len)
    return acc[states]


def _nfa_bits(nfa: Nfa, alphabet, max_len) -> np.ndarray:
    start, step, acc = nfa.step_masks
    ai = {a: i for i, a in enumerate(nfa.alphabet)}
    step = np.ascontiguousarray(step[:, [ai[a] for a in alphabet]])
    masks = kernels.nfa_word_masks(step, np.uint64(start), max_len)
    return (masks & np.uint64(acc)) != 0


def _closure_bits(alphabet, max_len, init, eps_succ, sym_succ, accepting, cap) -> np.ndarray | None:
    """Walk the word trie carrying epsilon-closed configuration sets.

    Returns None if a closure exceeds ``cap`` configurations (an unbounded
    epsilon-reachable stack), so callers can fall back to budgeted runs.
    """
    cache = {}

    def close(seed):
        seen = set(seed)
        work = list(seed)
        while work:
            c = work.pop()
            for d in eps_succ(c):
                if d not in seen:
                    seen.add(d)
                    if len(seen) > cap:
                        raise OverflowError
                    work.append(d)
        return frozenset(seen)

    def step(cfgs, a):
        key = (cfgs, a)
        if key not in cache:
            cache[key] = close({d for c in cfgs for d in sym_succ(c, a)})
        return cache[key]

    try:
        level = [close({init})]
        out = [any(accepting(c) for c in level[0])]
        for _ in range(max_len):
            nxt = [step(cfgs, a) for cfgs in level for a in alphabet]
            acc_cache = {}
            for cfgs in nxt:
                if cfgs not in acc_cache:
                    acc_cache[cfgs] = any(accepting(c) for c in cfgs)
                out.append(acc_cache[cfgs])
            level = nxt
    except OverflowError:
        return None
    return np.array(out, dtype=bool)


def _pda_bits(pda: Pda, alphabet, max_len, budget, cap=20_000) -> np.ndarray:
    bits = _closure_bits(
        alphabet, max_len, (pda.start, pda.initial_stack),
        lambda c: pda.moves(c[0], EPS, c[1]),
        lambda c, a: pda.moves(c[0], a, c[1]),
        lambda c: c[0] in pda.accept, cap)
    if bits is None:
        bits = np.array([run_pda(pda, w, budget).accepted for w in all_words(alphabet, max_len)])
    return bits


def _cf_agent_bits(agent: CfAgent, alphabet, max_len, budget, cap=20_000) -> np.ndarray:
    def succ(c, a):
        q, stack = c
        top = stack[0] if stack else None
        for r in agent.applicable(q, a, top):
            yield r.dst, r.push + (stack[1:] if r.pop != EPS else stack)

    bits = _closure_bits(alphabet, max_len, (agent.start, agent.initial_stack),
                         lambda c: succ(c, EPS), succ, lambda c: c[0] in agent.accept, cap)
    if bits is None:
        bits = np.array([run_agent(agent, w, budget).accepted for w in all_words(alphabet, max_len)])
    return bits


def _tape_bits(machine, alphabet, max_len, budget) -> np.ndarray:
    """Batch-run an Lba or Tm over every word with the tape kernel."""
    is_lba = isinstance(machine, Lba)
    syms = list(machine.tape_alphabet) + ([LEFT_END, RIGHT_END] if is_lba else [])
    si = {s: i for i, s in enumerate(syms)}
    qi = {q: i for i, q in enumerate(machine.states)}
    nq, ns = len(machine.states), len(syms)
    nxt = np.full((nq, ns), -1, dtype=np.int64)
    wr = np.zeros((nq, ns), dtype=np.int64)
    mv = np.zeros((nq, ns), dtype=np.int64)
    for q, x, t, y, d in machine.transitions():
        nxt[qi[q], si[x]] = qi[t]
        wr[qi[q], si[x]] = si[y]
        mv[qi[q], si[x]] = 1 if d == "R" else -1
    words = list(all_words(alphabet, max_len))
    if is_lba:
        width = max_len + 2
        tapes = np.full((len(words), width), si[RIGHT_END], dtype=np.int64)
        limits = np.empty(len(words), dtype=np.int64)
        for r, w in enumerate(words):
            tapes[r, 0] = si[LEFT_END]
            tapes[r, 1:len(w) + 1] = [si[a] for a in w]
            # one step past the configuration bound proves a loop
            limits[r] = machine.config_bound(len(w)) + 1
    else:
        width = max_len + budget + 2
        tapes = np.full((len(words), width), si[machine.blank], dtype=np.int64)
        for r, w in enumerate(words):
            tapes[r, :len(w)] = [si[a] for a in w]
        limits = np.full(len(words), budget, dtype=np.int64)
    status, _ = kernels.tape_run_batch(nxt, wr, mv, tapes, qi[machine.start],
                                       qi[machine.accept_state], qi[machine.reject_state], limits)
    return status == 1


def language_bits(m, alphabet: Sequence, max_len: int, budget: int = 500) -> np.ndarray:
    """Membership of every word up to ``max_len``, shortlex over ``alphabet``.

    Budgeted engines (TM, TC agents, PDA fallbacks) count a timeout as non-membership.
    """
    alphabet = tuple(alphabet)
    if hasattr(m, "language_bits"):
        return m.language_bits(alphabet, max_len)
    if isinstance(m, Dfa):
        return _dfa_bits(m, alphabet, max_len)
    if isinstance(m, Nfa):
        if len(m.states) <= 64:
            return _nfa_bits(m, alphabet, max_len)
        return np.array([m.accepts(w) for w in all_words(alphabet, max_len)])
    if isinstance(m, RegularAgent):
        machine, _ = agent_to_automaton(m)
        return language_bits(machine, alphabet, max_len, budget)
    if isinstance(m, Pda):
        return _pda_bits(m, alphabet, max_len, budget)
    if isinstance(m, CfAgent):
        return _cf_agent_bits(m, alphabet, max_len, budget)
    if isinstance(m, (Lba, Tm)):
        return _tape_bits(m, alphabet, max_len, budget)
    if isinstance(m, (CsAgent, TcAgent)):
        return np.array([run_agent(m, w, budget).accepted for w in all_words(alphabet, max_len)])
    raise TypeError(f"cannot enumerate the language of {type(m).__name__}")


def check_trace_equivalence(m1, m2, max_len: int, budget: int = 500):
    """Compare membership of every word up to ``max_len``.

    Returns ``(True, None)`` or ``(False, w)`` with ``w`` the first
    disagreeing word in shortlex order.
    """
    if set(m1.alphabet) != set(m2.alphabet):
        raise AlphabetMismatch(m1.alphabet, m2.alphabet)
    alphabet = tuple(m1.alphabet)
    b1 = language_bits(m1, alphabet, max_len, budget)
    b2 = language_bits(m2, alphabet, max_len, budget)
    diff = np.flatnonzero(b1 != b2)
    if diff.size == 0:
        return True, None
    return False, word_at(alphabet, int(diff[0]))


def validate_construction(source, target, report: ConstructionReport, max_len: int = 6,
                          budget: int = 500) -> ConstructionReport:
    """Record a bounded conformance check of ``source`` vs ``target`` in the report."""
    ok, w = check_trace_equivalence(source, target, max_len, budget)
    report.validation = {"method": "bounded-exhaustive", "max_len": max_len, "budget": budget,
                         "words": int(sum(len(source.alphabet) ** n for n in range(max_len + 1))),
                         "equivalent": ok, "witness": list(w) if w is not None else None}
    return report


__all__ = [
    "ConstructionReport", "PlanFrame", "agent_to_automaton", "automaton_to_agent",
    "plan_to_pda", "plan_symbols", "check_trace_equivalence", "language_bits", "all_words",
    "word_at", "validate_construction",
]
