"""Graphviz DOT rendering for machines and P-automata."""

from __future__ import annotations

from collections import defaultdict

from .fa import EPS, Dfa, Mealy, Nfa
from .machines import Lba, Pda, Tm


def _q(s) -> str:
    return '"' + str(s).replace('"', '\\"') + '"'


def _graph(name, states, start, accept, edges) -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  "" [shape=none];']
    for s in states:
        shape = "doublecircle" if s in accept else "circle"
        lines.append(f"  {_q(s)} [shape={shape}];")
    lines.append(f'  "" -> {_q(start)};')
    merged = defaultdict(list)
    for src, dst, label in edges:
        merged[(src, dst)].append(label)
    for (src, dst), labels in merged.items():
        text = ", ".join(labels).replace('"', '\\"')
        lines.append(f'  {_q(src)} -> {_q(dst)} [label="{text}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _eps(a) -> str:
    return "ε" if a == EPS else str(a)


def to_dot(m) -> str:
    if hasattr(m, "to_dot"):
        return m.to_dot() + "\n"
    if isinstance(m, Mealy):
        edges = [(q, t, f"{a}/{m.lam[(q, a)]}") for (q, a), t in m.delta.items()]
        return _graph("Mealy", m.states, m.start, m.accept, edges)
    if isinstance(m, Dfa):
        return _graph("DFA", m.states, m.start, m.accept, [(q, t, a) for (q, a), t in m.delta.items()])
    if isinstance(m, Nfa):
        return _graph("NFA", m.states, m.start, m.accept, [(q, t, _eps(a)) for q, a, t in m.transitions()])
    if isinstance(m, Pda):
        edges = [(q, t, f"{_eps(a)}, {_eps(z)} / {''.join(p) or 'ε'}") for q, a, z, t, p in m.transitions()]
        return _graph("PDA", m.states, m.start, m.accept, edges)
    if isinstance(m, (Lba, Tm)):
        edges = [(q, t, f"{x}/{y},{d}") for q, x, t, y, d in m.transitions()]
        return _graph(type(m).__name__.upper(), m.states, m.start, {m.accept_state}, edges)
    if hasattr(m, "dfa"):
        return to_dot(m.dfa)
    raise TypeError(f"no DOT rendering for {type(m).__name__}")
