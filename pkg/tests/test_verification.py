from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from _gen import random_dfa, random_lba, random_pda
from _oracles import dfa_walk, lba_exhaustive, pds_forward, stacks_up_to, words
from _specs import spec
from automata_agents.classes import ClassLabel
from automata_agents.equivalence import check_trace_equivalence
from automata_agents.errors import UnknownState
from automata_agents.fa import Dfa
from automata_agents.machines import Pda, replay_lba
from automata_agents.verification import (PAutomaton, capability_query, dfa_equivalence,
                                          fa_inevitability, fa_safety, lba_halts,
                                          pda_poststar, pda_prestar, pda_reaches,
                                          pda_witness, pautomata_intersect)

seeds = st.integers(0, 2**32 - 1)


def walk_states(d, w):
    q = d.start
    out = [q]
    for a in w:
        q = d.delta[(q, a)]
        out.append(q)
    return out


class TestSafety:
    def test_empty_unsafe_is_safe(self):
        assert fa_safety(spec("dfa_chain3"), []).holds

    def test_unsafe_start(self):
        c = fa_safety(spec("dfa_chain3"), ["q0"])
        assert not c.holds and c.witness == ()

    def test_chain_witness(self):
        c = fa_safety(spec("dfa_chain3"), ["q2"])
        assert c.verdict == "violated" and c.witness == ("a", "a")

    def test_unknown_state(self):
        with pytest.raises(UnknownState):
            fa_safety(spec("dfa_chain3"), ["nowhere"])

    @settings(max_examples=80, deadline=None)
    @given(seeds)
    def test_witness_is_shortest(self, seed):
        rng = random.Random(seed)
        d = random_dfa(rng)
        unsafe = {q for q in d.states if rng.random() < 0.3}
        c = fa_safety(d, unsafe)
        # any reachable state is reachable within |Q|-1 steps
        hits = [w for w in words(d.alphabet, len(d.states)) if walk_states(d, w)[-1] in unsafe]
        if not hits:
            assert c.holds
        else:
            assert not c.holds and walk_states(d, c.witness)[-1] in unsafe
            assert len(c.witness) == min(len(w) for w in hits)


class TestInevitability:
    def test_chain(self):
        assert fa_inevitability(spec("dfa_chain3"), ["q2"]).holds

    def test_evadable_lasso(self):
        d = Dfa.build(["s", "g"], ["a", "b"], [("s", "a", "s"), ("s", "b", "g"),
                                                ("g", "a", "g"), ("g", "b", "g")], "s", [])
        c = fa_inevitability(d, ["g"])
        assert not c.holds and c.witness == ((), ("a",))

    @settings(max_examples=80, deadline=None)
    @given(seeds)
    def test_against_exhaustive_paths(self, seed):
        rng = random.Random(seed)
        d = random_dfa(rng)
        goal = {q for q in d.states if rng.random() < 0.4}
        c = fa_inevitability(d, goal)
        # a goal-free path of length |Q| repeats a free state, which is a lasso
        evading = [w for w in words(d.alphabet, len(d.states))
                   if len(w) == len(d.states) and not set(walk_states(d, w)) & goal]
        assert c.holds == (not evading)
        if not c.holds:
            stem, cycle = c.witness
            assert cycle
            visited = walk_states(d, stem + cycle + cycle)
            assert not set(visited) & goal
            assert walk_states(d, stem)[-1] == walk_states(d, stem + cycle)[-1]


class TestEquivalence:
    def test_self(self):
        assert dfa_equivalence(spec("dfa_even_a"), spec("dfa_even_a")).holds

    @settings(max_examples=80, deadline=None)
    @given(seeds)
    def test_agrees_with_word_comparison(self, seed):
        rng = random.Random(seed)
        alphabet = ("a", "b")
        a, b = random_dfa(rng, alphabet=alphabet), random_dfa(rng, alphabet=alphabet)
        c = dfa_equivalence(a, b)
        bound = len(a.states) * len(b.states)
        same, _ = check_trace_equivalence(a, b, bound)
        assert c.holds == same
        if not c.holds:
            assert dfa_walk(a, c.witness) != dfa_walk(b, c.witness)
            assert len(c.witness) <= bound


def counter_pda():
    return Pda.build(["q"], ["a", "b"], ["X"],
                     [("q", "a", "eps", "q", ["X"]), ("q", "b", "X", "q", [])], "q", ["q"])


class TestPushdown:
    def test_prestar_of_empty_stack(self):
        p = counter_pda()
        pre = pda_prestar(p, PAutomaton.empty_stack(p, ["q"]))
        for n in range(6):
            assert pre.accepts("q", ("X",) * n)

    def test_poststar_from_initial(self):
        p = spec("pda_anbn")
        post = pda_poststar(p, PAutomaton.configurations(p, [(p.start, p.initial_stack)]))
        assert post.accepts("p", ("A", "A", "Z"))
        assert post.accepts("f", ("Z",))
        assert not post.accepts("f", ("A", "Z"))

    def test_reaches_and_witness(self):
        p = spec("pda_anbn")
        target = PAutomaton.configurations(p, [("q", ("A", "Z"))])
        assert pda_reaches(p, (p.start, p.initial_stack), target)
        assert pda_witness(p, target) == ("a", "a", "b")

    def test_unreachable(self):
        p = spec("pda_anbn")
        target = PAutomaton.configurations(p, [("q", ("Z", "Z"))])
        assert not pda_reaches(p, (p.start, p.initial_stack), target)

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_prestar_matches_forward_search(self, seed):
        rng = random.Random(seed)
        p = random_pda(rng)
        goal = rng.choice(p.states)
        pre = pda_prestar(p, PAutomaton.empty_stack(p, [goal]))
        target = lambda c: c == (goal, ())  # noqa: E731
        for q in p.states:
            for stack in stacks_up_to(p.stack_alphabet, 3):
                found, truncated = pds_forward(p, (q, stack), target, max_nodes=5000)
                member = pre.accepts(q, stack)
                if found:
                    assert member
                elif not truncated:
                    assert not member
                exact = pautomata_intersect(
                    pda_poststar(p, PAutomaton.configurations(p, [(q, stack)])),
                    PAutomaton.empty_stack(p, [goal]), p.states)
                assert member == exact


class TestLbaHalting:
    def test_shuttle_loops(self):
        l = spec("lba_shuttle")
        c = lba_halts(l, ["a"])
        assert c.verdict == "loops" and c.bound == l.config_bound(1)
        config, first, again = c.witness
        assert first < again
        assert replay_lba(l, ["a"], first) == replay_lba(l, ["a"], again) == config

    def test_has_a(self):
        l = spec("lba_has_a")
        assert lba_halts(l, ["b", "a"]).witness == "accept"
        assert lba_halts(l, ["b", "b"]).witness == "reject"

    @settings(max_examples=60, deadline=None)
    @given(seeds)
    def test_against_exhaustive(self, seed):
        rng = random.Random(seed)
        l = random_lba(rng)
        for w in words(l.alphabet, 3):
            status, _ = lba_exhaustive(l, w)
            c = lba_halts(l, w)
            assert (c.verdict == "loops") == (status == "loop")
            if status != "loop":
                assert c.witness == status


class TestCapabilities:
    def test_regular_safety(self):
        assert capability_query(ClassLabel.Regular, "safety").status == "decidable"

    def test_cf_equivalence(self):
        c = capability_query("ContextFree", "equivalence")
        assert c.status == "decidable-if-deterministic" and c.general == "undecidable"
        assert not c.implemented

    def test_tc_halting(self):
        assert capability_query(ClassLabel.TuringComplete, "halting").status == "undecidable"

    def test_bad_query(self):
        with pytest.raises(ValueError):
            capability_query("Regular", "liveness")

    def test_all_cells_defined(self):
        for cls in ClassLabel:
            for q in ("safety", "inevitability", "membership", "halting", "equivalence"):
                assert capability_query(cls, q).claim


def test_check_to_dict():
    d = fa_safety(spec("dfa_chain3"), ["q2"]).to_dict()
    assert d["verdict"] == "violated" and d["witness"] == ["a", "a"] and d["reached"] == "q2"
    assert d["method"] == "bfs"
