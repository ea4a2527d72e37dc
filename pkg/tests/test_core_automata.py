from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from _gen import random_dfa, random_nfa
from _oracles import dfa_walk, nfa_set_accepts, words
from automata_agents.errors import AlphabetMismatch, UnknownSymbol, ValidationError
from automata_agents.fa import (EPS, Dfa, Mealy, Nfa, dfa_product, nfa_accepts, nfa_to_dfa,
                                run_dfa, run_mealy)

seeds = st.integers(0, 2**32 - 1)


def even_a():
    return Dfa.build(["e", "o"], ["a", "b"],
                     [("e", "a", "o"), ("o", "a", "e"), ("e", "b", "e"), ("o", "b", "o")], "e", ["e"])


def even_b():
    return Dfa.build(["e", "o"], ["a", "b"],
                     [("e", "b", "o"), ("o", "b", "e"), ("e", "a", "e"), ("o", "a", "o")], "e", ["e"])


class TestRunDfa:
    def test_empty_word_visits_start(self):
        t = run_dfa(even_a(), [])
        assert t.visited == ("e",) and t.accepted

    # "aab" holds two a's, so the parity count accepts it
    @pytest.mark.parametrize("w,want", [("aab", True), ("aa", True), ("", True), ("bab", False),
                                        ("ab", False)])
    def test_even_a(self, w, want):
        assert want == (w.count("a") % 2 == 0)
        assert run_dfa(even_a(), list(w)).accepted is want

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol):
            run_dfa(even_a(), ["a", "z"])

    def test_visited_links_by_delta(self):
        d = even_a()
        t = run_dfa(d, list("abba"))
        assert len(t.visited) == 5
        for i, a in enumerate(t.input):
            assert d.delta[(t.visited[i], a)] == t.visited[i + 1]

    def test_build_completes_with_sink(self):
        d = Dfa.build(["q0", "q1"], ["a"], [("q0", "a", "q1")], "q0", ["q1"])
        assert d.sink is not None and d.sink in d.states
        assert run_dfa(d, ["a"]).accepted and not run_dfa(d, ["a", "a"]).accepted

    def test_partial_table_rejected_by_constructor(self):
        with pytest.raises(ValidationError):
            Dfa(["q0"], ["a"], {}, "q0", [])

    @given(seeds)
    def test_deterministic(self, seed):
        rng = random.Random(seed)
        d = random_dfa(rng)
        w = [rng.choice(d.alphabet) for _ in range(rng.randint(0, 8))]
        assert run_dfa(d, w) == run_dfa(d, w)


class TestSubsetConstruction:
    def test_single_state_accepts_only_empty(self):
        n = Nfa.build(["q0"], ["a"], [], "q0", ["q0"])
        d = nfa_to_dfa(n)
        assert run_dfa(d, []).accepted
        assert not any(run_dfa(d, w).accepted for w in words("a", 4) if w)

    def test_substring_ab(self):
        n = Nfa.build(["q0", "q1", "q2"], ["a", "b"],
                      [("q0", "a", "q0"), ("q0", "b", "q0"), ("q0", "a", "q1"), ("q1", "b", "q2"),
                       ("q2", "a", "q2"), ("q2", "b", "q2")], "q0", ["q2"])
        d = nfa_to_dfa(n)
        reachable = {d.start} | {d.delta[(q, a)] for q in d.states for a in d.alphabet}
        assert len(reachable) == len(d.states)
        for w in words("ab", 5):
            assert run_dfa(d, w).accepted == ("ab" in "".join(w)) == nfa_set_accepts(n, w)

    def test_epsilon_cycle_terminates(self):
        n = Nfa.build(["p", "q", "r"], ["a"],
                      [("p", EPS, "q"), ("q", EPS, "p"), ("q", "a", "r"), ("r", EPS, "p")], "p", ["r"])
        d = nfa_to_dfa(n)
        for w in words("a", 4):
            assert run_dfa(d, w).accepted == nfa_set_accepts(n, w)

    def test_labels_are_sorted_subsets(self):
        n = Nfa.build(["q0", "q1"], ["a"], [("q0", "a", "q1"), ("q0", "a", "q0")], "q0", ["q1"])
        d = nfa_to_dfa(n)
        assert "{q0,q1}" in d.states
        assert d.labels["{q0,q1}"] == frozenset({"q0", "q1"})

    def test_eps_not_allowed_in_alphabet(self):
        with pytest.raises(ValidationError):
            Nfa.build(["q"], [EPS], [], "q", [])

    @settings(max_examples=60)
    @given(seeds)
    def test_agrees_with_direct_search(self, seed):
        rng = random.Random(seed)
        n = random_nfa(rng)
        d = nfa_to_dfa(n)
        for w in words(n.alphabet, 5):
            assert dfa_walk(d, w) == nfa_accepts(n, w) == nfa_set_accepts(n, w)


def assistant():
    return Mealy.build(
        ["idle", "intent", "slot", "confirm", "done"], ["invoke", "intent", "slot", "confirm"],
        [("idle", "invoke", "intent", "listen"), ("intent", "intent", "slot", "parse_intent"),
         ("slot", "slot", "confirm", "fill_slot"), ("confirm", "confirm", "done", "execute")],
        "idle", ["done"])


class TestMealy:
    def test_empty_word_no_outputs(self):
        assert run_mealy(assistant(), []).outputs == ()

    def test_echo(self):
        m = Mealy.build(["q"], ["a", "b"], [("q", "a", "q", "a"), ("q", "b", "q", "b")], "q", ["q"])
        assert run_mealy(m, ["a", "b"]).outputs == ("a", "b")

    def test_four_stage_dialogue(self):
        t = run_mealy(assistant(), ["invoke", "intent", "slot", "confirm"])
        assert t.outputs == ("listen", "parse_intent", "fill_slot", "execute") and t.accepted

    def test_missing_output_rejected(self):
        with pytest.raises(ValidationError):
            Mealy(["q"], ["a"], {("q", "a"): "q"}, "q", [], output_alphabet=["x"], lam={})

    @given(seeds)
    def test_output_length(self, seed):
        rng = random.Random(seed)
        m = assistant()
        w = [rng.choice(m.alphabet) for _ in range(rng.randint(0, 7))]
        t = run_mealy(m, w)
        assert len(t.outputs) == len(w)
        assert all(t.outputs[i] == m.lam[(t.visited[i], w[i])] for i in range(len(w)))


class TestProduct:
    def test_self_difference_empty(self):
        d = even_a()
        p = dfa_product(d, d, "difference")
        assert not any(run_dfa(p, w).accepted for w in words("ab", 5))

    def test_even_a_and_even_b(self):
        p = dfa_product(even_a(), even_b(), "intersection")
        assert run_dfa(p, list("aabb")).accepted and not run_dfa(p, list("ab")).accepted
        for w in words("ab", 4):
            assert run_dfa(p, w).accepted == (w.count("a") % 2 == 0 and w.count("b") % 2 == 0)

    def test_union_absorption(self):
        eps_only = Dfa.build(["s", "x"], ["a"], [("s", "a", "x"), ("x", "a", "x")], "s", ["s"])
        star = Dfa.build(["s"], ["a"], [("s", "a", "s")], "s", ["s"])
        p = dfa_product(eps_only, star, "union")
        assert all(run_dfa(p, w).accepted for w in words("a", 5))

    def test_alphabet_mismatch(self):
        other = Dfa.build(["s"], ["c"], [("s", "c", "s")], "s", [])
        with pytest.raises(AlphabetMismatch):
            dfa_product(even_a(), other)

    @settings(max_examples=50)
    @given(seeds)
    def test_language_law(self, seed):
        rng = random.Random(seed)
        alphabet = ("a", "b")[: rng.randint(1, 2)]
        a, b = random_dfa(rng, alphabet=alphabet), random_dfa(rng, alphabet=alphabet)
        laws = {"intersection": lambda x, y: x and y, "union": lambda x, y: x or y,
                "difference": lambda x, y: x and not y}
        for mode, law in laws.items():
            p = dfa_product(a, b, mode)
            assert len(p.states) <= len(a.states) * len(b.states)
            for w in words(alphabet, 6):
                assert dfa_walk(p, w) == law(dfa_walk(a, w), dfa_walk(b, w))
