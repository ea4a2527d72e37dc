from __future__ import annotations

import json

import pytest
from hypothesis import given, settings, strategies as st

from _specs import TRACES, spec
from automata_agents.classes import ClassLabel, Discipline
from automata_agents.errors import MalformedTrace, UnknownFramework, ValidationError
from automata_agents.sizing import (MemoryTrace, TaskRequirements, analyze_memory_discipline,
                                    classify_requirements, framework_class_lookup,
                                    framework_table, requirements_for)
from automata_agents.verification import SUPPORTED_DISCIPLINES

ORDER = list(ClassLabel)


class TestClassify:
    def test_no_memory(self):
        c = classify_requirements(TaskRequirements(False))
        assert c.label is ClassLabel.Regular and not c.extension

    def test_lifo(self):
        assert classify_requirements(TaskRequirements(True, "lifo")).label is ClassLabel.ContextFree

    def test_arbitrary(self):
        c = classify_requirements(TaskRequirements(True, Discipline.arbitrary_rw))
        assert c.label is ClassLabel.TuringComplete
        assert c.path[-2] == "access strictly LIFO? no"

    def test_bounded_is_flagged_extension(self):
        c = classify_requirements(TaskRequirements(True, "bounded_rw"))
        assert c.label is ClassLabel.ContextSensitive and c.extension
        assert any(step.startswith("[extension]") for step in c.path)

    def test_inconsistent_requirements(self):
        with pytest.raises(ValidationError):
            TaskRequirements(False, "lifo")
        with pytest.raises(ValidationError):
            TaskRequirements(True, "none")
        with pytest.raises(ValidationError):
            TaskRequirements(True, "random_access")

    def test_monotone_and_minimal(self):
        labels = [classify_requirements(requirements_for(d)).label for d in Discipline]
        assert [ORDER.index(x) for x in labels] == sorted(ORDER.index(x) for x in labels)
        for d, label in zip(Discipline, labels):
            assert d in SUPPORTED_DISCIPLINES[label]
            weaker = ORDER[: ORDER.index(label)]
            assert all(d not in SUPPORTED_DISCIPLINES[w] for w in weaker)


class TestTraces:
    def test_empty(self):
        r = analyze_memory_discipline([])
        assert r.discipline is Discipline.none and r.caveat

    def test_lifo(self):
        r = analyze_memory_discipline(["push", "push", "pop", "pop"])
        assert r.discipline is Discipline.lifo

    def test_read_below_top(self):
        r = analyze_memory_discipline([["push"], ["push"], ["push"], {"op": "read", "addr": 0}])
        assert r.discipline is Discipline.arbitrary_rw
        last = r.evidence[-1]
        assert (last["index"], last["op"], last["addr"]) == (3, "read", 0)

    def test_top_access_stays_lifo(self):
        assert analyze_memory_discipline(["push", "push", "read 1", "write 1"]).discipline is Discipline.lifo

    def test_window(self):
        ops = ["push", "push", "push", "read 0"]
        assert analyze_memory_discipline(ops, input_length=2, k=1).discipline is Discipline.bounded_rw
        assert analyze_memory_discipline(ops + ["write 9"], input_length=2, k=1).discipline is \
            Discipline.arbitrary_rw

    @pytest.mark.parametrize("name,expected", [("none", "none"), ("lifo", "lifo"),
                                               ("bounded", "bounded_rw"), ("arbitrary", "arbitrary_rw")])
    def test_bundled(self, name, expected):
        data = json.loads((TRACES / f"{name}.json").read_text())
        t = MemoryTrace.parse(data["ops"], data.get("input_length"), data.get("k"))
        assert analyze_memory_discipline(t).discipline.name == expected

    @pytest.mark.parametrize("bad", [["jump"], ["pop"], ["read"], ["read x"], [{"op": "write", "addr": -1}],
                                     [("push", 1, 2)], ["push", "pop", "peek"]])
    def test_malformed(self, bad):
        with pytest.raises(MalformedTrace):
            analyze_memory_discipline(bad)

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.one_of(st.just(("push",)), st.just(("pop",)),
                              st.tuples(st.sampled_from(["read", "write"]), st.integers(0, 6))),
                    max_size=12))
    def test_extension_never_weakens(self, raw):
        # keep only records that are valid given the running height
        ops, height = [], 0
        for rec in raw:
            if rec[0] == "pop":
                if height == 0:
                    continue
                height -= 1
            elif rec[0] == "push":
                height += 1
            elif rec[0] == "write":
                height = max(height, rec[1] + 1)
            ops.append(rec)
        levels = [analyze_memory_discipline(ops[:i]).discipline for i in range(len(ops) + 1)]
        assert levels == sorted(levels)
        if levels[-1] is Discipline.none:
            assert not ops


class TestFrameworks:
    def test_lookup(self):
        assert framework_class_lookup("ReAct").label is ClassLabel.TuringComplete
        assert framework_class_lookup("CrewAI").class_text == "Context-Free (PDA)"
        assert framework_class_lookup("IFTTT").label is ClassLabel.Regular

    def test_case_insensitive(self):
        assert framework_class_lookup("  crewai ").framework == "CrewAI"

    def test_unknown_suggests(self):
        with pytest.raises(UnknownFramework) as e:
            framework_class_lookup("Crew AI")
        assert "CrewAI" in e.value.suggestions

    def test_table_shape(self):
        table = framework_table()
        assert len(table) == 9
        assert {e.label for e in table} == {ClassLabel.Regular, ClassLabel.ContextFree,
                                            ClassLabel.TuringComplete}


@pytest.mark.parametrize("name,label", [("agent_regular_assistant", ClassLabel.Regular),
                                        ("agent_cf_planner", ClassLabel.ContextFree),
                                        ("agent_cs_marker", ClassLabel.ContextSensitive),
                                        ("agent_tc_anbn", ClassLabel.TuringComplete)])
def test_spec_discipline_agrees_with_kind(name, label):
    r = analyze_memory_discipline(spec(name))
    assert r.source == "spec"
    assert classify_requirements(requirements_for(r.discipline)).label is label
