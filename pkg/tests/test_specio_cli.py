from __future__ import annotations

import json

import pytest

from _specs import SPECS, spec, spec_path
from automata_agents import cli
from automata_agents.errors import ParseError, ValidationError
from automata_agents.mas import ProductSystem, SharedTapeSystem
from automata_agents.specio import dumps, emit, from_dict, parse_spec, parse_text

BUNDLED = sorted(p.name[:-5] for p in SPECS.iterdir() if p.name.endswith(".json"))


@pytest.mark.parametrize("name", BUNDLED)
def test_round_trip(name):
    x = spec(name)
    y = parse_text(dumps(x))
    assert emit(y) == emit(x)
    if not isinstance(x, (ProductSystem, SharedTapeSystem)):
        assert type(y) is type(x)


def test_bundle_is_complete():
    assert len(BUNDLED) == 24


def test_push_outside_stack_alphabet():
    doc = json.loads((SPECS / "pda_anbn.json").read_text())
    doc["transitions"][0][4] = ["Q"]
    with pytest.raises(ValidationError) as e:
        from_dict(doc)
    assert any("Q" in p for p in e.value.problems)


def test_discipline_mismatch():
    doc = json.loads((SPECS / "agent_regular_assistant.json").read_text())
    doc["rules"] = doc.pop("edges")
    with pytest.raises(ValidationError) as e:
        from_dict(doc, json.dumps(doc, indent=1))
    assert any("discipline/delta mismatch" in p for p in e.value.problems)


def test_parse_error_line():
    with pytest.raises(ParseError) as e:
        parse_text('{\n  "kind": "dfa",\n  "states": [,\n}')
    assert e.value.line == 3


def test_unknown_field_reports_line():
    text = '{\n "kind": "dfa",\n "states": ["q"],\n "alphabet": ["a"],\n "start": "q",\n' \
           ' "accept": [],\n "transitions": [["q", "a", "q"]],\n "colour": "red"\n}'
    with pytest.raises(ValidationError) as e:
        parse_text(text)
    assert "colour (line 8): unknown field" in e.value.problems


def test_minimal_dfa_is_empty():
    d = spec("dfa_minimal")
    assert len(d.states) == 1 and not d.accept
    assert not any(d.accepts(["a"] * n) for n in range(5))


def test_missing_file():
    with pytest.raises(ParseError):
        parse_spec(SPECS / "no_such.json")


class TestCli:
    def test_verify_violated(self, capsys):
        assert cli.main(["verify", "--spec", spec_path("dfa_chain3"), "--safety", "--unsafe", "q2"]) == 1
        assert "witness: a a" in capsys.readouterr().out

    def test_verify_safe(self):
        assert cli.main(["verify", "--spec", spec_path("guard_core_dfa"), "--safety",
                         "--unsafe", "shutdown"]) == 0

    def test_classify_framework(self, capsys):
        assert cli.main(["classify", "--framework", "ReAct"]) == 0
        assert "TuringComplete" in capsys.readouterr().out

    def test_convert_nfa(self, capsys):
        assert cli.main(["convert", "--spec", spec_path("nfa_ends_ab"), "--to", "dfa"]) == 0
        assert capsys.readouterr().out.strip()

    def test_bad_spec(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"kind": "dfa"}')
        assert cli.main(["run", "--spec", str(bad), "--input", "a"]) == 2
        assert "required field missing" in capsys.readouterr().err

    def test_run_structured(self, capsys):
        assert cli.main(["run", "--spec", spec_path("dfa_even_a"), "--input", "a a",
                         "--format", "structured"]) == 0
        assert json.loads(capsys.readouterr().out)["status"] == "accept"
        assert cli.main(["run", "--spec", spec_path("dfa_even_a"), "--input", "a"]) == 1

    def test_unknown_framework(self, capsys):
        assert cli.main(["classify", "--framework", "Crew AI"]) == 2
        assert "CrewAI" in capsys.readouterr().err
