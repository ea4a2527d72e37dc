"""JSON spec files for every machine, agent, PFA and system kind.

Every file is an object with a ``kind`` discriminator. Unknown fields are
errors. Validation failures are collected and raised together, each
prefixed with the field path and, for top-level fields, the line where the
field appears.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .agents import CfAgent, CsAgent, RegularAgent, TcAgent, Tokenizer
from .errors import ParseError, ValidationError
from .fa import Dfa, Mealy, Nfa
from .machines import Lba, Pda, Tm
from .mas import ProductSystem, SharedTapeSystem, compose_product, system_from_partition
from .risk import Pfa

FIELDS = {
    "dfa": ({"states", "alphabet", "start", "accept", "transitions"}, {"name", "description"}),
    "mealy": ({"states", "alphabet", "start", "accept", "transitions"},
              {"outputs", "idle_output", "name", "description"}),
    "nfa": ({"states", "alphabet", "start", "accept", "transitions"}, {"name", "description"}),
    "pda": ({"states", "alphabet", "stack_alphabet", "start", "accept", "transitions"},
            {"initial_stack", "name", "description"}),
    "lba": ({"states", "alphabet", "tape_alphabet", "start", "accept_state", "reject_state",
             "transitions"}, {"name", "description"}),
    "tm": ({"states", "alphabet", "tape_alphabet", "start", "accept_state", "reject_state",
            "transitions"}, {"blank", "name", "description"}),
    "regular": ({"states", "start", "alphabet", "edges", "accept"},
                {"outputs", "tokenizer", "oracle", "discipline", "name", "description"}),
    "context_free": ({"states", "start", "alphabet", "stack_alphabet", "rules", "accept"},
                     {"initial_stack", "discipline", "name", "description"}),
    "context_sensitive": ({"states", "start", "alphabet", "tape_alphabet", "delta", "accept"},
                          {"k", "blank", "discipline", "name", "description"}),
    "turing_complete": ({"states", "start", "alphabet", "tape_alphabet", "delta", "accept"},
                        {"blank", "discipline", "name", "description"}),
    "pfa": ({"states", "alphabet", "matrices", "initial"}, {"unsafe", "name", "description"}),
    "system": ({"mode"}, {"agents", "accept", "program", "partition", "order", "name",
                          "description"}),
}

KIND_DISCIPLINE = {"regular": "none", "context_free": "lifo",
                   "context_sensitive": "bounded_rw", "turing_complete": "arbitrary_rw"}
DISCIPLINE_KIND = {v: k for k, v in KIND_DISCIPLINE.items()}
# the field that carries each discipline's transition structure
MEMORY_FIELD = {"none": "edges", "lifo": "rules", "bounded_rw": "delta", "arbitrary_rw": "delta"}


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(text, key) -> str:
    line = _line_of(text, key)
    return f"{key} (line {line})" if line else key


def _check_fields(kind: str, doc: Mapping, text: str | None) -> list:
    required, optional = FIELDS[kind]
    problems = []
    for k in sorted(required - set(doc)):
        problems.append(f"{k}: required field missing")
    for k in sorted(set(doc) - required - optional - {"kind"}):
        if kind in KIND_DISCIPLINE and k in MEMORY_FIELD.values():
            problems.append(f"{_where(text, k)}: discipline/delta mismatch: a "
                            f"{KIND_DISCIPLINE[kind]} agent declares transitions in "
                            f"'{MEMORY_FIELD[KIND_DISCIPLINE[kind]]}', not '{k}'")
        else:
            problems.append(f"{_where(text, k)}: unknown field")
    return problems


def _rows(doc, key, widths, text) -> list:
    rows = doc.get(key, [])
    out = []
    if not isinstance(rows, list):
        raise ValidationError([f"{_where(text, key)}: must be a list"], key)
    for i, r in enumerate(rows):
        if not isinstance(r, list) or len(r) not in widths:
            raise ValidationError([f"{_where(text, key)}[{i}]: expected a list of "
                                   f"{' or '.join(map(str, widths))} items, got {r!r}"], key)
        out.append(r)
    return out


def _wrap(kind: str, text: str | None, fn):
    """Run a constructor, prefixing its problems with line context where we can find it."""
    try:
        return fn()
    except ValidationError as exc:
        fixed = []
        for p in exc.problems:
            key = p.split(":", 1)[0].split("[", 1)[0].strip()
            line = _line_of(text, key)
            fixed.append(f"{p} (line {line})" if line else p)
        raise type(exc)(fixed, kind) from None


def from_dict(doc: Mapping, text: str | None = None, base: Path | None = None) -> Any:
    if not isinstance(doc, Mapping):
        raise ValidationError(["spec must be a JSON object"], "spec")
    kind = doc.get("kind")
    if kind == "agent":
        disc = doc.get("discipline")
        if disc not in DISCIPLINE_KIND:
            raise ValidationError([f"discipline: must be one of {sorted(DISCIPLINE_KIND)}"], "agent")
        kind = DISCIPLINE_KIND[disc]
        doc = {**doc, "kind": kind}
    if kind not in FIELDS:
        raise ValidationError([f"kind: unknown kind {kind!r}; expected one of {sorted(FIELDS)}"], "spec")
    problems = _check_fields(kind, doc, text)
    disc = doc.get("discipline")
    if kind in KIND_DISCIPLINE and disc is not None and disc != KIND_DISCIPLINE[kind]:
        problems.append(f"{_where(text, 'discipline')}: discipline/delta mismatch: kind {kind!r} "
                        f"has discipline {KIND_DISCIPLINE[kind]!r}, spec says {disc!r}")
    if problems:
        raise ValidationError(problems, kind)
    d = doc
    if kind == "dfa":
        rows = _rows(d, "transitions", (3,), text)
        return _wrap(kind, text, lambda: Dfa.build(d["states"], d["alphabet"], rows, d["start"], d["accept"]))
    if kind == "mealy":
        rows = _rows(d, "transitions", (4,), text)
        return _wrap(kind, text, lambda: Mealy.build(d["states"], d["alphabet"], rows, d["start"],
                                                     d["accept"], d.get("outputs"),
                                                     d.get("idle_output", "noop")))
    if kind == "nfa":
        rows = _rows(d, "transitions", (3,), text)
        return _wrap(kind, text, lambda: Nfa.build(d["states"], d["alphabet"], rows, d["start"], d["accept"]))
    if kind == "pda":
        rows = _rows(d, "transitions", (5,), text)
        return _wrap(kind, text, lambda: Pda.build(d["states"], d["alphabet"], d["stack_alphabet"], rows,
                                                   d["start"], d["accept"], d.get("initial_stack", ())))
    if kind == "lba":
        rows = _rows(d, "transitions", (5,), text)
        return _wrap(kind, text, lambda: Lba.build(d["states"], d["alphabet"], d["tape_alphabet"], rows,
                                                   d["start"], d["accept_state"], d["reject_state"]))
    if kind == "tm":
        rows = _rows(d, "transitions", (5,), text)
        return _wrap(kind, text, lambda: Tm.build(d["states"], d["alphabet"], d["tape_alphabet"], rows,
                                                  d["start"], d["accept_state"], d["reject_state"],
                                                  d.get("blank", "_")))
    if kind == "regular":
        edges = [tuple(e) for e in _rows(d, "edges", (3, 4), text)]
        tk = None
        if d.get("tokenizer") is not None:
            t = d["tokenizer"]
            extra = set(t) - {"tau", "kappa"}
            if extra:
                raise ValidationError([f"tokenizer.{k}: unknown field" for k in sorted(extra)], kind)
            tk = Tokenizer(dict(t.get("tau", {})), int(t.get("kappa", 1)))
        return _wrap(kind, text, lambda: RegularAgent(d["states"], d["start"], d["alphabet"], edges,
                                                      d["accept"], d.get("outputs", ()), tk,
                                                      d.get("oracle")))
    if kind == "context_free":
        rules = [(r[0], r[1], r[2], r[3], tuple(r[4])) for r in _rows(d, "rules", (5,), text)]
        return _wrap(kind, text, lambda: CfAgent(d["states"], d["start"], d["alphabet"], d["stack_alphabet"],
                                                 rules, d["accept"], d.get("initial_stack", ())))
    if kind in ("context_sensitive", "turing_complete"):
        rows = _rows(d, "delta", (5,), text)
        delta = {}
        dupes = []
        for q, x, t, y, m in rows:
            if (q, x) in delta:
                dupes.append(f"{_where(text, 'delta')}: two moves for ({q!r}, {x!r}); agents here are deterministic")
            delta[(q, x)] = (t, y, m)
        if dupes:
            raise ValidationError(dupes, kind)
        if kind == "context_sensitive":
            return _wrap(kind, text, lambda: CsAgent(d["states"], d["start"], d["alphabet"], d["tape_alphabet"],
                                                     delta, d["accept"], int(d.get("k", 1)),
                                                     d.get("blank", "_")))
        return _wrap(kind, text, lambda: TcAgent(d["states"], d["start"], d["alphabet"], d["tape_alphabet"],
                                                 delta, d["accept"], d.get("blank", "_")))
    if kind == "pfa":
        mats = d["matrices"]
        if not isinstance(mats, Mapping):
            raise ValidationError([f"{_where(text, 'matrices')}: must map symbols to matrices"], kind)
        init = d["initial"]
        if isinstance(init, str):
            if init not in d["states"]:
                raise ValidationError([f"{_where(text, 'initial')}: {init!r} is not a state"], kind)
            init = [1.0 if q == init else 0.0 for q in d["states"]]
        try:
            arrays = {a: np.asarray(m, dtype=np.float64) for a, m in mats.items()}
        except (TypeError, ValueError) as exc:
            raise ValidationError([f"{_where(text, 'matrices')}: {exc}"], kind) from None
        return _wrap(kind, text, lambda: Pfa(d["states"], d["alphabet"], arrays, init,
                                             frozenset(d.get("unsafe", ()))))
    return _system(d, text, base)


def _sub(item, base: Path | None):
    if isinstance(item, str):
        path = Path(item)
        if base is not None and not path.is_absolute():
            path = base / path
        return parse_spec(path)
    return from_dict(item)


def _system(d: Mapping, text, base):
    mode = d["mode"]
    if mode == "product":
        extra = {"program", "partition", "order"} & set(d)
        if extra:
            raise ValidationError([f"{k}: not used by product systems" for k in sorted(extra)], "system")
        agents = [_sub(a, base) for a in d.get("agents", [])]
        for i, a in enumerate(agents):
            if not isinstance(a, (RegularAgent, Dfa, Nfa)):
                raise ValidationError([f"agents[{i}]: product components must be finite-state"], "system")
        return compose_product(agents, d.get("accept", "all"))
    if mode == "shared_tape":
        extra = {"agents", "accept"} & set(d)
        if extra:
            raise ValidationError([f"{k}: not used by shared-tape systems" for k in sorted(extra)], "system")
        if "program" not in d or "partition" not in d:
            raise ValidationError(["program and partition: required for shared_tape"], "system")
        program = _sub(d["program"], base)
        if not isinstance(program, Tm):
            raise ValidationError(["program: must be a tm spec"], "system")
        return system_from_partition(program, {k: list(v) for k, v in d["partition"].items()},
                                     d.get("order"))
    raise ValidationError([f"mode: {mode!r} must be 'product' or 'shared_tape'"], "system")


def parse_text(text: str, path: str | None = None) -> Any:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, path) from None
    base = Path(path).parent if path else None
    return from_dict(doc, text, base)


def parse_spec(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read spec: {exc.strerror}", None, str(path)) from None
    return parse_text(text, str(path))


# -- emit -----------------------------------------------------------------------

def _list(x):
    return list(x)


def emit(x) -> dict:
    """Spec document for ``x``; ``from_dict(emit(x))`` rebuilds an equal object."""
    if isinstance(x, Mealy):
        return {"kind": "mealy", "states": _list(x.states), "alphabet": _list(x.alphabet),
                "start": x.start, "accept": sorted(x.accept), "outputs": _list(x.output_alphabet),
                "transitions": [[q, a, x.delta[(q, a)], x.lam[(q, a)]]
                                for q in x.states for a in x.alphabet]}
    if isinstance(x, Dfa):
        return {"kind": "dfa", "states": _list(x.states), "alphabet": _list(x.alphabet),
                "start": x.start, "accept": sorted(x.accept),
                "transitions": [[q, a, x.delta[(q, a)]] for q in x.states for a in x.alphabet]}
    if isinstance(x, Nfa):
        return {"kind": "nfa", "states": _list(x.states), "alphabet": _list(x.alphabet),
                "start": x.start, "accept": sorted(x.accept),
                "transitions": [list(t) for t in x.transitions()]}
    if isinstance(x, Pda):
        return {"kind": "pda", "states": _list(x.states), "alphabet": _list(x.alphabet),
                "stack_alphabet": _list(x.stack_alphabet), "start": x.start,
                "accept": sorted(x.accept), "initial_stack": _list(x.initial_stack),
                "transitions": [[q, a, z, t, list(p)] for q, a, z, t, p in x.transitions()]}
    if isinstance(x, (Lba, Tm)):
        out = {"kind": "lba" if isinstance(x, Lba) else "tm", "states": _list(x.states),
               "alphabet": _list(x.alphabet), "tape_alphabet": _list(x.tape_alphabet),
               "start": x.start, "accept_state": x.accept_state, "reject_state": x.reject_state,
               "transitions": [list(t) for t in x.transitions()]}
        if isinstance(x, Tm):
            out["blank"] = x.blank
        return out
    if isinstance(x, RegularAgent):
        out = {"kind": "regular", "states": _list(x.states), "start": x.start,
               "alphabet": _list(x.alphabet), "accept": sorted(x.accept),
               "edges": [[e.src, e.symbol, e.dst] + ([e.action] if e.action is not None else [])
                         for e in x.edges]}
        if x.outputs:
            out["outputs"] = _list(x.outputs)
        if x.tokenizer is not None:
            out["tokenizer"] = {"tau": dict(x.tokenizer.tau), "kappa": x.tokenizer.kappa}
        if x.oracle_config:
            out["oracle"] = dict(x.oracle_config)
        return out
    if isinstance(x, CfAgent):
        return {"kind": "context_free", "states": _list(x.states), "start": x.start,
                "alphabet": _list(x.alphabet), "stack_alphabet": _list(x.stack_alphabet),
                "accept": sorted(x.accept), "initial_stack": _list(x.initial_stack),
                "rules": [[r.src, r.symbol, r.pop, r.dst, list(r.push)] for r in x.rules]}
    if isinstance(x, (CsAgent, TcAgent)):
        out = {"kind": "context_sensitive" if isinstance(x, CsAgent) else "turing_complete",
               "states": _list(x.states), "start": x.start, "alphabet": _list(x.alphabet),
               "tape_alphabet": _list(x.tape_alphabet), "accept": sorted(x.accept),
               "blank": x.blank,
               "delta": [[q, s, t, y, m] for (q, s), (t, y, m) in x.delta.items()]}
        if isinstance(x, CsAgent):
            out["k"] = x.k
        return out
    if isinstance(x, Pfa):
        return {"kind": "pfa", "states": _list(x.states), "alphabet": _list(x.alphabet),
                "matrices": {a: x.matrices[a].tolist() for a in x.alphabet},
                "initial": x.initial.tolist(), "unsafe": sorted(x.unsafe)}
    if isinstance(x, ProductSystem):
        return {"kind": "system", "mode": "product", "accept": x.accept,
                "agents": [emit(a) for a in x.agents]}
    if isinstance(x, SharedTapeSystem):
        return {"kind": "system", "mode": "shared_tape", "program": emit(x.program),
                "partition": {a.name: sorted(a.owns) for a in x.agents}, "order": list(x.order)}
    raise TypeError(f"cannot emit {type(x).__name__}")


def dumps(x) -> str:
    return json.dumps(emit(x), indent=2, ensure_ascii=False)
