"""Right-sizing: pick the weakest class whose memory discipline covers the task."""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Sequence

from .agents import CfAgent, CsAgent, RegularAgent, TcAgent
from .classes import ClassLabel, Discipline
from .errors import MalformedTrace, UnknownFramework, ValidationError
from .fa import EPS

CAVEAT = ("witnessed lower bound: a trace only shows operations that occurred; "
          "unexercised behaviour may need a stronger discipline")


@dataclass(frozen=True)
class TaskRequirements:
    needs_memory: bool
    memory_discipline: Discipline = Discipline.none

    def __post_init__(self):
        d = self.memory_discipline
        if isinstance(d, str):
            try:
                d = Discipline[d]
            except KeyError:
                raise ValidationError([f"memory_discipline: unknown value {d!r}"], "requirements") from None
            object.__setattr__(self, "memory_discipline", d)
        if not self.needs_memory and d is not Discipline.none:
            raise ValidationError(["memory_discipline: must be 'none' when needs_memory is false"],
                                  "requirements")
        if self.needs_memory and d is Discipline.none:
            raise ValidationError(["memory_discipline: a task that needs memory must name a discipline"],
                                  "requirements")


@dataclass(frozen=True)
class Classification:
    label: ClassLabel
    path: tuple
    extension: bool = False

    def to_dict(self) -> dict:
        return {"class": self.label.name, "machine": self.label.machine,
                "path": list(self.path), "extension": self.extension}


def classify_requirements(r: TaskRequirements) -> Classification:
    """Walk the decision flowchart. The bounded_rw branch is our extension of it."""
    path = ["start: define task requirements"]
    if not r.needs_memory:
        path += ["memory of past events needed? no", "class: Regular (FA)"]
        return Classification(ClassLabel.Regular, tuple(path))
    path.append("memory of past events needed? yes")
    if r.memory_discipline is Discipline.lifo:
        path += ["access strictly LIFO? yes", "class: ContextFree (PDA)"]
        return Classification(ClassLabel.ContextFree, tuple(path))
    path.append("access strictly LIFO? no")
    if r.memory_discipline is Discipline.bounded_rw:
        path += ["[extension] read/write confined to a window linear in the input? yes",
                 "class: ContextSensitive (LBA)"]
        return Classification(ClassLabel.ContextSensitive, tuple(path), extension=True)
    path.append("class: TuringComplete (TM)")
    return Classification(ClassLabel.TuringComplete, tuple(path))


# -- discipline inference -----------------------------------------------------

@dataclass(frozen=True)
class MemoryOp:
    op: str
    addr: int | None = None


OPS = ("push", "pop", "peek", "read", "write")


@dataclass
class MemoryTrace:
    """Recorded memory events. Addresses count cells from the bottom, starting at 0."""

    ops: list
    input_length: int | None = None
    k: int | None = None

    @classmethod
    def parse(cls, records: Sequence, input_length: int | None = None, k: int | None = None):
        ops = []
        for i, rec in enumerate(records):
            if isinstance(rec, MemoryOp):
                ops.append(rec)
                continue
            if isinstance(rec, str):
                rec = rec.split()
            if isinstance(rec, dict):
                op, addr = rec.get("op"), rec.get("addr")
            elif isinstance(rec, (list, tuple)) and 1 <= len(rec) <= 2:
                op, addr = rec[0], (rec[1] if len(rec) == 2 else None)
            else:
                raise MalformedTrace(f"record {i}: cannot read {rec!r}")
            if op not in OPS:
                raise MalformedTrace(f"record {i}: unknown op {op!r}")
            if addr is not None:
                try:
                    addr = int(addr)
                except (TypeError, ValueError):
                    raise MalformedTrace(f"record {i}: address {addr!r} is not an integer") from None
                if addr < 0:
                    raise MalformedTrace(f"record {i}: negative address {addr}")
            if op in ("read", "write") and addr is None:
                raise MalformedTrace(f"record {i}: {op} needs an address")
            ops.append(MemoryOp(op, addr))
        return cls(ops, input_length, k)


@dataclass(frozen=True)
class DisciplineReport:
    discipline: Discipline
    evidence: tuple = ()
    caveat: str | None = None
    source: str = "trace"

    def to_dict(self) -> dict:
        out = {"discipline": self.discipline.name, "source": self.source,
               "evidence": [dict(e) for e in self.evidence]}
        if self.caveat:
            out["caveat"] = self.caveat
        return out


def _from_trace(t: MemoryTrace) -> DisciplineReport:
    level = Discipline.none
    evidence = []
    height = 0
    window = None
    if t.input_length is not None and t.k is not None:
        window = t.k * t.input_length + 2

    def escalate(to: Discipline, i: int, op: MemoryOp, why: str):
        nonlocal level
        if to > level:
            level = to
            evidence.append({"discipline": to.name, "index": i, "op": op.op,
                             "addr": op.addr, "reason": why})

    for i, op in enumerate(t.ops):
        top = height - 1
        if op.op == "push":
            escalate(Discipline.lifo, i, op, "first stack push")
            height += 1
        elif op.op == "pop":
            if height == 0:
                raise MalformedTrace(f"record {i}: pop from empty memory")
            escalate(Discipline.lifo, i, op, "first stack pop")
            height -= 1
        elif op.op == "peek":
            if height == 0:
                raise MalformedTrace(f"record {i}: peek at empty memory")
            escalate(Discipline.lifo, i, op, "first stack inspection")
        else:
            addr = op.addr
            if addr == top:
                escalate(Discipline.lifo, i, op, f"{op.op} at the stack top")
            elif window is not None and addr < window:
                escalate(Discipline.bounded_rw, i, op,
                         f"{op.op} at {addr}, off the top but inside the {window}-cell window")
            else:
                where = "below the top" if addr < top else "away from the top"
                escalate(Discipline.arbitrary_rw, i, op, f"{op.op} at {addr}, {where} ({top})")
            if op.op == "write" and addr >= height:
                height = addr + 1
    return DisciplineReport(level, tuple(evidence), CAVEAT, "trace")


def _from_agent(agent) -> DisciplineReport:
    if isinstance(agent, RegularAgent):
        return DisciplineReport(Discipline.none, (), None, "spec")
    if isinstance(agent, CfAgent):
        for i, r in enumerate(agent.rules):
            if r.pop != EPS or r.push:
                ev = {"discipline": "lifo", "index": i, "op": "rule", "addr": None,
                      "reason": f"rule {r.src}->{r.dst} pops {r.pop!r} and pushes {list(r.push)}"}
                return DisciplineReport(Discipline.lifo, (ev,), None, "spec")
        return DisciplineReport(Discipline.none, (), None, "spec")
    if isinstance(agent, CsAgent):
        ev = {"discipline": "bounded_rw", "index": None, "op": "declared", "addr": None,
              "reason": f"read/write tape of {agent.k}*|w| cells"}
        return DisciplineReport(Discipline.bounded_rw, (ev,), None, "spec")
    if isinstance(agent, TcAgent):
        ev = {"discipline": "arbitrary_rw", "index": None, "op": "declared", "addr": None,
              "reason": "unbounded read/write tape"}
        return DisciplineReport(Discipline.arbitrary_rw, (ev,), None, "spec")
    raise TypeError(f"cannot analyse {type(agent).__name__}")


def analyze_memory_discipline(source, input_length: int | None = None,
                              k: int | None = None) -> DisciplineReport:
    """Weakest discipline consistent with the declared or observed memory operations."""
    if isinstance(source, MemoryTrace):
        return _from_trace(source)
    if isinstance(source, (list, tuple)):
        return _from_trace(MemoryTrace.parse(source, input_length, k))
    return _from_agent(source)


def requirements_for(d: Discipline) -> TaskRequirements:
    return TaskRequirements(d is not Discipline.none, d)


# -- framework table ------------------------------------------------------------

@dataclass(frozen=True)
class FrameworkEntry:
    framework: str
    architecture: str
    class_text: str
    label: ClassLabel = field(compare=False)

    def to_dict(self) -> dict:
        return {"framework": self.framework, "architecture": self.architecture,
                "class": self.label.name, "class_text": self.class_text}


@lru_cache(maxsize=1)
def framework_table() -> tuple:
    text = resources.files("automata_agents").joinpath("data/frameworks.json").read_text("utf-8")
    return tuple(FrameworkEntry(r["framework"], r["architecture"], r["class_text"],
                                ClassLabel.parse(r["class"]))
                 for r in json.loads(text)["frameworks"])


def framework_class_lookup(name: str, table: Sequence[FrameworkEntry] | None = None) -> FrameworkEntry:
    table = framework_table() if table is None else table
    by_key = {e.framework.casefold(): e for e in table}
    hit = by_key.get(name.strip().casefold())
    if hit is not None:
        return hit
    close = difflib.get_close_matches(name.casefold(), list(by_key), n=3, cutoff=0.4)
    raise UnknownFramework(name, [by_key[c].framework for c in close])
