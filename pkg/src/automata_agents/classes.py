"""Computational classes and memory disciplines, ordered by power."""

from __future__ import annotations

import enum


class ClassLabel(enum.IntEnum):
    Regular = 0
    ContextFree = 1
    ContextSensitive = 2
    TuringComplete = 3

    @property
    def machine(self) -> str:
        return ("FA", "PDA", "LBA", "TM")[self.value]

    @classmethod
    def parse(cls, text: str) -> "ClassLabel":
        key = text.replace("-", "").replace("_", "").replace(" ", "").lower()
        aliases = {"regular": cls.Regular, "fa": cls.Regular,
                   "contextfree": cls.ContextFree, "pda": cls.ContextFree, "cf": cls.ContextFree,
                   "contextsensitive": cls.ContextSensitive, "lba": cls.ContextSensitive,
                   "cs": cls.ContextSensitive,
                   "turingcomplete": cls.TuringComplete, "tm": cls.TuringComplete,
                   "tc": cls.TuringComplete}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown class label {text!r}") from None


class Discipline(enum.IntEnum):
    none = 0
    lifo = 1
    bounded_rw = 2
    arbitrary_rw = 3


AGENT_KIND = {
    "regular": ClassLabel.Regular,
    "context_free": ClassLabel.ContextFree,
    "context_sensitive": ClassLabel.ContextSensitive,
    "turing_complete": ClassLabel.TuringComplete,
}
