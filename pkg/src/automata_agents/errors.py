"""Exception hierarchy shared by every module."""

from __future__ import annotations


class AutomataError(Exception):
    """Base class for all library errors."""


class ValidationError(AutomataError):
    """A machine, agent or model violates one or more invariants.

    ``problems`` lists every violated invariant, each prefixed with the
    field it concerns, so callers can report them all at once.
    """

    def __init__(self, problems, context: str | None = None):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        self.context = context
        head = f"{context}: " if context else ""
        super().__init__(head + "; ".join(self.problems))


class ParseError(AutomataError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class UnknownSymbol(AutomataError):
    def __init__(self, symbol, position: int | None = None):
        self.symbol = symbol
        self.position = position
        at = f" at position {position}" if position is not None else ""
        super().__init__(f"symbol {symbol!r}{at} is not in the alphabet")


class UnknownState(AutomataError):
    def __init__(self, state):
        self.state = state
        super().__init__(f"unknown state {state!r}")


class UnknownEvent(AutomataError):
    def __init__(self, event):
        self.event = event
        super().__init__(f"event {event!r} is not in the tokenizer vocabulary")


class AlphabetMismatch(AutomataError):
    def __init__(self, left, right):
        self.left = tuple(left)
        self.right = tuple(right)
        super().__init__(f"alphabets differ: {sorted(self.left)} vs {sorted(self.right)}")


class EndmarkerViolation(ValidationError):
    pass


class MemoryBoundViolation(AutomataError):
    pass


class NoDeclaredEdge(AutomataError):
    def __init__(self, state, symbol):
        self.state = state
        self.symbol = symbol
        super().__init__(f"no declared edge leaves {state!r} on {symbol!r}")


class OracleViolation(AutomataError):
    """The transition oracle returned an edge outside the declared set."""

    def __init__(self, edge, state, symbol):
        self.edge = edge
        self.state = state
        self.symbol = symbol
        super().__init__(f"oracle proposed undeclared edge {edge!r} from {state!r} on {symbol!r}")


class DisciplineViolation(AutomataError):
    pass


class SchedulerViolation(AutomataError):
    pass


class IllConditioned(AutomataError):
    pass


class InvalidModel(ValidationError):
    pass


class MalformedTrace(AutomataError):
    pass


class UnknownFramework(AutomataError):
    def __init__(self, name: str, suggestions=()):
        self.name = name
        self.suggestions = list(suggestions)
        hint = f" (did you mean {', '.join(map(repr, self.suggestions))}?)" if self.suggestions else ""
        super().__init__(f"framework {name!r} is not in the table{hint}")


class NondeterministicCore(AutomataError):
    def __init__(self, conflicts):
        self.conflicts = list(conflicts)
        super().__init__(f"guard core is not deterministic: {len(self.conflicts)} conflicting move pair(s)")
