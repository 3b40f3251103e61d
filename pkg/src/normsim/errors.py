"""Exception hierarchy shared by every normsim module."""

from __future__ import annotations

from typing import Any


class NormsimError(Exception):
    """Base class for all errors raised by normsim."""


# -- condition language ------------------------------------------------------


class LexError(NormsimError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class ParseError(NormsimError):
    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = expected
        detail = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class EvaluationError(NormsimError):
    """Raised while evaluating an expression.

    ``node`` is the offending AST node. The normative engine fills in
    ``norm_id`` when the failure happened inside a norm.
    """

    def __init__(self, message: str, node: Any = None):
        self.node = node
        self.norm_id: str | None = None
        super().__init__(message)

    def __str__(self) -> str:
        base = super().__str__()
        return f"{base} (norm {self.norm_id})" if self.norm_id else base


class UnresolvedIdentifier(EvaluationError):
    def __init__(self, name: str, node: Any = None):
        self.name = name
        super().__init__(f"unresolved identifier: {name}", node)


class TypeMismatch(EvaluationError):
    pass


class UnknownFunction(EvaluationError):
    def __init__(self, name: str, node: Any = None):
        self.name = name
        super().__init__(f"unknown function: {name}", node)


class ArityMismatch(EvaluationError):
    pass


class DivisionByZero(EvaluationError):
    pass


# -- engine / organization ---------------------------------------------------


class ModeConflictError(NormsimError):
    pass


class DuplicateIdError(NormsimError):
    pass


class DuplicateActionError(NormsimError):
    pass


class UnknownRoleError(NormsimError):
    pass


class AlreadyMemberError(NormsimError):
    pass


class NotMemberError(NormsimError):
    pass


class IssuerError(NormsimError):
    pass


# -- runtime -----------------------------------------------------------------


class DuplicateAgentError(NormsimError):
    pass


class UnknownAgentError(NormsimError):
    pass


class SimulationError(NormsimError):
    def __init__(self, message: str, tick: int):
        self.tick = tick
        super().__init__(f"tick {tick}: {message}")


# -- scenario files ----------------------------------------------------------


class FormatError(NormsimError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ValidationError(NormsimError):
    """Aggregated diagnostics for a file that parsed but did not validate."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))
