"""Exception types shared across the toolchain."""

from __future__ import annotations


class DmnBotError(Exception):
    """Base class for every error raised by this package."""


# --- model construction / parsing ---------------------------------------


class ModelError(DmnBotError):
    pass


class UnknownTable(ModelError):
    pass


class CyclicHierarchy(ModelError):
    pass


class CellSyntaxError(ModelError):
    """A rule cell string does not follow the unary-test grammar."""

    def __init__(self, cell: str, position: int, reason: str):
        self.cell = cell
        self.position = position
        self.reason = reason
        super().__init__(f"syntax error in cell {cell!r} at position {position}: {reason}")


class TypeMismatch(ModelError):
    """A literal cannot be coerced to the clause's data type."""


class SchemaError(ModelError):
    """A JSON document violates the compact model schema."""

    def __init__(self, pointer: str, reason: str):
        self.pointer = pointer
        self.reason = reason
        super().__init__(f"{pointer}: {reason}")


class XmlError(ModelError):
    pass


class UnsupportedHitPolicy(ModelError):
    pass


class UnsupportedConstruct(ModelError):
    pass


# --- evaluation ----------------------------------------------------------


class EngineError(DmnBotError):
    pass


class IncompleteAssignment(EngineError):
    pass


class MissingInput(EngineError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing input: {name}")


class NoMatchingRule(EngineError):
    pass


class MultipleMatchingRules(EngineError):
    def __init__(self, table: str, indices: tuple[int, ...], message: str = ""):
        self.table = table
        self.indices = indices
        super().__init__(message or f"rules {list(indices)} of table {table!r} all match")


class AlreadyBound(EngineError):
    pass


class UnknownInput(EngineError):
    pass


class DerivedInputBound(EngineError):
    """A value was bound to an input that is computed from a sub-decision."""


class SessionClosed(EngineError):
    """A message was sent to a session that already said goodbye."""


# --- agent compilation / phrase generation / export ----------------------


class NameClash(DmnBotError):
    pass


class DuplicateDecisionName(DmnBotError):
    pass


class BudgetTooSmall(DmnBotError):
    pass


class LoadError(DmnBotError):
    """An exported agent bundle is incomplete or inconsistent."""
