"""Core vocabulary of decisions: tables, clauses, rules, values, and the requirement graph."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from .errors import (
    CyclicHierarchy,
    DerivedInputBound,
    ModelError,
    TypeMismatch,
    UnknownInput,
    UnknownTable,
)

KINDS = ("boolean", "number", "text", "enumeration")

Number = Union[int, float]
Payload = Union[bool, int, float, str]


def slugify(name: str) -> str:
    """Canonical identifier used in all generated artifact names."""
    return re.sub(r"\s+", "_", name.strip().lower())


def humanize(name: str) -> str:
    """Readable lowercase label derived from an identifier (CamelCase or snake_case)."""
    s = re.sub(r"(?<=[a-z0-9])(?=[A-Z])", " ", name)
    s = s.replace("_", " ")
    return re.sub(r"\s+", " ", s).strip().lower()


def normalize_number(x: Number) -> Number:
    """Collapse integral floats to ints so 80 and 80.0 compare equal everywhere."""
    if isinstance(x, bool):  # bool is an int subclass; never a number payload
        raise TypeMismatch("boolean is not a number")
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def format_number(x: Number) -> str:
    x = normalize_number(x)
    return str(x)


@dataclass(frozen=True)
class DataTypeSpec:
    kind: str
    enum_values: tuple[str, ...] = ()
    numeric_bounds: Optional[tuple[Number, Number]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown data kind {self.kind!r}")
        if self.kind == "enumeration":
            if len(self.enum_values) < 2 or len(set(self.enum_values)) != len(self.enum_values):
                raise ModelError("enumeration needs at least 2 distinct values")
        elif self.enum_values:
            raise ModelError(f"{self.kind} type cannot carry enum values")
        if self.numeric_bounds is not None:
            if self.kind != "number":
                raise ModelError("numeric bounds only apply to number types")
            lo, hi = self.numeric_bounds
            if lo > hi:
                raise ModelError(f"invalid bounds [{lo}..{hi}]")
            object.__setattr__(
                self, "numeric_bounds", (normalize_number(lo), normalize_number(hi))
            )


BOOLEAN = DataTypeSpec("boolean")
NUMBER = DataTypeSpec("number")
TEXT = DataTypeSpec("text")


@dataclass(frozen=True)
class Value:
    kind: str
    payload: Payload

    def __post_init__(self):
        if self.kind == "number":
            object.__setattr__(self, "payload", normalize_number(self.payload))

    def render(self) -> str:
        """Literal form used in cells, phrases, and JSON."""
        if self.kind == "boolean":
            return "true" if self.payload else "false"
        if self.kind == "number":
            return format_number(self.payload)
        return str(self.payload)


def make_value(dtype: DataTypeSpec, payload: Payload) -> Value:
    """Build a Value conforming to `dtype`, canonicalizing enum case."""
    if dtype.kind == "boolean":
        if not isinstance(payload, bool):
            raise TypeMismatch(f"{payload!r} is not a boolean")
        return Value("boolean", payload)
    if dtype.kind == "number":
        if isinstance(payload, bool) or not isinstance(payload, (int, float)):
            raise TypeMismatch(f"{payload!r} is not a number")
        payload = normalize_number(payload)
        if dtype.numeric_bounds is not None:
            lo, hi = dtype.numeric_bounds
            if not (lo <= payload <= hi):
                raise TypeMismatch(f"{payload} outside bounds [{lo}..{hi}]")
        return Value("number", payload)
    if dtype.kind == "enumeration":
        if not isinstance(payload, str):
            raise TypeMismatch(f"{payload!r} is not an enumeration label")
        for canonical in dtype.enum_values:
            if canonical.lower() == payload.lower():
                return Value("enumeration", canonical)
        raise TypeMismatch(f"{payload!r} not in {list(dtype.enum_values)}")
    if not isinstance(payload, str):
        raise TypeMismatch(f"{payload!r} is not text")
    return Value("text", payload)


# --- unary tests ----------------------------------------------------------

COMPARE_OPS = ("<", "<=", ">", ">=")


class UnaryTest:
    """A single-cell condition on one input value."""

    def accepts(self, value: Value) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class AnyValue(UnaryTest):
    """The "-" wildcard: matches every in-domain value."""

    def accepts(self, value: Value) -> bool:
        return True


@dataclass(frozen=True)
class Equal(UnaryTest):
    value: Value

    def accepts(self, value: Value) -> bool:
        return value == self.value


@dataclass(frozen=True)
class Compare(UnaryTest):
    op: str
    bound: Number

    def __post_init__(self):
        if self.op not in COMPARE_OPS:
            raise ModelError(f"unknown comparison operator {self.op!r}")
        object.__setattr__(self, "bound", normalize_number(self.bound))

    def accepts(self, value: Value) -> bool:
        x = value.payload
        if self.op == "<":
            return x < self.bound
        if self.op == "<=":
            return x <= self.bound
        if self.op == ">":
            return x > self.bound
        return x >= self.bound


@dataclass(frozen=True)
class Interval(UnaryTest):
    lower: Number
    lower_closed: bool
    upper: Number
    upper_closed: bool

    def __post_init__(self):
        object.__setattr__(self, "lower", normalize_number(self.lower))
        object.__setattr__(self, "upper", normalize_number(self.upper))
        if self.lower > self.upper or (
            self.lower == self.upper and not (self.lower_closed and self.upper_closed)
        ):
            raise ModelError(f"empty interval: lower {self.lower}, upper {self.upper}")

    def accepts(self, value: Value) -> bool:
        x = value.payload
        above = x >= self.lower if self.lower_closed else x > self.lower
        below = x <= self.upper if self.upper_closed else x < self.upper
        return above and below


@dataclass(frozen=True)
class OneOf(UnaryTest):
    values: tuple[Value, ...]

    def __post_init__(self):
        kinds = {v.kind for v in self.values}
        if len(self.values) == 0 or len(kinds) != 1:
            raise ModelError("OneOf needs at least one value, all of the same type")

    def accepts(self, value: Value) -> bool:
        return value in self.values


@dataclass(frozen=True)
class Negation(UnaryTest):
    inner: UnaryTest

    def accepts(self, value: Value) -> bool:
        return not self.inner.accepts(value)


def test_constants(test: UnaryTest) -> list[Number]:
    """Numeric constants appearing in a test; they delimit the value partition."""
    if isinstance(test, Compare):
        return [test.bound]
    if isinstance(test, Interval):
        return [test.lower, test.upper]
    if isinstance(test, Equal) and test.value.kind == "number":
        return [test.value.payload]
    if isinstance(test, OneOf) and test.values and test.values[0].kind == "number":
        return [v.payload for v in test.values]
    if isinstance(test, Negation):
        return test_constants(test.inner)
    return []


def test_text_constants(test: UnaryTest) -> list[str]:
    if isinstance(test, Equal) and test.value.kind in ("text", "enumeration"):
        return [test.value.payload]  # type: ignore[list-item]
    if isinstance(test, OneOf) and test.values and test.values[0].kind in ("text", "enumeration"):
        return [v.payload for v in test.values]  # type: ignore[list-item]
    if isinstance(test, Negation):
        return test_text_constants(test.inner)
    return []


def _test_kind_ok(test: UnaryTest, dtype: DataTypeSpec) -> bool:
    if isinstance(test, AnyValue):
        return True
    if isinstance(test, (Compare, Interval)):
        return dtype.kind == "number"
    if isinstance(test, Equal):
        return test.value.kind == dtype.kind
    if isinstance(test, OneOf):
        return all(v.kind == dtype.kind for v in test.values)
    if isinstance(test, Negation):
        return _test_kind_ok(test.inner, dtype)
    return False


# --- tables ---------------------------------------------------------------


@dataclass(frozen=True)
class InputClause:
    name: str
    label: str
    data_type: DataTypeSpec

    def __post_init__(self):
        if not self.name.strip():
            raise ModelError("input name must be non-empty")

    @property
    def slug(self) -> str:
        return slugify(self.name)


@dataclass(frozen=True)
class OutputClause:
    name: str
    data_type: DataTypeSpec
    allowed_values: tuple[Value, ...]

    def __post_init__(self):
        if not self.name.strip():
            raise ModelError("output name must be non-empty")
        if not self.allowed_values:
            raise ModelError("output needs at least one allowed value")

    @property
    def label(self) -> str:
        return humanize(self.name)


@dataclass(frozen=True)
class Rule:
    index: int  # 1-based, as printed in the table
    input_entries: tuple[UnaryTest, ...]
    output_entry: Value


@dataclass(frozen=True)
class DecisionTable:
    name: str
    hit_policy: str
    inputs: tuple[InputClause, ...]
    output: OutputClause
    rules: tuple[Rule, ...]

    def __post_init__(self):
        if self.hit_policy != "U":
            raise ModelError(f"unsupported hit policy {self.hit_policy!r}; only U (Unique)")
        if not self.inputs or not self.rules:
            raise ModelError(f"table {self.name!r} needs at least one input and one rule")
        slugs = [c.slug for c in self.inputs]
        if len(set(slugs)) != len(slugs):
            raise ModelError(f"duplicate input names in table {self.name!r}")
        for rule in self.rules:
            if len(rule.input_entries) != len(self.inputs):
                raise ModelError(
                    f"rule {rule.index} of table {self.name!r} has "
                    f"{len(rule.input_entries)} entries, expected {len(self.inputs)}"
                )
            for clause, test in zip(self.inputs, rule.input_entries):
                if not _test_kind_ok(test, clause.data_type):
                    raise ModelError(
                        f"rule {rule.index} of table {self.name!r}: entry for "
                        f"{clause.name!r} does not fit a {clause.data_type.kind} clause"
                    )
            if rule.output_entry not in self.output.allowed_values:
                raise ModelError(
                    f"rule {rule.index} of table {self.name!r}: output "
                    f"{rule.output_entry.render()!r} not among the allowed values"
                )

    @property
    def slug(self) -> str:
        return slugify(self.name)

    @property
    def label(self) -> str:
        return humanize(self.name)

    def input_by_slug(self, slug: str) -> InputClause:
        for clause in self.inputs:
            if clause.slug == slug:
                return clause
        raise UnknownInput(f"table {self.name!r} has no input {slug!r}")


@dataclass(frozen=True)
class Requirement:
    """The child table's output feeds the given input of the parent table."""

    parent: str
    input: str
    child: str
    mode: str = "derive"  # "derive": computed, never asked; "ask": asked directly

    def __post_init__(self):
        if self.mode not in ("derive", "ask"):
            raise ModelError(f"unknown requirement mode {self.mode!r}")

    @property
    def input_slug(self) -> str:
        return slugify(self.input)


@dataclass(frozen=True)
class DecisionModel:
    tables: dict[str, DecisionTable]
    requirements: tuple[Requirement, ...] = ()

    def table(self, name: str) -> DecisionTable:
        if name in self.tables:
            return self.tables[name]
        # tolerate slug-form lookups
        for t in self.tables.values():
            if t.slug == slugify(name):
                return t
        raise UnknownTable(f"no table named {name!r}")

    def edge_for(self, table: str, input_slug: str) -> Optional[Requirement]:
        t = self.table(table)
        for req in self.requirements:
            if slugify(req.parent) == t.slug and req.input_slug == input_slug:
                return req
        return None


@dataclass(frozen=True)
class Assignment:
    """Partial binding of input slugs to conforming values."""

    bindings: Mapping[str, Value] = field(default_factory=dict)

    def bound(self, slug: str) -> bool:
        return slug in self.bindings

    def get(self, slug: str) -> Optional[Value]:
        return self.bindings.get(slug)

    def merged(self, extra: Mapping[str, Value]) -> "Assignment":
        combined = dict(self.bindings)
        combined.update(extra)
        return Assignment(combined)

    def __iter__(self) -> Iterator[str]:
        return iter(self.bindings)

    def __len__(self) -> int:
        return len(self.bindings)


def bind(model: DecisionModel, root: str, values: Mapping[str, Payload]) -> Assignment:
    """Resolve user-facing input names to slugs and coerce native payloads to Values.

    Rejects bindings for inputs that are derived from a sub-decision (those are
    always computed, never supplied).
    """
    askable = {c.slug: c for c in raw_inputs(model, root)}
    derived = {c.slug for c in derived_inputs(model, root)}
    out: dict[str, Value] = {}
    for name, payload in values.items():
        slug = slugify(name)
        if slug in derived:
            raise DerivedInputBound(f"input {name!r} is computed from a sub-decision")
        if slug not in askable:
            raise UnknownInput(f"{name!r} is not an input of decision {root!r}")
        value = payload if isinstance(payload, Value) else make_value(askable[slug].data_type, payload)
        out[slug] = value
    return Assignment(out)


# --- hierarchy traversal ----------------------------------------------------


def raw_inputs(
    model: DecisionModel, root: str, treat_as_leaf: frozenset[str] = frozenset()
) -> list[InputClause]:
    """Askable inputs of the whole hierarchy, in question order.

    The root table's columns in column order, with every derive-mode column
    replaced in place by the child table's raw inputs (depth-first). Duplicate
    slugs keep their first occurrence. Slugs listed in `treat_as_leaf` are not
    expanded even if a derive edge exists.
    """
    table = model.table(root)
    seen: set[str] = set()
    result: list[InputClause] = []

    def expand(name: str, stack: tuple[str, ...]) -> None:
        t = model.table(name)
        if t.slug in stack:
            raise CyclicHierarchy(f"requirement cycle through table {t.name!r}")
        for clause in t.inputs:
            edge = model.edge_for(t.name, clause.slug)
            if edge is not None and edge.mode == "derive" and clause.slug not in treat_as_leaf:
                expand(edge.child, stack + (t.slug,))
            elif clause.slug not in seen:
                seen.add(clause.slug)
                result.append(clause)

    expand(table.name, ())
    return result


def derived_inputs(model: DecisionModel, root: str) -> list[InputClause]:
    """Inputs anywhere in the hierarchy that are computed via a derive edge."""
    out: list[InputClause] = []
    seen: set[str] = set()

    def walk(name: str, stack: tuple[str, ...]) -> None:
        t = model.table(name)
        if t.slug in stack:
            raise CyclicHierarchy(f"requirement cycle through table {t.name!r}")
        for clause in t.inputs:
            edge = model.edge_for(t.name, clause.slug)
            if edge is not None and edge.mode == "derive":
                if clause.slug not in seen:
                    seen.add(clause.slug)
                    out.append(clause)
                walk(edge.child, stack + (t.slug,))

    walk(model.table(root).name, ())
    return out


def validate_model(model: DecisionModel, root: Optional[str] = None) -> list[str]:
    """Check cross-table invariants. Returns compile warnings; raises on violations."""
    warnings: list[str] = []
    by_slug: dict[str, list[str]] = {}
    for t in model.tables.values():
        for clause in t.inputs:
            by_slug.setdefault(clause.slug, []).append(t.name)
    for slug, owners in by_slug.items():
        if len(owners) > 1:
            warnings.append(
                f"input {slug!r} appears in tables {owners}; treated as the same question"
            )

    # acyclicity first (DFS over derive/ask edges alike); a cyclic model should
    # report the cycle, not whatever edge typing happens to be broken too
    children = {t.slug: [] for t in model.tables.values()}
    for req in model.requirements:
        children[model.table(req.parent).slug].append(model.table(req.child).slug)
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(slug: str) -> None:
        if state.get(slug) == 1:
            raise CyclicHierarchy(f"requirement cycle through table {slug!r}")
        if state.get(slug) == 2:
            return
        state[slug] = 1
        for c in children[slug]:
            visit(c)
        state[slug] = 2

    for t in model.tables.values():
        visit(t.slug)

    for req in model.requirements:
        parent = model.table(req.parent)
        child = model.table(req.child)
        clause = parent.input_by_slug(req.input_slug)
        if clause.data_type != child.output.data_type:
            raise ModelError(
                f"requirement {req.parent}.{req.input} <- {req.child}: input type "
                f"{clause.data_type.kind} does not match child output type "
                f"{child.output.data_type.kind}"
            )

    if root is not None:
        model.table(root)  # raises UnknownTable
    return warnings
