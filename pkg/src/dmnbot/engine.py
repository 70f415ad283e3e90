"""Decision evaluation under the Unique hit policy, plus the necessity analysis
that decides which missing inputs still matter.

A table's output is piecewise-constant on the partition of each input induced
by the unary tests that mention it, so a finite set of representative values
per input is an exact certificate: an unbound input is necessary iff the
output varies along that input's representatives for some completion of the
other missing inputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    AlreadyBound,
    IncompleteAssignment,
    MissingInput,
    MultipleMatchingRules,
    NoMatchingRule,
    UnknownInput,
)
from .model import (
    Assignment,
    DataTypeSpec,
    DecisionModel,
    DecisionTable,
    InputClause,
    Number,
    Rule,
    UnaryTest,
    Value,
    derived_inputs,
    make_value,
    normalize_number,
    raw_inputs,
    slugify,
    test_constants,
    test_text_constants,
)


@dataclass(frozen=True)
class RepresentativeDomain:
    input: str  # slug
    representatives: tuple[Value, ...]


def _between(lo: Number, hi: Number) -> Number:
    """A deterministic point strictly inside (lo, hi); integers preferred."""
    mid = (lo + hi) / 2
    for candidate in (math.floor(mid), math.floor(mid) + 1):
        if lo < candidate < hi:
            return candidate
    return mid


def _number_representatives(
    tests: Sequence[UnaryTest], bounds: Optional[tuple[Number, Number]]
) -> list[Number]:
    endpoints = sorted({normalize_number(c) for t in tests for c in test_constants(t)})
    # candidate order is a preference: endpoints, in-between points, the open
    # tails, then the declared bounds; the first candidate of each partition
    # cell is kept
    candidates: list[Number] = list(endpoints)
    for a, b in zip(endpoints, endpoints[1:]):
        candidates.append(_between(a, b))
    if endpoints:
        candidates.append(endpoints[0] - 1)
        candidates.append(endpoints[-1] + 1)
    if bounds is not None:
        lo, hi = bounds
        candidates.extend([lo, hi])
        candidates = [c for c in candidates if lo <= c <= hi]
    if not candidates:
        candidates = [0]

    reps: list[Number] = []
    seen: set[tuple[bool, ...]] = set()
    picked: set[Number] = set()
    for c in candidates:
        c = normalize_number(c)
        sig = tuple(t.accepts(Value("number", c)) for t in tests)
        if sig not in seen and c not in picked:
            seen.add(sig)
            picked.add(c)
            reps.append(c)
    return sorted(reps)


def _text_representatives(tests: Sequence[UnaryTest]) -> list[str]:
    constants = sorted({c for t in tests for c in test_text_constants(t)})
    sentinel = "other"
    n = 1
    while sentinel in constants:
        sentinel = f"other{n}"
        n += 1
    return constants + [sentinel]


def representative_values(tests: Sequence[UnaryTest], dtype: DataTypeSpec) -> tuple[Value, ...]:
    """Representatives for one input given every unary test it faces."""
    if dtype.kind == "boolean":
        return (Value("boolean", True), Value("boolean", False))
    if dtype.kind == "enumeration":
        return tuple(Value("enumeration", v) for v in dtype.enum_values)
    if dtype.kind == "number":
        return tuple(
            Value("number", x) for x in _number_representatives(tests, dtype.numeric_bounds)
        )
    return tuple(Value("text", s) for s in _text_representatives(tests))


def _derive_reachable(model: DecisionModel, root: str) -> list[DecisionTable]:
    """Tables whose rules participate in evaluating `root` (derive edges only)."""
    out: list[DecisionTable] = []
    stack = [model.table(root).name]
    seen: set[str] = set()
    while stack:
        name = stack.pop()
        t = model.table(name)
        if t.slug in seen:
            continue
        seen.add(t.slug)
        out.append(t)
        for clause in t.inputs:
            edge = model.edge_for(t.name, clause.slug)
            if edge is not None and edge.mode == "derive":
                stack.append(edge.child)
    return out


def _tests_on(tables: Iterable[DecisionTable], slug: str) -> list[UnaryTest]:
    tests: list[UnaryTest] = []
    for table in tables:
        for i, clause in enumerate(table.inputs):
            if clause.slug == slug:
                tests.extend(rule.input_entries[i] for rule in table.rules)
    return tests


def representative_domain(model: DecisionModel, root: str, clause: InputClause) -> RepresentativeDomain:
    """Hierarchy-wide representatives for one askable input."""
    tables = _derive_reachable(model, root)
    tests = _tests_on(tables, clause.slug)
    return RepresentativeDomain(clause.slug, representative_values(tests, clause.data_type))


# --- evaluation ---------------------------------------------------------------


def matches(table: DecisionTable, rule: Rule, assignment: Assignment) -> bool:
    """True iff every input entry of the rule accepts the bound value."""
    for clause in table.inputs:
        if not assignment.bound(clause.slug):
            raise IncompleteAssignment(f"input {clause.name!r} is not bound")
    return all(
        test.accepts(assignment.get(clause.slug))
        for clause, test in zip(table.inputs, rule.input_entries)
    )


def _table_output(table: DecisionTable, row: Mapping[str, Value]) -> Value:
    matched = [
        rule
        for rule in table.rules
        if all(test.accepts(row[c.slug]) for c, test in zip(table.inputs, rule.input_entries))
    ]
    if not matched:
        shown = {c.name: row[c.slug].render() for c in table.inputs}
        raise NoMatchingRule(f"table {table.name!r}: no rule matches {shown}")
    if len(matched) > 1:
        raise MultipleMatchingRules(table.name, tuple(r.index for r in matched))
    return matched[0].output_entry


def _evaluate(model: DecisionModel, root: str, bindings: Mapping[str, Value]) -> Value:
    """Bottom-up evaluation; `bindings` may force values for derived inputs."""
    cache: dict[str, Value] = {}

    def table_value(name: str) -> Value:
        table = model.table(name)
        if table.slug in cache:
            return cache[table.slug]
        row: dict[str, Value] = {}
        for clause in table.inputs:
            if clause.slug in bindings:
                row[clause.slug] = bindings[clause.slug]
                continue
            edge = model.edge_for(table.name, clause.slug)
            if edge is not None and edge.mode == "derive":
                row[clause.slug] = table_value(edge.child)
            else:
                raise MissingInput(clause.name)
        value = _table_output(table, row)
        cache[table.slug] = value
        return value

    return table_value(model.table(root).name)


def _as_assignment(assignment) -> Assignment:
    if isinstance(assignment, Assignment):
        return assignment
    return Assignment(dict(assignment))


def decision(model: DecisionModel, root: str, assignment) -> Value:
    """Output of the unique matching rule of the root, resolving the hierarchy
    bottom-up. Unbound inputs must be unnecessary under the given bindings;
    the first missing one (in question order) is reported otherwise.
    """
    assignment = _as_assignment(assignment)
    askable = raw_inputs(model, root)
    for clause in askable:
        if not assignment.bound(clause.slug) and is_necessary(model, root, clause.slug, assignment):
            raise MissingInput(clause.name)
    bindings = dict(assignment.bindings)
    for clause in askable:
        if clause.slug not in bindings:
            bindings[clause.slug] = representative_domain(model, root, clause).representatives[0]
    return _evaluate(model, root, bindings)


def is_necessary(model: DecisionModel, root: str, input_name: str, assignment) -> bool:
    """Whether the unbound input can still change the decision.

    False iff, for every completion of the other missing inputs over their
    representative domains, the output is identical across all representative
    values of `input_name`.
    """
    assignment = _as_assignment(assignment)
    slug = slugify(input_name)
    askable = raw_inputs(model, root)
    askable_slugs = {c.slug for c in askable}
    if assignment.bound(slug):
        raise AlreadyBound(f"input {input_name!r} is already bound")

    if slug in askable_slugs:
        clause = next(c for c in askable if c.slug == slug)
        domain = representative_domain(model, root, clause).representatives
        others = [c for c in askable if c.slug != slug and not assignment.bound(c.slug)]
    else:
        derived = {c.slug: c for c in derived_inputs(model, root)}
        if slug not in derived:
            raise UnknownInput(f"{input_name!r} is not an input of decision {root!r}")
        # forcing a derived input makes its subtree irrelevant; vary it over the
        # child's output domain and complete only the inputs used elsewhere
        table_with_edge = _find_edge_owner(model, root, slug)
        edge = model.edge_for(table_with_edge, slug)
        domain = model.table(edge.child).output.allowed_values
        others = [
            c
            for c in raw_inputs(model, root, treat_as_leaf=frozenset({slug}))
            if c.slug != slug and not assignment.bound(c.slug)
        ]

    other_domains = [representative_domain(model, root, c).representatives for c in others]
    other_slugs = [c.slug for c in others]
    for combo in itertools.product(*other_domains):
        base = dict(assignment.bindings)
        base.update(zip(other_slugs, combo))
        first: Optional[Value] = None
        for value in domain:
            base[slug] = value
            out = _evaluate(model, root, base)
            if first is None:
                first = out
            elif out != first:
                return True
    return False


def _find_edge_owner(model: DecisionModel, root: str, input_slug: str) -> str:
    for table in _derive_reachable(model, root):
        if model.edge_for(table.name, input_slug) is not None:
            return table.name
    raise UnknownInput(f"no requirement edge feeds input {input_slug!r}")


# --- table validation ----------------------------------------------------------


@dataclass(frozen=True)
class ConflictReport:
    kind: str  # "overlap" or "gap"
    point: dict[str, Value]
    rules: tuple[int, ...]

    def describe(self) -> str:
        shown = {name: value.render() for name, value in self.point.items()}
        if self.kind == "overlap":
            return f"rules {list(self.rules)} all match {shown}"
        return f"no rule matches {shown}"


def validate_unique(table: DecisionTable) -> list[ConflictReport]:
    """Sweep the representative grid of one table; report overlaps and gaps.

    Returns reports instead of raising so whole tables can be audited at once.
    """
    domains = []
    for i, clause in enumerate(table.inputs):
        tests = [rule.input_entries[i] for rule in table.rules]
        domains.append(representative_values(tests, clause.data_type))
    reports: list[ConflictReport] = []
    for combo in itertools.product(*domains):
        row = {c.slug: v for c, v in zip(table.inputs, combo)}
        matched = tuple(
            rule.index
            for rule in table.rules
            if all(test.accepts(row[c.slug]) for c, test in zip(table.inputs, rule.input_entries))
        )
        if len(matched) == 1:
            continue
        point = {c.name: v for c, v in zip(table.inputs, combo)}
        kind = "overlap" if matched else "gap"
        reports.append(ConflictReport(kind, point, matched))
    return reports
