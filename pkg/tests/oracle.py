"""Independent brute-force oracles for the decision engine.

Everything here is written from the table semantics directly: plain rule
scans, a denser value grid (every test constant plus/minus 0.5), and full
product enumeration. It deliberately shares no code path with dmnbot.engine.
"""

from __future__ import annotations

import itertools
from typing import Mapping

from dmnbot.model import (
    DecisionModel,
    DecisionTable,
    InputClause,
    Value,
    test_constants,
    test_text_constants,
)


def oracle_table_value(table: DecisionTable, row: Mapping[str, Value]) -> Value:
    matched = []
    for rule in table.rules:
        if all(test.accepts(row[c.slug]) for c, test in zip(table.inputs, rule.input_entries)):
            matched.append(rule)
    assert len(matched) == 1, f"{table.name}: {len(matched)} rules match"
    return matched[0].output_entry


def oracle_evaluate(model: DecisionModel, root: str, binding: Mapping[str, Value]) -> Value:
    table = model.table(root)
    row = {}
    for clause in table.inputs:
        if clause.slug in binding:
            row[clause.slug] = binding[clause.slug]
        else:
            edge = model.edge_for(table.name, clause.slug)
            assert edge is not None and edge.mode == "derive", f"unbound input {clause.name}"
            row[clause.slug] = oracle_evaluate(model, edge.child, binding)
    return oracle_table_value(table, row)


def oracle_askable(model: DecisionModel, root: str) -> list[InputClause]:
    out: list[InputClause] = []
    seen: set[str] = set()

    def walk(name: str) -> None:
        table = model.table(name)
        for clause in table.inputs:
            edge = model.edge_for(table.name, clause.slug)
            if edge is not None and edge.mode == "derive":
                walk(edge.child)
            elif clause.slug not in seen:
                seen.add(clause.slug)
                out.append(clause)

    walk(root)
    return out


def _reachable_tables(model: DecisionModel, root: str) -> list[DecisionTable]:
    tables = []

    def walk(name: str) -> None:
        table = model.table(name)
        tables.append(table)
        for clause in table.inputs:
            edge = model.edge_for(table.name, clause.slug)
            if edge is not None and edge.mode == "derive":
                walk(edge.child)

    walk(root)
    return tables


def oracle_points(model: DecisionModel, root: str, clause: InputClause) -> list[Value]:
    """A grid finer than strictly needed: every constant and both sides of it."""
    kind = clause.data_type.kind
    if kind == "boolean":
        return [Value("boolean", True), Value("boolean", False)]
    if kind == "enumeration":
        return [Value("enumeration", v) for v in clause.data_type.enum_values]
    tests = []
    for table in _reachable_tables(model, root):
        for i, c in enumerate(table.inputs):
            if c.slug == clause.slug:
                tests.extend(r.input_entries[i] for r in table.rules)
    if kind == "number":
        constants = sorted({c for t in tests for c in test_constants(t)})
        points: set[float] = set()
        for c in constants:
            points.update((c - 0.5, float(c), c + 0.5))
        if not points:
            points = {0.0}
        bounds = clause.data_type.numeric_bounds
        if bounds is not None:
            lo, hi = bounds
            points = {p for p in points if lo <= p <= hi} | {float(lo), float(hi)}
        return [Value("number", p) for p in sorted(points)]
    labels = sorted({c for t in tests for c in test_text_constants(t)})
    fresh = "zz_unseen"
    while fresh in labels:
        fresh += "z"
    return [Value("text", s) for s in labels + [fresh]]


def oracle_is_necessary(
    model: DecisionModel, root: str, slug: str, bound: Mapping[str, Value]
) -> bool:
    askable = oracle_askable(model, root)
    target = next(c for c in askable if c.slug == slug)
    others = [c for c in askable if c.slug != slug and c.slug not in bound]
    other_points = [oracle_points(model, root, c) for c in others]
    target_points = oracle_points(model, root, target)
    for combo in itertools.product(*other_points):
        base = dict(bound)
        base.update({c.slug: v for c, v in zip(others, combo)})
        outputs = set()
        for v in target_points:
            base[target.slug] = v
            outputs.add(oracle_evaluate(model, root, base))
        if len(outputs) > 1:
            return True
    return False
