"""Random valid decision models, built by recursive domain splitting so the
Unique hit policy and full coverage hold by construction."""

from __future__ import annotations

import random
from typing import Optional

from dmnbot.model import (
    AnyValue,
    Compare,
    DataTypeSpec,
    DecisionModel,
    DecisionTable,
    Equal,
    InputClause,
    Interval,
    OneOf,
    OutputClause,
    Requirement,
    Rule,
    UnaryTest,
    Value,
    make_value,
)

OUTPUT_VALUES = ("ALPHA", "BETA", "GAMMA")
ENUM_POOL = ("red", "green", "blue", "amber")


def _random_dtype(rng: random.Random) -> DataTypeSpec:
    roll = rng.random()
    if roll < 0.45:
        return DataTypeSpec("number")
    if roll < 0.75:
        return DataTypeSpec("boolean")
    k = rng.randint(2, 4)
    return DataTypeSpec("enumeration", ENUM_POOL[:k])


def _number_cells(rng: random.Random, cuts: list[int]) -> list[UnaryTest]:
    """Partition the number line along a subset of the cut points."""
    if not cuts:
        return [AnyValue()]
    used = sorted(rng.sample(cuts, rng.randint(1, len(cuts))))
    cells: list[UnaryTest] = []
    for i in range(len(used) + 1):
        lower = used[i - 1] if i > 0 else None
        upper = used[i] if i < len(used) else None
        if lower is None and upper is None:
            cells.append(AnyValue())
        elif lower is None:
            cells.append(Compare("<", upper))
        elif upper is None:
            cells.append(Compare(">=", lower))
        else:
            cells.append(Interval(lower, True, upper, False))
    return cells


def _enum_cells(rng: random.Random, dtype: DataTypeSpec) -> list[UnaryTest]:
    values = list(dtype.enum_values)
    rng.shuffle(values)
    groups: list[list[str]] = []
    current: list[str] = []
    for v in values:
        current.append(v)
        if rng.random() < 0.5:
            groups.append(current)
            current = []
    if current:
        groups.append(current)
    if len(groups) == 1:
        return [AnyValue()]
    cells = []
    for group in groups:
        if len(group) == 1:
            cells.append(Equal(make_value(dtype, group[0])))
        else:
            cells.append(OneOf(tuple(make_value(dtype, v) for v in sorted(group))))
    return cells


def _cells_for(rng: random.Random, clause: InputClause, cuts: list[int]) -> list[UnaryTest]:
    kind = clause.data_type.kind
    if kind == "boolean":
        return [Equal(Value("boolean", True)), Equal(Value("boolean", False))]
    if kind == "enumeration":
        return _enum_cells(rng, clause.data_type)
    return _number_cells(rng, cuts)


def random_table(
    rng: random.Random,
    name: str = "T",
    max_inputs: int = 4,
    max_rules: int = 12,
    forced_inputs: Optional[list[InputClause]] = None,
    output_values: tuple[str, ...] = OUTPUT_VALUES,
) -> DecisionTable:
    for _ in range(60):
        inputs = list(forced_inputs or [])
        n = rng.randint(max(1, len(inputs)), max_inputs)
        for i in range(len(inputs), n):
            inputs.append(InputClause(f"{name}In{i}", f"{name} in {i}", _random_dtype(rng)))
        cuts = {
            c.slug: sorted(rng.sample(range(0, 40, 2), rng.randint(1, 2)))
            for c in inputs
            if c.data_type.kind == "number"
        }
        out_dtype = DataTypeSpec("enumeration", output_values)
        output = OutputClause(
            f"{name}Out", out_dtype, tuple(make_value(out_dtype, v) for v in output_values)
        )

        leaves: list[dict[str, UnaryTest]] = []
        overflow = False

        def split(cell: dict[str, UnaryTest], remaining: list[InputClause]) -> None:
            nonlocal overflow
            if overflow:
                return
            if len(leaves) >= max_rules:
                overflow = True  # truncating would leave coverage gaps; retry
                return
            if not remaining or rng.random() < 0.3:
                leaves.append(cell)
                return
            clause = remaining[0]
            for test in _cells_for(rng, clause, cuts.get(clause.slug, [])):
                split({**cell, clause.slug: test}, remaining[1:])

        order = list(inputs)
        rng.shuffle(order)
        split({}, order)
        if overflow or not leaves:
            continue
        rules = tuple(
            Rule(
                i + 1,
                tuple(leaf.get(c.slug, AnyValue()) for c in inputs),
                make_value(out_dtype, rng.choice(output_values)),
            )
            for i, leaf in enumerate(leaves)
        )
        return DecisionTable(name, "U", tuple(inputs), output, rules)
    raise AssertionError("could not generate a table within the rule budget")


def random_model(rng: random.Random, hierarchy_chance: float = 0.35) -> tuple[DecisionModel, str]:
    """A single table, or a two-level hierarchy feeding one parent input."""
    if rng.random() >= hierarchy_chance:
        table = random_table(rng, "Solo")
        return DecisionModel({table.name: table}), table.name
    child = random_table(rng, "Child", max_inputs=2, max_rules=8)
    derived = InputClause(
        "ChildOut", "child out", DataTypeSpec("enumeration", OUTPUT_VALUES)
    )
    parent = random_table(
        rng,
        "Parent",
        max_inputs=3,
        max_rules=10,
        forced_inputs=[derived],
    )
    model = DecisionModel(
        {parent.name: parent, child.name: child},
        (Requirement(parent.name, derived.name, child.name),),
    )
    return model, parent.name


def random_in_domain_value(rng: random.Random, clause: InputClause) -> Value:
    kind = clause.data_type.kind
    if kind == "boolean":
        return Value("boolean", rng.random() < 0.5)
    if kind == "enumeration":
        return Value("enumeration", rng.choice(clause.data_type.enum_values))
    if kind == "number":
        return Value("number", round(rng.uniform(-5, 45), 2))
    return Value("text", rng.choice(("red", "blue", "something")))
