from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmnbot import cells
from dmnbot.errors import CellSyntaxError, DmnBotError, TypeMismatch
from dmnbot.model import (
    AnyValue,
    Compare,
    DataTypeSpec,
    Equal,
    Interval,
    Negation,
    OneOf,
    Value,
)

NUMBER = DataTypeSpec("number")
BOOLEAN = DataTypeSpec("boolean")
CATEGORY = DataTypeSpec("enumeration", ("HIGH", "MEDIUM", "LOW"))


def test_wildcard_parses_to_any():
    assert cells.parse_unary_test("-", NUMBER) == AnyValue()
    assert cells.parse_unary_test("  -  ", BOOLEAN) == AnyValue()


def test_bare_boolean_literal():
    assert cells.parse_unary_test("true", BOOLEAN) == Equal(Value("boolean", True))
    assert cells.parse_unary_test("False", BOOLEAN) == Equal(Value("boolean", False))


@pytest.mark.parametrize(
    "cell,expected",
    [
        ("<80", Compare("<", 80)),
        ("<=80", Compare("<=", 80)),
        (">120", Compare(">", 120)),
        (">= 600", Compare(">=", 600)),
    ],
)
def test_comparisons(cell, expected):
    assert cells.parse_unary_test(cell, NUMBER) == expected


def test_interval_membership_matches_closed_open_flags():
    # independent check: 80 in, 90 out, 85 in for [80..90)
    test = cells.parse_unary_test("[80..90)", NUMBER)
    assert test == Interval(80, True, 90, False)
    assert test.accepts(Value("number", 80)) is True
    assert test.accepts(Value("number", 90)) is False
    assert test.accepts(Value("number", 85)) is True


@pytest.mark.parametrize(
    "cell,lower_closed,upper_closed",
    [("[1..2]", True, True), ("(1..2]", False, True), ("[1..2)", True, False), ("(1..2)", False, False)],
)
def test_interval_brackets(cell, lower_closed, upper_closed):
    test = cells.parse_unary_test(cell, NUMBER)
    assert test == Interval(1, lower_closed, 2, upper_closed)


def test_enumeration_list_and_case_folding():
    test = cells.parse_unary_test("high, low", CATEGORY)
    assert test == OneOf((Value("enumeration", "HIGH"), Value("enumeration", "LOW")))


def test_negation():
    test = cells.parse_unary_test("not(HIGH)", CATEGORY)
    assert test == Negation(Equal(Value("enumeration", "HIGH")))
    assert test.accepts(Value("enumeration", "LOW"))
    assert not test.accepts(Value("enumeration", "HIGH"))


def test_quoted_literal():
    assert cells.parse_unary_test('"LOW"', CATEGORY) == Equal(Value("enumeration", "LOW"))


def test_syntax_error_carries_position_and_reason():
    with pytest.raises(CellSyntaxError) as err:
        cells.parse_unary_test("<abc", NUMBER)
    assert err.value.position == 1
    assert "number" in err.value.reason


def test_type_mismatch_for_comparison_on_boolean():
    with pytest.raises(TypeMismatch):
        cells.parse_unary_test("<80", BOOLEAN)


def test_type_mismatch_for_unknown_enum_label():
    with pytest.raises(TypeMismatch):
        cells.parse_unary_test("PURPLE", CATEGORY)


def test_empty_cell_rejected():
    with pytest.raises(CellSyntaxError):
        cells.parse_unary_test("   ", NUMBER)


def test_scientific_notation_rejected():
    with pytest.raises(DmnBotError):
        cells.parse_unary_test("<1e3", NUMBER)


@pytest.mark.parametrize("dtype", [NUMBER, BOOLEAN, CATEGORY])
@settings(max_examples=300, deadline=None)
@given(text=st.text(max_size=30))
def test_parser_never_panics(dtype, text):
    """Arbitrary input either parses or raises a structured error."""
    try:
        result = cells.parse_unary_test(text, dtype)
    except DmnBotError:
        return
    assert result.accepts is not None


@settings(max_examples=200, deadline=None)
@given(
    op=st.sampled_from(("<", "<=", ">", ">=")),
    bound=st.integers(-999, 999),
    probe=st.integers(-1000, 1000),
)
def test_comparison_semantics_against_python_operators(op, bound, probe):
    test = cells.parse_unary_test(f"{op}{bound}", NUMBER)
    expected = {"<": probe < bound, "<=": probe <= bound, ">": probe > bound, ">=": probe >= bound}
    assert test.accepts(Value("number", probe)) == expected[op]


def test_unparse_round_trips_fixture_cells():
    for cell, dtype in [
        ("-", NUMBER),
        ("<80", NUMBER),
        ("[80..120]", NUMBER),
        (">=600", NUMBER),
        ("true", BOOLEAN),
        ("HIGH, LOW", CATEGORY),
        ("not(MEDIUM)", CATEGORY),
    ]:
        parsed = cells.parse_unary_test(cell, dtype)
        again = cells.parse_unary_test(cells.unparse_unary_test(parsed), dtype)
        assert again == parsed
