"""Parser for rule-cell condition strings.

Accepted forms:

    -                    wildcard, matches anything
    <n  <=n  >n  >=n     numeric comparison
    [a..b]  (a..b]
    [a..b)  (a..b)       numeric interval, square = closed, round = open
    lit, lit, ...        enumeration of literals
    not(...)             negation of any of the above
    lit                  equality with a single literal

Literals are decimal numbers (optional fraction, no exponent), true/false,
or labels; labels may be double-quoted. Unquoted labels are trimmed and
matched case-insensitively against enumeration values.
"""

from __future__ import annotations

import re

from .errors import CellSyntaxError, TypeMismatch
from .model import (
    AnyValue,
    Compare,
    DataTypeSpec,
    Equal,
    Interval,
    Negation,
    OneOf,
    UnaryTest,
    Value,
    format_number,
    make_value,
)

_NUMBER_RE = re.compile(r"^-?\d+(\.\d+)?$")
_INTERVAL_RE = re.compile(r"^([\[(])(.*?)\.\.(.*?)([\])])$")


def parse_number(text: str) -> float:
    if not _NUMBER_RE.match(text):
        raise TypeMismatch(f"{text!r} is not a decimal number")
    return float(text)


def parse_value_literal(text: str, dtype: DataTypeSpec) -> Value:
    """Coerce one literal token to a Value of the clause's type."""
    text = text.strip()
    if len(text) >= 2 and text[0] == '"' and text[-1] == '"':
        text = text[1:-1].replace('\\"', '"')
    if dtype.kind == "boolean":
        low = text.lower()
        if low in ("true", "yes"):
            return make_value(dtype, True)
        if low in ("false", "no"):
            return make_value(dtype, False)
        raise TypeMismatch(f"{text!r} is not a boolean literal")
    if dtype.kind == "number":
        return make_value(dtype, parse_number(text))
    return make_value(dtype, text)


def _split_literals(body: str) -> list[str]:
    """Split on commas, honoring double quotes."""
    parts: list[str] = []
    current: list[str] = []
    in_quotes = False
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == '"' and not (i > 0 and body[i - 1] == "\\"):
            in_quotes = not in_quotes
            current.append(ch)
        elif ch == "," and not in_quotes:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
        i += 1
    parts.append("".join(current))
    return parts


def parse_unary_test(cell: str, clause_type: DataTypeSpec) -> UnaryTest:
    """Parse one rule-cell string against the clause's data type."""
    if not isinstance(cell, str):
        raise CellSyntaxError(repr(cell), 0, "cell must be a string")
    text = cell.strip()
    if not text:
        raise CellSyntaxError(cell, 0, "empty cell")

    if text == "-":
        return AnyValue()

    low = text.lower()
    if low.startswith("not(") and text.endswith(")"):
        inner = text[4:-1].strip()
        if not inner:
            raise CellSyntaxError(cell, 4, "empty negation")
        return Negation(parse_unary_test(inner, clause_type))

    m = _INTERVAL_RE.match(text)
    if m:
        if clause_type.kind != "number":
            raise TypeMismatch(f"interval on a {clause_type.kind} clause")
        open_b, lo_s, hi_s, close_b = m.groups()
        lo_s, hi_s = lo_s.strip(), hi_s.strip()
        if not _NUMBER_RE.match(lo_s):
            raise CellSyntaxError(cell, 1, f"bad lower bound {lo_s!r}")
        if not _NUMBER_RE.match(hi_s):
            raise CellSyntaxError(cell, text.index("..") + 2, f"bad upper bound {hi_s!r}")
        lo, hi = float(lo_s), float(hi_s)
        lower_closed, upper_closed = open_b == "[", close_b == "]"
        if lo > hi or (lo == hi and not (lower_closed and upper_closed)):
            raise CellSyntaxError(cell, 0, "empty interval")
        return Interval(lo, lower_closed, hi, upper_closed)

    for op in ("<=", ">=", "<", ">"):
        if text.startswith(op):
            if clause_type.kind != "number":
                raise TypeMismatch(f"comparison on a {clause_type.kind} clause")
            rest = text[len(op):].strip()
            if not _NUMBER_RE.match(rest):
                raise CellSyntaxError(cell, len(op), f"expected a number after {op!r}")
            return Compare(op, float(rest))

    if "," in text:
        in_quotes = "\"" in text
        parts = _split_literals(text) if in_quotes else text.split(",")
        literals = [p.strip() for p in parts]
        if any(not p for p in literals):
            raise CellSyntaxError(cell, text.index(","), "empty literal in enumeration")
        values = tuple(parse_value_literal(p, clause_type) for p in literals)
        return OneOf(values)

    return Equal(parse_value_literal(text, clause_type))


def _quote_if_needed(label: str) -> str:
    needs = (
        label != label.strip()
        or "," in label
        or label == "-"
        or label.lower() in ("true", "false", "yes", "no")
        or label.lower().startswith("not(")
        or label[:1] in "<>[("
        or bool(_NUMBER_RE.match(label))
        or label == ""
    )
    if needs:
        return '"%s"' % label.replace('"', '\\"')
    return label


def render_value_literal(value: Value) -> str:
    if value.kind == "boolean":
        return "true" if value.payload else "false"
    if value.kind == "number":
        return format_number(value.payload)  # type: ignore[arg-type]
    return _quote_if_needed(str(value.payload))


def unparse_unary_test(test: UnaryTest) -> str:
    """Canonical cell string; parse(unparse(t)) == t for validated tests."""
    if isinstance(test, AnyValue):
        return "-"
    if isinstance(test, Equal):
        return render_value_literal(test.value)
    if isinstance(test, Compare):
        return f"{test.op}{format_number(test.bound)}"
    if isinstance(test, Interval):
        lo = "[" if test.lower_closed else "("
        hi = "]" if test.upper_closed else ")"
        return f"{lo}{format_number(test.lower)}..{format_number(test.upper)}{hi}"
    if isinstance(test, OneOf):
        return ", ".join(render_value_literal(v) for v in test.values)
    if isinstance(test, Negation):
        return f"not({unparse_unary_test(test.inner)})"
    raise TypeError(f"unknown unary test {test!r}")
