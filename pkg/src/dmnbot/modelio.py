"""Read and write decision models: compact JSON format and a DMN 1.3 XML subset.

Compact JSON layout (documented in README):

    {
      "tables": [
        {
          "name": "...", "hitPolicy": "U",
          "inputs": [{"name", "label"?, "type", "values"?, "bounds"?}, ...],
          "output": {"name", "type", "values"?},
          "rules": [{"when": ["<cell>", ...], "then": "<literal>"}, ...]
        }, ...
      ],
      "requirements": [{"parent", "input", "child", "mode"?}, ...],
      "root": "<table name>"
    }
"""

from __future__ import annotations

import hashlib
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Any, Optional, Union

from . import cells
from .errors import (
    CyclicHierarchy,
    ModelError,
    SchemaError,
    TypeMismatch,
    UnsupportedConstruct,
    UnsupportedHitPolicy,
    XmlError,
)
from .model import (
    DataTypeSpec,
    DecisionModel,
    DecisionTable,
    InputClause,
    OutputClause,
    Requirement,
    Rule,
    Value,
    humanize,
    make_value,
    slugify,
    validate_model,
)


@dataclass(frozen=True)
class ModelDocument:
    model: DecisionModel
    root: str
    warnings: tuple[str, ...] = ()


# --- JSON ------------------------------------------------------------------


def _expect(condition: bool, pointer: str, reason: str) -> None:
    if not condition:
        raise SchemaError(pointer, reason)


def _parse_dtype(obj: dict, pointer: str) -> DataTypeSpec:
    kind = obj.get("type")
    _expect(isinstance(kind, str), f"{pointer}/type", "missing or non-string type")
    values = obj.get("values")
    bounds = obj.get("bounds")
    try:
        if kind == "enumeration":
            _expect(
                isinstance(values, list) and all(isinstance(v, str) for v in values),
                f"{pointer}/values",
                "enumeration needs a list of string values",
            )
            return DataTypeSpec("enumeration", tuple(values))
        if kind == "number" and bounds is not None:
            _expect(
                isinstance(bounds, list)
                and len(bounds) == 2
                and all(isinstance(b, (int, float)) and not isinstance(b, bool) for b in bounds),
                f"{pointer}/bounds",
                "bounds must be [lower, upper] numbers",
            )
            return DataTypeSpec("number", numeric_bounds=(bounds[0], bounds[1]))
        return DataTypeSpec(kind)
    except ModelError as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_output(obj: Any, pointer: str) -> OutputClause:
    _expect(isinstance(obj, dict), pointer, "output must be an object")
    name = obj.get("name")
    _expect(isinstance(name, str) and bool(name.strip()), f"{pointer}/name", "missing output name")
    dtype = _parse_dtype(obj, pointer)
    values = obj.get("values")
    try:
        if dtype.kind == "enumeration":
            allowed = tuple(make_value(dtype, v) for v in dtype.enum_values)
        elif dtype.kind == "boolean":
            raw = values if values is not None else [True, False]
            allowed = tuple(make_value(dtype, v) for v in raw)
        else:
            _expect(
                isinstance(values, list) and len(values) > 0,
                f"{pointer}/values",
                f"{dtype.kind} output needs an explicit list of allowed values",
            )
            allowed = tuple(make_value(dtype, v) for v in values)
    except TypeMismatch as exc:
        raise SchemaError(f"{pointer}/values", str(exc)) from exc
    try:
        return OutputClause(name, dtype, allowed)
    except ModelError as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_table(obj: Any, pointer: str) -> DecisionTable:
    _expect(isinstance(obj, dict), pointer, "table must be an object")
    name = obj.get("name")
    _expect(isinstance(name, str) and bool(name.strip()), f"{pointer}/name", "missing table name")
    policy = obj.get("hitPolicy", "U")
    if policy not in ("U", "UNIQUE"):
        raise UnsupportedHitPolicy(f"{pointer}/hitPolicy: only the Unique policy is supported, got {policy!r}")

    raw_inputs = obj.get("inputs")
    _expect(isinstance(raw_inputs, list) and raw_inputs, f"{pointer}/inputs", "needs a non-empty input list")
    inputs = []
    for i, item in enumerate(raw_inputs):
        p = f"{pointer}/inputs/{i}"
        _expect(isinstance(item, dict), p, "input must be an object")
        iname = item.get("name")
        _expect(isinstance(iname, str) and bool(iname.strip()), f"{p}/name", "missing input name")
        label = item.get("label") or humanize(iname)
        _expect(isinstance(label, str), f"{p}/label", "label must be a string")
        inputs.append(InputClause(iname, label, _parse_dtype(item, p)))

    output = _parse_output(obj.get("output"), f"{pointer}/output")

    raw_rules = obj.get("rules")
    _expect(isinstance(raw_rules, list) and raw_rules, f"{pointer}/rules", "needs a non-empty rule list")
    rules = []
    for i, item in enumerate(raw_rules):
        p = f"{pointer}/rules/{i}"
        _expect(isinstance(item, dict), p, "rule must be an object")
        when = item.get("when")
        _expect(isinstance(when, list), f"{p}/when", "rule needs a list of cells")
        _expect(
            len(when) == len(inputs),
            p,
            f"rule has {len(when) if isinstance(when, list) else 0} cells, expected {len(inputs)}",
        )
        entries = []
        for j, cell in enumerate(when):
            _expect(isinstance(cell, str), f"{p}/when/{j}", "cell must be a string")
            try:
                entries.append(cells.parse_unary_test(cell, inputs[j].data_type))
            except ModelError as exc:
                raise SchemaError(f"{p}/when/{j}", str(exc)) from exc
        then = item.get("then")
        _expect(isinstance(then, str), f"{p}/then", "rule output must be a literal string")
        try:
            out_value = cells.parse_value_literal(then, output.data_type)
        except ModelError as exc:
            raise SchemaError(f"{p}/then", str(exc)) from exc
        rules.append(Rule(i + 1, tuple(entries), out_value))

    try:
        return DecisionTable(name, "U", tuple(inputs), output, tuple(rules))
    except ModelError as exc:
        raise SchemaError(pointer, str(exc)) from exc


def parse_model_json(document: Union[bytes, str]) -> ModelDocument:
    """Parse the compact JSON model format; validates the resulting model."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from exc
    _expect(isinstance(data, dict), "", "document must be an object")
    raw_tables = data.get("tables")
    _expect(isinstance(raw_tables, list) and raw_tables, "/tables", "needs a non-empty table list")

    tables: dict[str, DecisionTable] = {}
    for i, item in enumerate(raw_tables):
        table = _parse_table(item, f"/tables/{i}")
        _expect(table.name not in tables, f"/tables/{i}/name", f"duplicate table {table.name!r}")
        tables[table.name] = table

    requirements = []
    for i, item in enumerate(data.get("requirements", []) or []):
        p = f"/requirements/{i}"
        _expect(isinstance(item, dict), p, "requirement must be an object")
        for key in ("parent", "input", "child"):
            _expect(isinstance(item.get(key), str), f"{p}/{key}", f"missing {key}")
        mode = item.get("mode", "derive")
        _expect(mode in ("derive", "ask"), f"{p}/mode", f"unknown mode {mode!r}")
        requirements.append(Requirement(item["parent"], item["input"], item["child"], mode))

    model = DecisionModel(tables, tuple(requirements))

    root = data.get("root")
    if root is None:
        child_slugs = {slugify(r.child) for r in requirements}
        candidates = [t.name for t in tables.values() if t.slug not in child_slugs]
        _expect(len(candidates) == 1, "/root", "root is required when it cannot be inferred")
        root = candidates[0]
    _expect(isinstance(root, str), "/root", "root must be a table name")

    try:
        model.table(root)
        warnings = validate_model(model, root)
    except CyclicHierarchy:
        raise
    except ModelError as exc:
        raise SchemaError("", str(exc)) from exc
    return ModelDocument(model, root, tuple(warnings))


def _dtype_fields(dtype: DataTypeSpec) -> dict:
    out: dict[str, Any] = {"type": dtype.kind}
    if dtype.kind == "enumeration":
        out["values"] = list(dtype.enum_values)
    if dtype.numeric_bounds is not None:
        out["bounds"] = list(dtype.numeric_bounds)
    return out


def _table_to_obj(table: DecisionTable) -> dict:
    output = {"name": table.output.name, **_dtype_fields(table.output.data_type)}
    if table.output.data_type.kind != "enumeration":
        output["values"] = [v.payload for v in table.output.allowed_values]
    return {
        "name": table.name,
        "hitPolicy": "U",
        "inputs": [
            {"name": c.name, "label": c.label, **_dtype_fields(c.data_type)} for c in table.inputs
        ],
        "output": output,
        "rules": [
            {
                "when": [cells.unparse_unary_test(t) for t in rule.input_entries],
                "then": cells.render_value_literal(rule.output_entry),
            }
            for rule in table.rules
        ],
    }


def write_model_json(model: DecisionModel, root: Optional[str] = None) -> bytes:
    """Serialize to the compact JSON format; parse(write(m)) == m field-for-field."""
    doc: dict[str, Any] = {"tables": [_table_to_obj(t) for t in model.tables.values()]}
    if model.requirements:
        doc["requirements"] = [
            {"parent": r.parent, "input": r.input, "child": r.child, "mode": r.mode}
            for r in model.requirements
        ]
    if root is not None:
        doc["root"] = root
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def model_digest(model: DecisionModel, root: Optional[str] = None) -> str:
    return hashlib.sha256(write_model_json(model, root)).hexdigest()[:16]


# --- DMN XML subset ----------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(element: ET.Element, name: str) -> list[ET.Element]:
    return [child for child in element if _local(child.tag) == name]


def _child_text(element: ET.Element, name: str) -> Optional[str]:
    for child in _children(element, name):
        return (child.text or "").strip()
    return None


_NUMERIC_TYPEREFS = {"number", "integer", "long", "double", "decimal"}


def _typeref_to_kind(typeref: str) -> str:
    t = typeref.strip().lower()
    if t == "boolean":
        return "boolean"
    if t in _NUMERIC_TYPEREFS:
        return "number"
    return "text"


def _parse_allowed_list(text: str) -> list[str]:
    labels = []
    for part in cells._split_literals(text):
        part = part.strip()
        if len(part) >= 2 and part[0] == '"' and part[-1] == '"':
            part = part[1:-1]
        if part:
            labels.append(part)
    return labels


def _xml_dtype(typeref: str, allowed_text: Optional[str]) -> DataTypeSpec:
    kind = _typeref_to_kind(typeref)
    if kind == "text" and allowed_text:
        return DataTypeSpec("enumeration", tuple(_parse_allowed_list(allowed_text)))
    return DataTypeSpec(kind)


def _parse_xml_table(decision: ET.Element, path: str) -> DecisionTable:
    for bad in ("literalExpression", "invocation", "context", "relation"):
        if _children(decision, bad):
            raise UnsupportedConstruct(f"{path}/{bad}: only decision tables are supported")
    dts = _children(decision, "decisionTable")
    if not dts:
        raise UnsupportedConstruct(f"{path}: decision has no decisionTable")
    dt = dts[0]
    policy = (dt.get("hitPolicy") or "UNIQUE").strip().upper()
    if policy not in ("U", "UNIQUE"):
        raise UnsupportedHitPolicy(f"{path}/decisionTable: hit policy {policy!r} is not supported")

    name = decision.get("name") or decision.get("id") or "decision"

    inputs = []
    for i, input_el in enumerate(_children(dt, "input")):
        exprs = _children(input_el, "inputExpression")
        if not exprs:
            raise XmlError(f"{path}/decisionTable/input[{i}]: missing inputExpression")
        expr = exprs[0]
        iname = _child_text(expr, "text") or input_el.get("label") or f"input{i + 1}"
        label = input_el.get("label") or humanize(iname)
        allowed = None
        for values_el in _children(input_el, "inputValues"):
            allowed = _child_text(values_el, "text")
        inputs.append(InputClause(iname, label, _xml_dtype(expr.get("typeRef", "string"), allowed)))

    outputs = _children(dt, "output")
    if not outputs:
        raise XmlError(f"{path}/decisionTable: missing output")
    out_el = outputs[0]
    out_name = out_el.get("name") or name
    out_allowed = None
    for values_el in _children(out_el, "outputValues"):
        out_allowed = _child_text(values_el, "text")
    out_dtype = _xml_dtype(out_el.get("typeRef", "string"), out_allowed)
    if out_dtype.kind == "enumeration":
        allowed_values = tuple(make_value(out_dtype, v) for v in out_dtype.enum_values)
    elif out_dtype.kind == "boolean":
        allowed_values = (make_value(out_dtype, True), make_value(out_dtype, False))
    elif out_allowed:
        allowed_values = tuple(
            make_value(out_dtype, float(v) if out_dtype.kind == "number" else v)
            for v in _parse_allowed_list(out_allowed)
        )
    else:
        raise UnsupportedConstruct(
            f"{path}/decisionTable/output: {out_dtype.kind} output needs outputValues"
        )
    output = OutputClause(out_name, out_dtype, allowed_values)

    rules = []
    for i, rule_el in enumerate(_children(dt, "rule")):
        p = f"{path}/decisionTable/rule[{i}]"
        entry_texts = [_child_text(e, "text") or "" for e in _children(rule_el, "inputEntry")]
        if len(entry_texts) != len(inputs):
            raise XmlError(f"{p}: {len(entry_texts)} input entries, expected {len(inputs)}")
        try:
            entries = tuple(
                cells.parse_unary_test(text, clause.data_type)
                for text, clause in zip(entry_texts, inputs)
            )
            out_text = _child_text(_children(rule_el, "outputEntry")[0], "text") or ""
            out_value = cells.parse_value_literal(out_text, output.data_type)
        except IndexError as exc:
            raise XmlError(f"{p}: missing outputEntry") from exc
        except ModelError as exc:
            raise XmlError(f"{p}: {exc}") from exc
        rules.append(Rule(i + 1, entries, out_value))

    try:
        return DecisionTable(name, "U", tuple(inputs), output, tuple(rules))
    except ModelError as exc:
        raise XmlError(f"{path}: {exc}") from exc


def parse_dmn_xml(document: Union[bytes, str]) -> ModelDocument:
    """Parse the supported DMN XML subset. Namespace handling is lenient."""
    try:
        root_el = ET.fromstring(document)
    except ET.ParseError as exc:
        raise XmlError(f"malformed XML: {exc}") from exc
    if _local(root_el.tag) != "definitions":
        raise XmlError(f"expected <definitions> document, got <{_local(root_el.tag)}>")

    decisions = _children(root_el, "decision")
    if not decisions:
        raise UnsupportedConstruct("/definitions: no decision elements")

    tables: dict[str, DecisionTable] = {}
    by_id: dict[str, str] = {}
    requirement_refs: list[tuple[str, str]] = []  # (parent table name, child ref)
    for i, decision in enumerate(decisions):
        path = f"/definitions/decision[{i}]"
        table = _parse_xml_table(decision, path)
        tables[table.name] = table
        if decision.get("id"):
            by_id[decision.get("id")] = table.name
        for req in _children(decision, "informationRequirement"):
            for required in _children(req, "requiredDecision"):
                href = (required.get("href") or "").lstrip("#")
                if not href:
                    raise XmlError(f"{path}/informationRequirement: requiredDecision without href")
                requirement_refs.append((table.name, href))

    requirements = []
    for parent_name, ref in requirement_refs:
        child_name = by_id.get(ref)
        if child_name is None:
            for t in tables.values():
                if t.name == ref or t.slug == slugify(ref):
                    child_name = t.name
                    break
        if child_name is None:
            raise XmlError(f"requiredDecision href {ref!r} does not resolve to a decision")
        # the fed input is the parent column matching the child's name or output
        child = tables[child_name]
        parent = tables[parent_name]
        fed = None
        for clause in parent.inputs:
            if clause.slug in (child.slug, slugify(child.output.name)):
                fed = clause
                break
        if fed is None:
            raise UnsupportedConstruct(
                f"decision {parent_name!r} requires {child_name!r} but has no matching input column"
            )
        requirements.append(Requirement(parent_name, fed.name, child_name))

    model = DecisionModel(tables, tuple(requirements))
    child_slugs = {slugify(r.child) for r in requirements}
    roots = [t.name for t in tables.values() if t.slug not in child_slugs]
    root = roots[0] if roots else next(iter(tables))
    warnings = validate_model(model, root)
    return ModelDocument(model, root, tuple(warnings))


def load_model(path: str, model_format: Optional[str] = None) -> ModelDocument:
    """Read a model file; format from the extension unless given explicitly."""
    fmt = model_format
    if fmt is None:
        fmt = "dmn" if str(path).lower().endswith(".dmn") or str(path).lower().endswith(".xml") else "json"
    with open(path, "rb") as fh:
        blob = fh.read()
    if fmt == "dmn":
        return parse_dmn_xml(blob)
    return parse_model_json(blob)
