"""Serialize compiled agents: Chatito grammar files and the agent bundle.

The bundle is a plain directory (or zip) with a documented JSON schema:

    agent.json            metadata, decision index, response templates
    models/<slug>.json    compact model JSON per decision
    entities/<name>.json  entity entries with synonyms
    intents/<name>.json   contexts, parameters, training phrases, grammar

Both exports are deterministic byte-for-byte for identical inputs and seed.
"""

from __future__ import annotations

import json
import re
import zipfile
from pathlib import Path
from typing import Optional, Union

from .agent import AgentSpec, Entity, EntityEntry, Intent, Parameter
from .errors import LoadError, ModelError
from .model import Value, normalize_number
from .modelio import parse_model_json, write_model_json
from .phrases import (
    AliasRef,
    AnnotatedPhrase,
    GenerationGrammar,
    Item,
    Lit,
    SlotDef,
    SlotRef,
    Span,
    Template,
)
from .pipeline import CompiledAgent, DecisionUnit

AXIS_ALIASES = {"of_params", "with_params", "tail_params"}

_NUMBER_RE = re.compile(r"^-?\d+(\.\d+)?$")


# --- chatito ---------------------------------------------------------------------


def _render_item(item: Item) -> str:
    if isinstance(item, Lit):
        return item.text
    if isinstance(item, SlotRef):
        return f"@[{item.name}]"
    return f"~[{item.name}?]" if item.optional else f"~[{item.name}]"


def export_chatito(grammar: GenerationGrammar) -> str:
    """One intent's grammar in Chatito notation. Recognition-only templates
    are runtime artifacts and are not exported."""
    lines: list[str] = [f"%[{grammar.intent}]"]
    for template in grammar.templates():
        if template.generate:
            lines.append("    " + " ".join(_render_item(i) for i in template.items))
    for name, alts in grammar.alias_rules.items():
        lines.append("")
        lines.append(f"~[{name}]")
        for alt in alts:
            lines.append("    " + " ".join(_render_item(i) for i in alt))
    for name, slot in grammar.slot_rules.items():
        if slot.open_numeric or all(v.kind in ("number", "text") for _, v in slot.surfaces):
            lines.append("")
            lines.append(f"@[{name}]")
            for surface, _ in slot.surfaces:
                lines.append(f"    {surface}")
        else:
            groups: dict[str, list[str]] = {}
            for surface, value in slot.surfaces:
                groups.setdefault(value.render(), []).append(surface)
            for literal, surfaces in groups.items():
                lines.append("")
                lines.append(f"@[{name}#{literal}]")
                for surface in surfaces:
                    lines.append(f"    {surface}")
    return "\n".join(lines) + "\n"


_REF_RE = re.compile(r"([~@])\[([^\]\?#]+)(#[^\]\?]+)?(\?)?\]")


def _parse_chatito_line(line: str) -> tuple[Item, ...]:
    items: list[Item] = []
    pos = 0
    words: list[str] = []

    def flush() -> None:
        if words:
            items.append(Lit(" ".join(words)))
            words.clear()

    for token in line.split():
        m = _REF_RE.fullmatch(token)
        if m is None:
            words.append(token)
            continue
        flush()
        sigil, name, _, optional = m.groups()
        if sigil == "@":
            items.append(SlotRef(name))
        else:
            items.append(AliasRef(name, optional=bool(optional), axis=name in AXIS_ALIASES))
    flush()
    return tuple(items)


def _slot_parameter(name: str) -> str:
    for suffix in ("_of", "_with"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return name


def _variation_value(literal: Optional[str], surface: str) -> Value:
    if literal is None:
        if _NUMBER_RE.match(surface):
            return Value("number", float(surface))
        return Value("text", surface)
    if literal in ("true", "false"):
        return Value("boolean", literal == "true")
    if _NUMBER_RE.match(literal):
        return Value("number", float(literal))
    return Value("enumeration", literal)


def parse_chatito(text: str) -> GenerationGrammar:
    """Reader for the exported Chatito subset; used for the round-trip check."""
    intent: Optional[str] = None
    templates: list[Template] = []
    aliases: dict[str, list[tuple[Item, ...]]] = {}
    slot_surfaces: dict[str, list[tuple[str, Optional[str]]]] = {}
    target: Optional[tuple[str, str, Optional[str]]] = None  # (kind, name, variation)

    for raw in text.splitlines():
        if not raw.strip():
            continue
        if raw.startswith("    "):
            if target is None:
                raise ModelError("chatito: indented line outside a block")
            kind, name, variation = target
            if kind == "%":
                templates.append(Template(_parse_chatito_line(raw.strip())))
            elif kind == "~":
                aliases.setdefault(name, []).append(_parse_chatito_line(raw.strip()))
            else:
                slot_surfaces.setdefault(name, []).append((raw.strip(), variation))
            continue
        header = re.fullmatch(r"([%~@])\[([^\]#]+)(#([^\]]+))?\]", raw.strip())
        if header is None:
            raise ModelError(f"chatito: bad header line {raw!r}")
        sigil, name, _, variation = header.groups()
        if sigil == "%":
            intent = name
            target = ("%", name, None)
        elif sigil == "~":
            target = ("~", name, None)
        else:
            target = ("@", name, variation)

    if intent is None:
        raise ModelError("chatito: no intent block")
    slots: dict[str, SlotDef] = {}
    for name, pairs in slot_surfaces.items():
        surfaces = tuple((s, _variation_value(v, s)) for s, v in pairs)
        open_numeric = all(value.kind == "number" for _, value in surfaces)
        slots[name] = SlotDef(name, _slot_parameter(name), surfaces, open_numeric)
    return GenerationGrammar(
        {intent: tuple(templates)},
        {name: tuple(alts) for name, alts in aliases.items()},
        slots,
    )


def generative_view(grammar: GenerationGrammar) -> GenerationGrammar:
    """The grammar with recognition-only templates removed (what gets exported)."""
    return GenerationGrammar(
        {grammar.intent: tuple(t for t in grammar.templates() if t.generate)},
        grammar.alias_rules,
        grammar.slot_rules,
    )


# --- JSON codecs -------------------------------------------------------------------


def value_to_json(value: Value) -> dict:
    return {"kind": value.kind, "value": value.payload}


def value_from_json(obj: dict) -> Value:
    kind, payload = obj["kind"], obj["value"]
    if kind == "number":
        payload = normalize_number(payload)
    return Value(kind, payload)


def _item_to_json(item: Item) -> dict:
    if isinstance(item, Lit):
        return {"lit": item.text}
    if isinstance(item, SlotRef):
        return {"slot": item.name}
    return {"alias": item.name, "optional": item.optional, "axis": item.axis}


def _item_from_json(obj: dict) -> Item:
    if "lit" in obj:
        return Lit(obj["lit"])
    if "slot" in obj:
        return SlotRef(obj["slot"])
    return AliasRef(obj["alias"], obj.get("optional", False), obj.get("axis", False))


def grammar_to_json(grammar: GenerationGrammar) -> dict:
    return {
        "intent": grammar.intent,
        "templates": [
            {"items": [_item_to_json(i) for i in t.items], "generate": t.generate}
            for t in grammar.templates()
        ],
        "aliases": {
            name: [[_item_to_json(i) for i in alt] for alt in alts]
            for name, alts in grammar.alias_rules.items()
        },
        "slots": {
            name: {
                "parameter": slot.parameter,
                "openNumeric": slot.open_numeric,
                "surfaces": [[s, value_to_json(v)] for s, v in slot.surfaces],
            }
            for name, slot in grammar.slot_rules.items()
        },
    }


def grammar_from_json(obj: dict) -> GenerationGrammar:
    templates = tuple(
        Template(tuple(_item_from_json(i) for i in t["items"]), t.get("generate", True))
        for t in obj["templates"]
    )
    aliases = {
        name: tuple(tuple(_item_from_json(i) for i in alt) for alt in alts)
        for name, alts in obj["aliases"].items()
    }
    slots = {
        name: SlotDef(
            name,
            s["parameter"],
            tuple((surface, value_from_json(v)) for surface, v in s["surfaces"]),
            s.get("openNumeric", False),
        )
        for name, s in obj["slots"].items()
    }
    return GenerationGrammar({obj["intent"]: templates}, aliases, slots)


def _phrase_to_json(phrase: AnnotatedPhrase) -> dict:
    return {
        "text": phrase.text,
        "spans": [
            {"start": s.start, "end": s.end, "parameter": s.parameter, "value": value_to_json(s.value)}
            for s in phrase.spans
        ],
    }


def _phrase_from_json(obj: dict) -> AnnotatedPhrase:
    return AnnotatedPhrase(
        obj["text"],
        tuple(
            Span(s["start"], s["end"], s["parameter"], value_from_json(s["value"]))
            for s in obj["spans"]
        ),
    )


def _intent_to_json(intent: Intent, grammar: Optional[GenerationGrammar]) -> dict:
    return {
        "name": intent.name,
        "kind": intent.kind,
        "inputContexts": sorted(intent.input_contexts),
        "outputContexts": sorted(intent.output_contexts),
        "action": intent.action,
        "decision": intent.decision,
        "input": intent.input,
        "parameters": [
            {"name": p.name, "entity": p.entity, "required": p.required, "input": p.input}
            for p in intent.parameters
        ],
        "trainingPhrases": [_phrase_to_json(p) for p in intent.training_phrases],
        "grammar": grammar_to_json(grammar) if grammar is not None else None,
    }


def _intent_from_json(obj: dict) -> tuple[Intent, Optional[GenerationGrammar]]:
    intent = Intent(
        name=obj["name"],
        kind=obj["kind"],
        input_contexts=frozenset(obj["inputContexts"]),
        output_contexts=frozenset(obj["outputContexts"]),
        parameters=tuple(
            Parameter(p["name"], p["entity"], p["required"], p["input"])
            for p in obj["parameters"]
        ),
        training_phrases=tuple(_phrase_from_json(p) for p in obj["trainingPhrases"]),
        action=obj["action"],
        decision=obj.get("decision"),
        input=obj.get("input"),
    )
    grammar = grammar_from_json(obj["grammar"]) if obj.get("grammar") else None
    return intent, grammar


def _entity_to_json(entity: Entity) -> dict:
    return {
        "name": entity.name,
        "entries": [
            {"value": value_to_json(e.reference), "synonyms": list(e.synonyms)}
            for e in entity.entries
        ],
    }


def _entity_from_json(obj: dict) -> Entity:
    return Entity(
        obj["name"],
        tuple(
            EntityEntry(value_from_json(e["value"]), tuple(e["synonyms"]))
            for e in obj["entries"]
        ),
    )


# --- agent bundle ---------------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def bundle_files(compiled: CompiledAgent) -> dict[str, str]:
    """All bundle files as {relative path: content}, deterministically ordered."""
    agent = compiled.agent
    files: dict[str, str] = {}
    files["agent.json"] = _dumps(
        {
            "metadata": agent.metadata,
            "decisions": [
                {
                    "slug": unit.slug,
                    "root": unit.root,
                    "label": unit.label,
                    "outputLabel": unit.output_label,
                    "paramStyle": unit.param_style,
                    "prefix": unit.prefix,
                }
                for unit in compiled.units.values()
            ],
            "responses": compiled.responses,
            # declaration order matters: the matcher breaks ties by it
            "intentOrder": [it.name for it in agent.intents],
            "entityOrder": [e.name for e in agent.entities],
        }
    )
    for unit in compiled.units.values():
        files[f"models/{unit.slug}.json"] = write_model_json(unit.model, unit.root).decode()
    for entity in agent.entities:
        files[f"entities/{entity.name}.json"] = _dumps(_entity_to_json(entity))
    for intent in agent.intents:
        grammar = compiled.grammars.get(intent.name)
        files[f"intents/{intent.name}.json"] = _dumps(_intent_to_json(intent, grammar))
    return dict(sorted(files.items()))


def export_agent_bundle(
    compiled: CompiledAgent, out: Union[str, Path], as_zip: bool = False
) -> Path:
    """Write the bundle as a directory tree or a single zip file."""
    out = Path(out)
    files = bundle_files(compiled)
    if as_zip:
        out = out if out.suffix == ".zip" else out.with_suffix(".zip")
        out.parent.mkdir(parents=True, exist_ok=True)
        with zipfile.ZipFile(out, "w", zipfile.ZIP_DEFLATED) as zf:
            for name, content in files.items():
                info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                info.compress_type = zipfile.ZIP_DEFLATED
                zf.writestr(info, content)
        return out
    for name, content in files.items():
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    return out


def _read_bundle_files(path: Path) -> dict[str, str]:
    if path.is_file() and path.suffix == ".zip":
        files: dict[str, str] = {}
        with zipfile.ZipFile(path) as zf:
            for name in zf.namelist():
                files[name] = zf.read(name).decode("utf-8")
        return files
    if not path.is_dir():
        raise LoadError(f"bundle {path} is neither a directory nor a zip file")
    files = {}
    for item in path.rglob("*"):
        if item.is_file():
            files[item.relative_to(path).as_posix()] = item.read_text(encoding="utf-8")
    return files


def load_agent_bundle(path: Union[str, Path]) -> CompiledAgent:
    """Load a bundle back into a CompiledAgent; behaviorally identical to the
    pre-export agent. Raises LoadError naming any dangling reference."""
    files = _read_bundle_files(Path(path))
    if "agent.json" not in files:
        raise LoadError("bundle is missing agent.json")
    head = json.loads(files["agent.json"])

    units: dict[str, DecisionUnit] = {}
    for entry in head["decisions"]:
        key = f"models/{entry['slug']}.json"
        if key not in files:
            raise LoadError(f"bundle is missing {key}")
        doc = parse_model_json(files[key])
        units[entry["slug"]] = DecisionUnit(
            entry["slug"], entry["root"], doc.model, dict(entry["paramStyle"]), entry["prefix"]
        )

    entities = []
    for name, content in sorted(files.items()):
        if name.startswith("entities/"):
            entities.append(_entity_from_json(json.loads(content)))
    intents = []
    grammars: dict[str, GenerationGrammar] = {}
    for name, content in sorted(files.items()):
        if name.startswith("intents/"):
            intent, grammar = _intent_from_json(json.loads(content))
            intents.append(intent)
            if grammar is not None:
                grammars[intent.name] = grammar

    entity_names = {e.name for e in entities}
    for intent in intents:
        for p in intent.parameters:
            if not p.entity.startswith("sys.") and p.entity not in entity_names:
                raise LoadError(
                    f"intent {intent.name!r} references missing entity {p.entity!r}"
                )

    # restore the original declaration order; the matcher breaks ties by it
    intent_order = {name: i for i, name in enumerate(head.get("intentOrder", []))}
    entity_order = {name: i for i, name in enumerate(head.get("entityOrder", []))}
    missing = [n for n in intent_order if n not in {it.name for it in intents}]
    if missing:
        raise LoadError(f"bundle is missing intent files for {missing}")
    intents.sort(key=lambda it: intent_order.get(it.name, len(intent_order)))
    entities.sort(key=lambda e: entity_order.get(e.name, len(entity_order)))
    agent = AgentSpec(
        decisions=tuple(entry["root"] for entry in head["decisions"]),
        entities=tuple(entities),
        intents=tuple(intents),
        metadata=head["metadata"],
    )
    try:
        agent.check()
    except Exception as exc:
        raise LoadError(str(exc)) from exc
    return CompiledAgent(agent, units, grammars, dict(head["responses"]))
