"""Compile a decision model into the chatbot agent data model:
entities, decision/input/support intents, contexts, and parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Mapping, Optional, Sequence

from .errors import DuplicateDecisionName, NameClash
from .model import DecisionModel, InputClause, Value, make_value, raw_inputs, slugify
from .phrases import AnnotatedPhrase

VOWELS = "aeiou"

BUILTIN_NUMBER = "sys.number"
BUILTIN_TEXT = "sys.text"


def article(label: str) -> str:
    return "an" if label[:1].lower() in VOWELS else "a"


def boolean_synonyms(label: str) -> dict[bool, list[str]]:
    """Default synonym scheme for a boolean input: yes/ok plus the input name
    and its negations."""
    label = label.lower()
    art = article(label)
    return {
        True: ["yes", "ok", "correct", label, f"{art} {label}", f"with {art} {label}"],
        False: ["no", f"non {label}", f"not {art} {label}", f"without {art} {label}"],
    }


@dataclass(frozen=True)
class EntityEntry:
    reference: Value
    synonyms: tuple[str, ...] = ()

    def surfaces(self) -> list[str]:
        return [self.reference.render().lower(), *self.synonyms]


@dataclass(frozen=True)
class Entity:
    name: str
    entries: tuple[EntityEntry, ...]


@dataclass(frozen=True)
class Parameter:
    name: str
    entity: str  # entity name or a builtin recognizer kind
    required: bool
    input: str  # slug of the input this parameter fills


@dataclass(frozen=True)
class Intent:
    name: str
    kind: str  # decision | input | support
    input_contexts: frozenset[str] = frozenset()
    output_contexts: frozenset[str] = frozenset()
    parameters: tuple[Parameter, ...] = ()
    training_phrases: tuple[AnnotatedPhrase, ...] = ()
    action: str = ""
    decision: Optional[str] = None  # owning decision slug, None for support intents
    input: Optional[str] = None  # asked input slug, input intents only


@dataclass(frozen=True)
class AgentSpec:
    decisions: tuple[str, ...]  # root table names, one per supported decision
    entities: tuple[Entity, ...]
    intents: tuple[Intent, ...]
    metadata: dict

    def intent(self, name: str) -> Intent:
        for it in self.intents:
            if it.name == name:
                return it
        raise KeyError(name)

    def entity(self, name: str) -> Entity:
        for e in self.entities:
            if e.name == name:
                return e
        raise KeyError(name)

    def check(self) -> None:
        """Referential integrity: unique names, declared entities, known contexts."""
        names = [it.name for it in self.intents]
        if len(set(names)) != len(names):
            raise NameClash(f"duplicate intent names in agent: {sorted(names)}")
        entity_names = {e.name for e in self.entities}
        produced = {c for it in self.intents for c in it.output_contexts}
        runtime_contexts = set()
        for it in self.intents:
            if it.kind == "input" and it.input is not None:
                runtime_contexts.update(it.input_contexts)
        for it in self.intents:
            for p in it.parameters:
                if p.entity not in entity_names and p.entity not in (BUILTIN_NUMBER, BUILTIN_TEXT):
                    raise NameClash(f"intent {it.name!r} references unknown entity {p.entity!r}")
            for ctx in it.input_contexts:
                if ctx not in produced and ctx not in runtime_contexts:
                    raise NameClash(f"intent {it.name!r} consumes unproduced context {ctx!r}")


SynonymSidecar = Mapping[str, Mapping[str, Sequence[str]]]


def map_entities(
    model: DecisionModel, root: str, synonyms: Optional[SynonymSidecar] = None, prefix: str = ""
) -> list[Entity]:
    """One entity per non-numeric askable input; numbers use the built-in
    recognizer. Booleans get the default synonym scheme, enumerations get
    none unless a sidecar provides them."""
    sidecar = {slugify(k): v for k, v in (synonyms or {}).items()}
    out: list[Entity] = []
    for clause in raw_inputs(model, root):
        dtype = clause.data_type
        if dtype.kind in ("number", "text"):
            continue
        extra = sidecar.get(clause.slug, {})
        entries = []
        if dtype.kind == "boolean":
            defaults = boolean_synonyms(clause.label)
            for flag in (True, False):
                syns = list(defaults[flag])
                syns += [s for s in extra.get(str(flag).lower(), []) if s not in syns]
                entries.append(EntityEntry(Value("boolean", flag), tuple(syns)))
        else:
            for label in dtype.enum_values:
                syns = tuple(extra.get(label, ()))
                entries.append(EntityEntry(make_value(dtype, label), syns))
        out.append(Entity(f"ent_{prefix}{clause.slug}", tuple(entries)))
    return out


def _parameter_for(clause: InputClause, required: bool, prefix: str) -> Parameter:
    kind = clause.data_type.kind
    if kind == "number":
        entity = BUILTIN_NUMBER
    elif kind == "text":
        entity = BUILTIN_TEXT
    else:
        entity = f"ent_{prefix}{clause.slug}"
    return Parameter(f"p_{prefix}{clause.slug}", entity, required, clause.slug)


def load_support_catalog() -> dict:
    blob = resources.files("dmnbot").joinpath("data/support_intents.json").read_text("utf-8")
    return json.loads(blob)


def support_intents(catalog: Optional[dict] = None) -> list[Intent]:
    """Model-independent intents, reusable across every decision chatbot."""
    catalog = catalog or load_support_catalog()
    out = []
    for item in catalog["intents"]:
        phrases = tuple(AnnotatedPhrase(p, ()) for p in item["phrases"])
        out.append(
            Intent(item["name"], "support", training_phrases=phrases, action=item["action"])
        )
    return out


def map_intents(model: DecisionModel, root: str, prefix: str = "") -> list[Intent]:
    """Decision intent plus one input intent per askable input, plus the
    support catalog. Training phrases are attached later by the generator."""
    table = model.table(root)
    askable = raw_inputs(model, root)
    ctx = f"{table.slug}_ctx"
    params = [_parameter_for(c, False, prefix) for c in askable]

    intents = [
        Intent(
            name=f"{table.slug}_intent",
            kind="decision",
            output_contexts=frozenset({ctx}),
            parameters=tuple(params),
            action="run_decision",
            decision=table.slug,
        )
    ]
    for clause in askable:
        own = [
            _parameter_for(c, required=(c.slug == clause.slug), prefix=prefix) for c in askable
        ]
        intents.append(
            Intent(
                name=f"{prefix}{clause.slug}_intent",
                kind="input",
                input_contexts=frozenset({f"awaiting_{prefix}{clause.slug}", ctx}),
                parameters=tuple(own),
                action="run_decision",
                decision=table.slug,
                input=clause.slug,
            )
        )
    intents.extend(support_intents())
    names = [it.name for it in intents]
    if len(set(names)) != len(names):
        raise NameClash(f"generated intent names collide: {sorted(names)}")
    return intents


def compose_agents(
    items: Sequence[tuple[DecisionModel, str]],
    synonyms: Optional[SynonymSidecar] = None,
    metadata: Optional[dict] = None,
) -> AgentSpec:
    """Merge one agent per (model, root) into a single AgentSpec.

    With more than one decision, every model-derived name is prefixed with the
    decision slug so independent decisions cannot clash; decision intents stay
    the only context-free intents either way.
    """
    if not items:
        raise DuplicateDecisionName("at least one decision is required")
    slugs = [slugify(root) for _, root in items]
    if len(set(slugs)) != len(slugs):
        raise DuplicateDecisionName(f"duplicate decision names: {sorted(slugs)}")

    multi = len(items) > 1
    entities: list[Entity] = []
    intents: list[Intent] = []
    for model, root in items:
        prefix = f"{slugify(root)}_" if multi else ""
        entities.extend(map_entities(model, root, synonyms, prefix))
        for intent in map_intents(model, root, prefix):
            if intent.kind == "support" and any(i.name == intent.name for i in intents):
                continue  # the catalog is shared, add once
            intents.append(intent)

    agent = AgentSpec(
        decisions=tuple(root for _, root in items),
        entities=tuple(entities),
        intents=tuple(intents),
        metadata=dict(metadata or {}),
    )
    agent.check()
    return agent


def with_training_phrases(
    agent: AgentSpec, phrases: Mapping[str, Sequence[AnnotatedPhrase]]
) -> AgentSpec:
    """Return a copy of the agent with generated phrases attached per intent."""
    updated = tuple(
        replace(it, training_phrases=tuple(phrases.get(it.name, it.training_phrases)))
        for it in agent.intents
    )
    return replace(agent, intents=updated)
