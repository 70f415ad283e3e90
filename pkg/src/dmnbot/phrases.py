"""Chatito-style generation grammars and their deterministic expansion into
annotated training phrases.

A grammar has intent templates, alias blocks (alternative word sequences,
optional at the reference site) and slot blocks (surface forms tagged with the
canonical value they denote). Parameter tails come in two families: of-params
("of an existing customer") and with-params ("with a risk score of 90");
k-permutations of the tail inputs give order freedom.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import BudgetTooSmall, ModelError
from .engine import representative_domain
from .model import DecisionModel, InputClause, Value, raw_inputs, slugify


# --- grammar data model -------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    text: str


@dataclass(frozen=True)
class SlotRef:
    name: str


@dataclass(frozen=True)
class AliasRef:
    name: str
    optional: bool = False
    axis: bool = False  # expansion enumerates this alias exhaustively


Item = Union[Lit, SlotRef, AliasRef]
ItemSeq = tuple[Item, ...]


@dataclass(frozen=True)
class Template:
    items: ItemSeq
    generate: bool = True  # recognition-only templates are excluded from output


@dataclass(frozen=True)
class SlotDef:
    name: str
    parameter: str  # parameter the extracted value fills
    surfaces: tuple[tuple[str, Value], ...]
    open_numeric: bool = False  # recognition also accepts any number token


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    parameter: str
    value: Value


@dataclass(frozen=True)
class AnnotatedPhrase:
    text: str
    spans: tuple[Span, ...] = ()

    def __post_init__(self):
        at = 0
        for span in self.spans:
            if not (at <= span.start < span.end <= len(self.text)):
                raise ModelError(f"span {span} out of order or out of bounds in {self.text!r}")
            at = span.end

    def values(self) -> dict[str, Value]:
        return {s.parameter: s.value for s in self.spans}


@dataclass(frozen=True)
class GenerationGrammar:
    intent_rules: dict[str, tuple[Template, ...]]
    alias_rules: dict[str, tuple[ItemSeq, ...]]
    slot_rules: dict[str, SlotDef]

    def __post_init__(self):
        for name in self.alias_rules:
            self._check_cycle(name, ())
        for templates in self.intent_rules.values():
            for template in templates:
                self._check_refs(template.items)

    def _check_refs(self, items: ItemSeq) -> None:
        for item in items:
            if isinstance(item, SlotRef) and item.name not in self.slot_rules:
                raise ModelError(f"undefined slot {item.name!r}")
            if isinstance(item, AliasRef):
                if item.name not in self.alias_rules:
                    raise ModelError(f"undefined alias {item.name!r}")

    def _check_cycle(self, name: str, stack: tuple[str, ...]) -> None:
        if name in stack:
            raise ModelError(f"alias cycle: {' -> '.join(stack + (name,))}")
        for alt in self.alias_rules[name]:
            self._check_refs(alt)
            for item in alt:
                if isinstance(item, AliasRef):
                    self._check_cycle(item.name, stack + (name,))

    @property
    def intent(self) -> str:
        return next(iter(self.intent_rules))

    def templates(self) -> tuple[Template, ...]:
        return self.intent_rules[self.intent]


# --- surface helpers ----------------------------------------------------------


def _article(label: str) -> str:
    return "an" if label[:1].lower() in "aeiou" else "a"


def _is_age_like(clause: InputClause) -> bool:
    return clause.slug.endswith("age") or clause.label.lower().endswith("age")


def _entity_surfaces(clause: InputClause, entities: Mapping[str, "object"], prefix: str):
    """Surface/value pairs for the bare slot of a boolean or enum input."""
    from .agent import Entity  # local import to avoid a cycle at module load

    entity = entities.get(f"ent_{prefix}{clause.slug}")
    pairs: list[tuple[str, Value]] = []
    if entity is not None:
        for entry in entity.entries:
            for surface in entry.surfaces():
                pairs.append((surface.lower(), entry.reference))
    return tuple(pairs)


def _number_surfaces(model: DecisionModel, root: str, clause: InputClause):
    domain = representative_domain(model, root, clause)
    return tuple((v.render(), v) for v in domain.representatives)


def _slot_for(
    model: DecisionModel,
    root: str,
    clause: InputClause,
    entities: Mapping[str, "object"],
    prefix: str,
) -> SlotDef:
    pname = f"p_{prefix}{clause.slug}"
    kind = clause.data_type.kind
    if kind == "number":
        return SlotDef(pname, pname, _number_surfaces(model, root, clause), open_numeric=True)
    if kind == "text":
        surfaces = tuple(
            (v.render().lower(), v)
            for v in representative_domain(model, root, clause).representatives
        )
        return SlotDef(pname, pname, surfaces)
    surfaces = list(_entity_surfaces(clause, entities, prefix))
    if kind == "boolean":
        # also accept the of-/with-style wordings as direct answers, so a
        # negation like "without currently employed" never loses to a bare
        # label match ("currently employed" alone reads as true); keep the
        # list grouped by truth value so the export's value grouping is
        # order-preserving
        extras = list(_bool_of_slot(clause, prefix).surfaces) + list(
            _bool_with_slot(clause, prefix).surfaces
        )
        grouped: list[tuple[str, Value]] = []
        for flag in (True, False):
            seen: set[str] = set()
            for surface, value in surfaces + extras:
                if value.payload is flag and surface not in seen:
                    seen.add(surface)
                    grouped.append((surface, value))
        surfaces = grouped
    return SlotDef(pname, pname, tuple(surfaces))


def _bool_of_slot(clause: InputClause, prefix: str) -> SlotDef:
    label = clause.label.lower()
    art = _article(label)
    pname = f"p_{prefix}{clause.slug}"
    return SlotDef(
        f"{pname}_of",
        pname,
        (
            (f"{art} {label}", Value("boolean", True)),
            (f"a non {label}", Value("boolean", False)),
            (f"not {art} {label}", Value("boolean", False)),
        ),
    )


def _bool_with_slot(clause: InputClause, prefix: str) -> SlotDef:
    label = clause.label.lower()
    pname = f"p_{prefix}{clause.slug}"
    return SlotDef(
        f"{pname}_with",
        pname,
        (
            (f"with {label}", Value("boolean", True)),
            (f"without {label}", Value("boolean", False)),
        ),
    )


def _value_phrase_alias(clause: InputClause, prefix: str) -> tuple[ItemSeq, ...]:
    """Alternative wordings for "the value of this input is X"."""
    label = clause.label.lower()
    slot = SlotRef(f"p_{prefix}{clause.slug}")
    alts: list[ItemSeq] = [
        (Lit(f"a {label} of"), slot),
        (Lit(f"a value of {label} of"), slot),
        (Lit(f"{label} as"), slot),
    ]
    if _is_age_like(clause):
        alts.insert(0, (slot, Lit("years old")))
    return tuple(alts)


def _of_item(clause: InputClause, prefix: str) -> ItemSeq:
    if clause.data_type.kind == "boolean":
        return (SlotRef(f"p_{prefix}{clause.slug}_of"),)
    if _is_age_like(clause):
        return (SlotRef(f"p_{prefix}{clause.slug}"), Lit("years old"))
    # generic slots are followed by the input name
    return (SlotRef(f"p_{prefix}{clause.slug}"), Lit(clause.label.lower()))


def _with_item(clause: InputClause, prefix: str, lead: bool) -> ItemSeq:
    if clause.data_type.kind == "boolean":
        return (SlotRef(f"p_{prefix}{clause.slug}_with"),)
    head: ItemSeq = (Lit("with"),) if lead else ()
    return head + (AliasRef(f"{clause.slug}_value"),)


JOINER = AliasRef("joiner", optional=True)


def _permutations(group: Sequence[InputClause], cap: int = 96) -> list[tuple[InputClause, ...]]:
    """All k-permutations for k=1..n, deterministically capped: 1-permutations,
    identity and reversed n-permutations always survive."""
    perms: list[tuple[InputClause, ...]] = []
    for k in range(1, len(group) + 1):
        perms.extend(itertools.permutations(group, k))
    if len(perms) <= cap:
        return perms
    keep = [p for p in perms if len(p) == 1]
    identity = tuple(group)
    keep.append(identity)
    reverse = tuple(reversed(group))
    if reverse != identity:
        keep.append(reverse)
    rest = [p for p in perms if p not in keep]
    stride = max(1, len(rest) // max(1, cap - len(keep)))
    keep.extend(rest[::stride][: cap - len(keep)])
    return keep


def _tail_alias(
    group: Sequence[InputClause], item_for, joiner: AliasRef = JOINER
) -> tuple[ItemSeq, ...]:
    alts: list[ItemSeq] = []
    for perm in _permutations(group):
        seq: list[Item] = []
        for i, clause in enumerate(perm):
            if i > 0:
                seq.append(joiner)
            seq.extend(item_for(clause, first=(i == 0)))
        alts.append(tuple(seq))
    return tuple(alts)


# --- grammar builders -----------------------------------------------------------


INIT_PHRASES = (
    "i want to know the",
    "i want to determine the",
    "what is the",
    "tell me the",
    "i would like to know the",
)


def split_param_styles(
    askable: Sequence[InputClause], param_style: Optional[Mapping[str, str]]
) -> tuple[list[InputClause], list[InputClause]]:
    """Split inputs into of-params and with-params; with is the default."""
    styles = {slugify(k): v for k, v in (param_style or {}).items()}
    of_group = [c for c in askable if styles.get(c.slug) == "of"]
    with_group = [c for c in askable if styles.get(c.slug) != "of"]
    return of_group, with_group


def _common_slots(
    model: DecisionModel,
    root: str,
    group: Iterable[InputClause],
    entities: Mapping[str, "object"],
    prefix: str,
    of_slugs: set[str],
) -> tuple[dict[str, SlotDef], dict[str, tuple[ItemSeq, ...]]]:
    slots: dict[str, SlotDef] = {}
    aliases: dict[str, tuple[ItemSeq, ...]] = {"joiner": ((Lit("and"),),)}
    for clause in group:
        base = _slot_for(model, root, clause, entities, prefix)
        slots[base.name] = base
        if clause.data_type.kind == "boolean":
            if clause.slug in of_slugs:
                of = _bool_of_slot(clause, prefix)
                slots[of.name] = of
            else:
                with_ = _bool_with_slot(clause, prefix)
                slots[with_.name] = with_
        elif clause.slug not in of_slugs:
            aliases[f"{clause.slug}_value"] = _value_phrase_alias(clause, prefix)
    return slots, aliases


def build_decision_grammar(
    model: DecisionModel,
    root: str,
    param_style: Optional[Mapping[str, str]] = None,
    entities: Optional[Mapping[str, "object"]] = None,
    prefix: str = "",
) -> GenerationGrammar:
    """Grammar for the decision intent: optional opener, the decision name,
    then optional of-param and with-param tails in either order."""
    from .agent import map_entities

    table = model.table(root)
    askable = raw_inputs(model, root)
    if entities is None:
        entities = {e.name: e for e in map_entities(model, root, prefix=prefix)}
    of_group, with_group = split_param_styles(askable, param_style)
    of_slugs = {c.slug for c in of_group}

    slots, aliases = _common_slots(model, root, askable, entities, prefix, of_slugs)

    decision_names = []
    for label in (table.output.label, table.label):
        if label not in decision_names:
            decision_names.append(label)
    aliases["init"] = tuple((Lit(t),) for t in INIT_PHRASES)
    aliases["decision"] = tuple((Lit(n),) for n in decision_names)

    if of_group:
        aliases["of_params"] = _tail_alias(
            of_group, lambda c, first: ((Lit("of"),) if first else ()) + _of_item(c, prefix)
        )
    if with_group:
        aliases["with_params"] = _tail_alias(
            with_group, lambda c, first: _with_item(c, prefix, lead=first)
        )

    head: ItemSeq = (AliasRef("init", optional=True), AliasRef("decision"))
    of_ref = AliasRef("of_params", axis=True)
    with_ref = AliasRef("with_params", axis=True)
    templates = [Template(head)]
    if of_group:
        templates.append(Template(head + (of_ref,)))
    if with_group:
        templates.append(Template(head + (with_ref,)))
    if of_group and with_group:
        templates.append(Template(head + (of_ref, JOINER, with_ref)))
        templates.append(Template(head + (with_ref, JOINER, of_ref)))

    name = f"{prefix}{table.slug}_intent" if prefix else f"{table.slug}_intent"
    return GenerationGrammar({name: tuple(templates)}, aliases, slots)


def build_input_grammar(
    model: DecisionModel,
    root: str,
    input_name: str,
    param_style: Optional[Mapping[str, str]] = None,
    entities: Optional[Mapping[str, "object"]] = None,
    prefix: str = "",
) -> GenerationGrammar:
    """Grammar for one input intent: the answer to the question, optionally
    followed by values for other inputs. The asked input never appears in its
    own tail."""
    from .agent import map_entities

    askable = raw_inputs(model, root)
    slug = slugify(input_name)
    asked = next((c for c in askable if c.slug == slug), None)
    if asked is None:
        raise ModelError(f"{input_name!r} is not an askable input of {root!r}")
    if entities is None:
        entities = {e.name: e for e in map_entities(model, root, prefix=prefix)}
    others = [c for c in askable if c.slug != slug]
    of_group, with_group = split_param_styles(others, param_style)
    of_slugs = {c.slug for c in of_group}

    slots, aliases = _common_slots(model, root, askable, entities, prefix, of_slugs)

    answer_slot = SlotRef(f"p_{prefix}{slug}")
    answer_alts: list[ItemSeq] = [
        (answer_slot,),
        (Lit("it is"), answer_slot),
        (Lit(f"the {asked.label.lower()} is"), answer_slot),
    ]
    if _is_age_like(asked):
        answer_alts.insert(1, (answer_slot, Lit("years old")))
    aliases["answer"] = tuple(answer_alts)

    def tail_item(clause: InputClause, first: bool) -> ItemSeq:
        if clause.slug in of_slugs:
            # the of-params preposition becomes "it is" in answers
            return (Lit("it is"),) + _of_item(clause, prefix)
        if clause.data_type.kind == "boolean":
            return (SlotRef(f"p_{prefix}{clause.slug}_with"),)
        return (AliasRef(f"{clause.slug}_tail_value"),)

    for clause in with_group:
        if clause.data_type.kind != "boolean":
            aliases[f"{clause.slug}_tail_value"] = (
                (Lit(f"the {clause.label.lower()} is"), SlotRef(f"p_{prefix}{clause.slug}")),
                (Lit("with"), AliasRef(f"{clause.slug}_value")),
            )

    templates = [Template((AliasRef("answer"),))]
    if others:
        tail_ref = AliasRef("tail_params", axis=True)
        aliases["tail_params"] = _tail_alias(others, tail_item)
        templates.append(Template((AliasRef("answer"), JOINER, tail_ref)))
        # recognition only: the user answers some other input than the one asked
        templates.append(Template((tail_ref,), generate=False))

    name = f"{prefix}{slug}_intent"
    return GenerationGrammar({name: tuple(templates)}, aliases, slots)


def build_support_grammar(intent_name: str, phrases: Sequence[str]) -> GenerationGrammar:
    templates = tuple(Template((Lit(p),)) for p in phrases)
    return GenerationGrammar({intent_name: templates}, {}, {})


# --- expansion -------------------------------------------------------------------


class _Counters:
    """Round-robin counters keyed by grammar element; drive deterministic
    instantiation variety."""

    def __init__(self):
        self._state: dict[str, int] = {}

    def next(self, key: str) -> int:
        n = self._state.get(key, 0)
        self._state[key] = n + 1
        return n


AxisChoice = Mapping[str, int]
Point = tuple[int, tuple[tuple[str, int], ...]]  # (template index, sorted axis choices)


def _axis_refs(template: Template) -> list[AliasRef]:
    return [item for item in template.items if isinstance(item, AliasRef) and item.axis]


def _enumerate_points(grammar: GenerationGrammar) -> list[Point]:
    points: list[Point] = []
    for ti, template in enumerate(grammar.templates()):
        if not template.generate:
            continue
        axes = _axis_refs(template)
        if not axes:
            points.append((ti, ()))
            continue
        ranges = [range(len(grammar.alias_rules[a.name])) for a in axes]
        for combo in itertools.product(*ranges):
            points.append((ti, tuple((a.name, c) for a, c in zip(axes, combo))))
    return points


def _mentioned(grammar: GenerationGrammar, point: Point) -> tuple[str, ...]:
    """Parameters mentioned by a template-space point, in surface order."""
    ti, axis_items = point
    choices = dict(axis_items)
    seen: list[str] = []

    def walk(items: ItemSeq) -> None:
        for item in items:
            if isinstance(item, SlotRef):
                param = grammar.slot_rules[item.name].parameter
                if param not in seen:
                    seen.append(param)
            elif isinstance(item, AliasRef):
                if item.axis:
                    if item.name in choices:
                        walk(grammar.alias_rules[item.name][choices[item.name]])
                elif not item.optional:
                    walk(grammar.alias_rules[item.name][0])
                else:
                    pass  # optional non-axis aliases never carry slots here
        return

    walk(grammar.templates()[ti].items)
    return tuple(seen)


def _mandatory_points(grammar: GenerationGrammar, points: Sequence[Point]) -> list[Point]:
    by_seq: dict[tuple[str, ...], Point] = {}
    order: list[str] = []
    for point in points:
        seq = _mentioned(grammar, point)
        by_seq.setdefault(seq, point)
        for param in seq:
            if param not in order:
                order.append(param)

    mandatory: list[Point] = []
    if () in by_seq:
        mandatory.append(by_seq[()])  # the bare zero-parameter phrase
    for param in order:
        if (param,) in by_seq:
            mandatory.append(by_seq[(param,)])
    full = [seq for seq in by_seq if len(seq) == len(order) and len(order) > 1]
    if full:
        identity = min(full, key=lambda s: [order.index(p) for p in s])
        mandatory.append(by_seq[identity])
        reverse = tuple(reversed(identity))
        if reverse in by_seq:
            mandatory.append(by_seq[reverse])
    unique: list[Point] = []
    for p in mandatory:
        if p not in unique:
            unique.append(p)
    return unique


def _instantiate(
    grammar: GenerationGrammar, point: Point, counters: _Counters
) -> AnnotatedPhrase:
    ti, axis_items = point
    choices = dict(axis_items)
    # slot counters are global so the corpus sweeps every surface form once
    # enough phrases draw from a slot; alias and optional counters are
    # namespaced per template-space point so each point cycles its own variety
    ns = f"{ti}:{axis_items}"
    text = ""
    spans: list[Span] = []

    def emit(word: str) -> int:
        nonlocal text
        start = len(text) + 1 if text else 0
        text = f"{text} {word}" if text else word
        return start

    def emit_slot(name: str) -> None:
        slot = grammar.slot_rules[name]
        surface, canonical = slot.surfaces[counters.next(f"slot:{name}") % len(slot.surfaces)]
        start = emit(surface)
        spans.append(Span(start, start + len(surface), slot.parameter, canonical))

    def walk(items: ItemSeq) -> None:
        for item in items:
            if isinstance(item, Lit):
                emit(item.text)
            elif isinstance(item, SlotRef):
                emit_slot(item.name)
            else:
                if item.axis and item.name in choices:
                    walk(grammar.alias_rules[item.name][choices[item.name]])
                    continue
                if item.optional and counters.next(f"{ns}|opt:{item.name}") % 2 == 0:
                    continue  # omitted first, included on the next round
                alts = grammar.alias_rules[item.name]
                walk(alts[counters.next(f"{ns}|alias:{item.name}") % len(alts)])

    walk(grammar.templates()[ti].items)
    return AnnotatedPhrase(text, tuple(spans))


def expand(grammar: GenerationGrammar, seed: int, budget: int) -> list[AnnotatedPhrase]:
    """Deterministic corpus for one intent.

    Mandatory first: the zero-parameter phrase, all 1-permutations, and both
    full permutations (column order and reversed). The remaining budget cycles
    through a seeded shuffle of the other template-space points, varying alias
    and slot choices round-robin. Output is deduplicated by text.
    """
    points = _enumerate_points(grammar)
    mandatory = _mandatory_points(grammar, points)
    if budget < len(mandatory):
        raise BudgetTooSmall(
            f"budget {budget} below the {len(mandatory)} mandatory phrases of {grammar.intent!r}"
        )
    optional = [p for p in points if p not in mandatory]
    rng = random.Random(seed)
    sampled = rng.sample(optional, len(optional)) if optional else []

    counters = _Counters()
    phrases: list[AnnotatedPhrase] = []
    seen: set[str] = set()

    def add(phrase: AnnotatedPhrase) -> None:
        if phrase.text not in seen:
            seen.add(phrase.text)
            phrases.append(phrase)

    for point in mandatory:
        add(_instantiate(grammar, point, counters))
        if len(phrases) >= budget:
            return phrases[:budget]

    rotation = mandatory + sampled
    attempts = 0
    limit = budget * 20
    for point in itertools.cycle(sampled or rotation):
        if len(phrases) >= budget or attempts >= limit:
            break
        attempts += 1
        add(_instantiate(grammar, point, counters))
    return phrases[:budget]


def expand_agent(
    grammars: Mapping[str, GenerationGrammar], seed: int, budgets: Mapping[str, int]
) -> dict[str, list[AnnotatedPhrase]]:
    """Expand every intent grammar with a per-intent derived seed."""
    out: dict[str, list[AnnotatedPhrase]] = {}
    for name in grammars:
        sub_seed = (seed * 1000003 + sum(ord(c) for c in name)) % (2**31)
        out[name] = expand(grammars[name], sub_seed, budgets[name])
    return out
