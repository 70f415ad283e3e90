"""End-to-end compilation: decision model in, fully specified agent out."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from . import __version__
from .agent import (
    AgentSpec,
    compose_agents,
    load_support_catalog,
    with_training_phrases,
)
from .errors import ModelError
from .model import DecisionModel, InputClause, raw_inputs, slugify, validate_model
from .modelio import model_digest
from .phrases import (
    GenerationGrammar,
    build_decision_grammar,
    build_input_grammar,
    build_support_grammar,
    expand_agent,
)

DEFAULT_SEED = 7
DEFAULT_DECISION_BUDGET = 60
DEFAULT_INPUT_BUDGET = 30


@dataclass(frozen=True)
class DecisionUnit:
    """One decision offered by the agent, with everything the runtime needs."""

    slug: str
    root: str
    model: DecisionModel
    param_style: dict[str, str] = field(default_factory=dict)
    prefix: str = ""

    @property
    def label(self) -> str:
        return self.model.table(self.root).label

    @property
    def output_label(self) -> str:
        return self.model.table(self.root).output.label

    def question_order(self) -> list[InputClause]:
        return raw_inputs(self.model, self.root)


@dataclass(frozen=True)
class CompiledAgent:
    agent: AgentSpec
    units: dict[str, DecisionUnit]  # keyed by decision slug, insertion-ordered
    grammars: dict[str, GenerationGrammar]  # keyed by intent name
    responses: dict[str, str]

    def unit_for(self, decision_slug: str) -> DecisionUnit:
        return self.units[decision_slug]


def combined_digest(units: Sequence[DecisionUnit]) -> str:
    h = hashlib.sha256()
    for unit in units:
        h.update(model_digest(unit.model, unit.root).encode())
    return h.hexdigest()[:16]


def compile_agent(
    items: Sequence[tuple[DecisionModel, str]],
    *,
    seed: int = DEFAULT_SEED,
    decision_budget: int = DEFAULT_DECISION_BUDGET,
    input_budget: int = DEFAULT_INPUT_BUDGET,
    param_style: Optional[Mapping[str, str]] = None,
    synonyms: Optional[Mapping[str, Mapping[str, Sequence[str]]]] = None,
) -> CompiledAgent:
    """Run the whole mapping: extraction, entities, intents, phrase grammars,
    and deterministic phrase expansion.

    `param_style` maps input names to "of" or "with" (default "with").
    """
    style = {slugify(k): v for k, v in (param_style or {}).items()}
    for v in style.values():
        if v not in ("of", "with"):
            raise ModelError(f"param style must be 'of' or 'with', got {v!r}")

    multi = len(items) > 1
    units: dict[str, DecisionUnit] = {}
    for model, root in items:
        validate_model(model, root)
        slug = slugify(root)
        prefix = f"{slug}_" if multi else ""
        units[slug] = DecisionUnit(slug, root, model, dict(style), prefix)

    catalog = load_support_catalog()
    agent = compose_agents(
        items,
        synonyms=synonyms,
        metadata={
            "version": __version__,
            "seed": seed,
            "digest": combined_digest(list(units.values())),
            "budgets": {"decision": decision_budget, "input": input_budget},
        },
    )

    entities = {e.name: e for e in agent.entities}
    grammars: dict[str, GenerationGrammar] = {}
    budgets: dict[str, int] = {}
    for unit in units.values():
        grammars[f"{unit.slug}_intent"] = build_decision_grammar(
            unit.model, unit.root, unit.param_style, entities, unit.prefix
        )
        budgets[f"{unit.slug}_intent"] = decision_budget
        for clause in unit.question_order():
            name = f"{unit.prefix}{clause.slug}_intent"
            grammars[name] = build_input_grammar(
                unit.model, unit.root, clause.slug, unit.param_style, entities, unit.prefix
            )
            budgets[name] = input_budget
    for item in catalog["intents"]:
        if item["phrases"]:
            grammars[item["name"]] = build_support_grammar(item["name"], item["phrases"])

    generated = expand_agent(
        {n: g for n, g in grammars.items() if n in budgets}, seed, budgets
    )
    agent = with_training_phrases(agent, generated)
    return CompiledAgent(agent, units, grammars, dict(catalog["responses"]))
