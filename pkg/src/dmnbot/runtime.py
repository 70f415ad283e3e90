"""Conversational execution of a compiled agent.

The matcher is deterministic: utterances are normalized to tokens, candidate
intents are filtered by the active contexts, and each candidate's generation
grammar doubles as a recognition grammar (slots match entity surface forms or
bare numbers). The reply logic mirrors the compiled action: merge extracted
parameters, ask the first still-necessary missing input, otherwise decide.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .agent import Intent
from .engine import decision, is_necessary, representative_domain
from .errors import EngineError, SessionClosed
from .model import Value, make_value, normalize_number
from .phrases import AliasRef, GenerationGrammar, Lit, SlotRef, Template
from .pipeline import CompiledAgent

_NUMBER_TOKEN = re.compile(r"^\d+(\.\d+)?$")

MIN_COVERAGE = 0.5
KIND_PRIORITY = {"input": 2, "decision": 1, "support": 0}


def normalize(text: str) -> list[str]:
    """Lowercase, strip punctuation, collapse whitespace; dots survive only
    inside numbers."""
    text = text.lower()
    text = re.sub(r"[^a-z0-9.]+", " ", text)
    tokens = []
    for token in text.split():
        token = token.strip(".")
        if token:
            tokens.append(token)
    return tokens


@dataclass(frozen=True)
class MatchResult:
    intent: Intent
    extracted: dict[str, Value]  # input slug -> value
    coverage: float


@dataclass
class BotReply:
    text: str
    asked: Optional[str] = None  # input slug the bot is now waiting for
    decision: Optional[Value] = None
    status: str = "collecting"


@dataclass
class Session:
    id: str
    active_decision: Optional[str] = None  # decision slug
    contexts: dict[str, int] = field(default_factory=dict)  # name -> remaining turns
    collected: dict[str, Value] = field(default_factory=dict)
    transcript: list[tuple[str, str]] = field(default_factory=list)
    status: str = "greeting"
    events: list[dict] = field(default_factory=list)
    decision_value: Optional[Value] = None


class _Matcher:
    """Token matcher for one intent grammar; templates match contiguously,
    unmatched prefix and suffix tokens just lower the coverage."""

    def __init__(self, grammar: GenerationGrammar):
        self.grammar = grammar
        # longest surface first so "an existing customer" beats "existing customer"
        self.surfaces = {
            name: sorted(
                ((s.split(), v) for s, v in slot.surfaces),
                key=lambda pair: -len(pair[0]),
            )
            for name, slot in grammar.slot_rules.items()
        }

    def _seq(self, items: tuple, pos: int, tokens: list[str]) -> Iterator[tuple[int, tuple]]:
        if not items:
            yield pos, ()
            return
        head, rest = items[0], items[1:]
        if isinstance(head, Lit):
            words = head.text.split()
            if tokens[pos : pos + len(words)] == words:
                yield from self._seq(rest, pos + len(words), tokens)
        elif isinstance(head, SlotRef):
            slot = self.grammar.slot_rules[head.name]
            matched_here = []
            for words, value in self.surfaces[head.name]:
                if tokens[pos : pos + len(words)] == words:
                    matched_here.append((len(words), value))
            if slot.open_numeric and pos < len(tokens) and _NUMBER_TOKEN.match(tokens[pos]):
                matched_here.append((1, Value("number", float(tokens[pos]))))
            for length, value in matched_here:
                for end, ext in self._seq(rest, pos + length, tokens):
                    yield end, ((slot.parameter, value),) + ext
        else:  # AliasRef
            if head.optional:
                yield from self._seq(rest, pos, tokens)
            for alt in self.grammar.alias_rules[head.name]:
                for mid, ext1 in self._seq(alt, pos, tokens):
                    for end, ext2 in self._seq(rest, mid, tokens):
                        yield end, ext1 + ext2

    def match(self, tokens: list[str]) -> Optional[tuple[int, dict[str, Value]]]:
        """Best parse as (consumed tokens, extraction), or None."""
        best: Optional[tuple[int, dict[str, Value]]] = None
        for template in self.grammar.templates():
            for start in range(len(tokens)):
                for end, ext in self._seq(template.items, start, tokens):
                    consumed = end - start
                    if consumed <= 0:
                        continue
                    if best is None or consumed > best[0]:
                        best = (consumed, dict(ext))
        return best


class DialogueEngine:
    """Drives sessions for one compiled agent. Engine data is immutable;
    each session is mutated only by its own step calls."""

    def __init__(self, compiled: CompiledAgent):
        self.compiled = compiled
        self.agent = compiled.agent
        self.responses = compiled.responses
        self.matchers = {
            name: _Matcher(grammar) for name, grammar in compiled.grammars.items()
        }
        self._params = {
            intent.name: {p.name: p for p in intent.parameters}
            for intent in self.agent.intents
        }

    # --- replies ------------------------------------------------------------

    def _decisions_text(self) -> str:
        return ", ".join(u.label for u in self.compiled.units.values())

    def greeting(self) -> str:
        return self.responses["greet"].format(decisions=self._decisions_text())

    def _help_text(self) -> str:
        first = next(iter(self.compiled.units.values()))
        example = f"what is the {first.output_label}"
        return self.responses["help"].format(decisions=self._decisions_text(), example=example)

    def _question(self, unit, slug: str) -> str:
        label = self._clause(unit, slug).label
        return self.responses["question"].format(label=label)

    def _clause(self, unit, slug: str):
        for clause in unit.question_order():
            if clause.slug == slug:
                return clause
        raise EngineError(f"unknown input {slug!r}")

    # --- session lifecycle ----------------------------------------------------

    def create_session(self, session_id: str) -> Session:
        session = Session(id=session_id)
        session.transcript.append(("bot", self.greeting()))
        return session

    # --- matching ---------------------------------------------------------------

    def _admissible(self, session: Session, intent: Intent) -> bool:
        if intent.kind == "support":
            return True
        if intent.kind == "decision":
            return session.active_decision in (None, intent.decision)
        return intent.input_contexts <= set(session.contexts)

    def match(self, session: Session, utterance: str) -> Optional[MatchResult]:
        tokens = normalize(utterance)
        if not tokens:
            return None
        best: Optional[tuple[tuple[int, int, int], MatchResult]] = None
        for index, intent in enumerate(self.agent.intents):
            if not self._admissible(session, intent):
                continue
            matcher = self.matchers.get(intent.name)
            if matcher is None:
                continue
            parse = matcher.match(tokens)
            if parse is None:
                continue
            consumed, extraction = parse
            coverage = consumed / len(tokens)
            if coverage < MIN_COVERAGE:
                continue
            extracted: dict[str, Value] = {}
            for pname, value in extraction.items():
                parameter = self._params[intent.name].get(pname)
                if parameter is not None:
                    extracted[parameter.input] = value
            rank = (consumed, KIND_PRIORITY.get(intent.kind, 0), -index)
            if best is None or rank > best[0]:
                best = (rank, MatchResult(intent, extracted, coverage))
        return best[1] if best else None

    # --- the action loop -----------------------------------------------------------

    def step(self, session: Session, utterance: str) -> BotReply:
        if session.status == "closed":
            raise SessionClosed(f"session {session.id} is closed")
        session.transcript.append(("user", utterance))
        result = self.match(session, utterance)
        if result is None:
            reply = self._fallback(session)
        else:
            handler = {
                "greet": self._on_greet,
                "farewell": self._on_farewell,
                "help": self._on_help,
                "run_decision": self._on_decision_turn,
            }[result.intent.action]
            reply = handler(session, result)
        session.transcript.append(("bot", reply.text))
        reply.status = session.status
        return reply

    def _fallback(self, session: Session) -> BotReply:
        awaiting = [c for c in session.contexts if c.startswith("awaiting_")]
        if awaiting and session.active_decision:
            unit = self.compiled.unit_for(session.active_decision)
            slug = self._awaited_slug(session)
            hint = self.responses["fallback_hint_awaiting"].format(
                label=self._clause(unit, slug).label
            )
        else:
            hint = self.responses["fallback_hint_idle"].format(decisions=self._decisions_text())
        session.events.append({"type": "fallback"})
        return BotReply(self.responses["fallback"].format(hint=hint))

    def _on_greet(self, session: Session, result: MatchResult) -> BotReply:
        session.events.append({"type": "greet"})
        return BotReply(self.greeting())

    def _on_farewell(self, session: Session, result: MatchResult) -> BotReply:
        session.status = "closed"
        session.events.append({"type": "farewell"})
        return BotReply(self.responses["farewell"])

    def _on_help(self, session: Session, result: MatchResult) -> BotReply:
        session.events.append({"type": "help"})
        return BotReply(self._help_text())

    def _awaited_slug(self, session: Session) -> Optional[str]:
        for intent in self.agent.intents:
            if intent.kind != "input" or intent.decision != session.active_decision:
                continue
            if intent.input_contexts <= set(session.contexts):
                return intent.input
        return None

    def _on_decision_turn(self, session: Session, result: MatchResult) -> BotReply:
        intent = result.intent
        unit = self.compiled.unit_for(intent.decision)
        if intent.kind == "decision" and session.active_decision != intent.decision:
            session.active_decision = intent.decision
            session.collected = {}
            session.status = "collecting"
            session.contexts[f"{intent.decision}_ctx"] = -1

        # the awaiting context lives exactly one matched turn
        for name in [c for c in session.contexts if c.startswith("awaiting_")]:
            del session.contexts[name]

        out_of_range: list[str] = []
        for slug, value in result.extracted.items():
            clause = self._clause(unit, slug)
            bounds = clause.data_type.numeric_bounds
            if value.kind == "number" and bounds is not None:
                low, high = bounds
                if not (low <= value.payload <= high):
                    out_of_range.append(slug)
                    continue
            session.collected[slug] = make_value(clause.data_type, value.payload)

        session.events.append(
            {
                "type": "turn",
                "intent": intent.name,
                "extracted": {k: v.render() for k, v in result.extracted.items()},
            }
        )

        if out_of_range:
            slug = out_of_range[0]
            clause = self._clause(unit, slug)
            low, high = clause.data_type.numeric_bounds
            session.contexts[f"awaiting_{unit.prefix}{slug}"] = 1
            session.events.append({"type": "range_reask", "input": slug})
            return BotReply(
                self.responses["range_reask"].format(label=clause.label, low=low, high=high),
                asked=slug,
            )

        return self._ask_or_decide(session, unit)

    def _ask_or_decide(self, session: Session, unit) -> BotReply:
        try:
            return self._ask_or_decide_unchecked(session, unit)
        except EngineError as exc:
            # a defective table (e.g. a Unique violation) surfaces politely
            session.events.append({"type": "error", "error": f"{type(exc).__name__}: {exc}"})
            return BotReply(
                "I am sorry, something went wrong while evaluating the decision. "
                "Please check the decision model."
            )

    def _ask_or_decide_unchecked(self, session: Session, unit) -> BotReply:
        for clause in unit.question_order():
            if clause.slug in session.collected:
                continue
            if is_necessary(unit.model, unit.root, clause.slug, session.collected):
                session.contexts[f"awaiting_{unit.prefix}{clause.slug}"] = 1
                session.events.append(
                    {
                        "type": "ask",
                        "decision": unit.slug,
                        "input": clause.slug,
                        "collected": {k: v.render() for k, v in session.collected.items()},
                    }
                )
                return BotReply(self._question(unit, clause.slug), asked=clause.slug)

        value = decision(unit.model, unit.root, session.collected)
        session.status = "decided"
        session.decision_value = value
        session.active_decision = None
        session.contexts = {}
        session.events.append({"type": "decide", "decision": unit.slug, "value": value.render()})
        return BotReply(
            self.responses["decided"].format(decision=unit.output_label, value=value.render()),
            decision=value,
        )


def replay(engine: DialogueEngine, script: list[str], session_id: str = "script") -> str:
    """Run a scripted conversation; returns the formatted transcript."""
    session = engine.create_session(session_id)
    for line in script:
        if session.status == "closed":
            break
        engine.step(session, line)
    return format_transcript(session)


def format_transcript(session: Session) -> str:
    return "\n".join(f"{speaker}: {text}" for speaker, text in session.transcript) + "\n"
