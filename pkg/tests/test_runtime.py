from __future__ import annotations

import itertools

import pytest

from dmnbot.engine import is_necessary
from dmnbot.errors import SessionClosed
from dmnbot.model import Assignment, Value
from dmnbot.runtime import DialogueEngine, normalize, replay


def test_normalize_strips_punctuation_keeps_decimals():
    assert normalize("What is the Risk Score?!") == ["what", "is", "the", "risk", "score"]
    assert normalize("37, and 12.5.") == ["37", "and", "12.5"]
    assert normalize("non-existing customer") == ["non", "existing", "customer"]


# --- match ---------------------------------------------------------------------


def test_match_decision_intent_with_two_parameters(risk_engine):
    session = risk_engine.create_session("s")
    result = risk_engine.match(
        session, "What is the risk category of an existing customer with a risk score of 35"
    )
    assert result.intent.name == "riskcategory_intent"
    assert result.extracted == {
        "existingcustomer": Value("boolean", True),
        "applicationriskscore": Value("number", 35),
    }
    assert result.coverage == 1.0


def test_match_greeting(risk_engine):
    session = risk_engine.create_session("s")
    result = risk_engine.match(session, "hello")
    assert result.intent.name == "greeting"


def test_match_awaiting_input_intent_with_extra_value(risk_engine):
    session = risk_engine.create_session("s")
    risk_engine.step(session, "risk category")
    session.contexts.pop("awaiting_existingcustomer", None)
    session.contexts["awaiting_creditscore"] = 1
    result = risk_engine.match(session, "it is 37 and the risk score is 47")
    assert result.intent.name == "creditscore_intent"
    assert result.extracted == {
        "creditscore": Value("number", 37),
        "applicationriskscore": Value("number", 47),
    }


def test_input_intents_blocked_without_context(risk_engine):
    session = risk_engine.create_session("s")
    assert risk_engine.match(session, "it is 37") is None


def test_nonsense_gives_no_match(risk_engine):
    session = risk_engine.create_session("s")
    assert risk_engine.match(session, "the weather is lovely today") is None


def test_bare_value_binds_to_awaited_input(risk_engine):
    session = risk_engine.create_session("s")
    risk_engine.step(session, "risk category")  # asks ExistingCustomer
    result = risk_engine.match(session, "yes")
    assert result.intent.name == "existingcustomer_intent"
    assert result.extracted == {"existingcustomer": Value("boolean", True)}


# --- step / conversation flows -----------------------------------------------------


def script_replies(engine, lines):
    session = engine.create_session("t")
    replies = []
    for line in lines:
        replies.append(engine.step(session, line))
    return session, replies


def test_fig4_flow_never_asks_credit_score(risk_engine):
    session, replies = script_replies(
        risk_engine, ["hello", "I want to know the risk category", "yes", "50"]
    )
    assert session.status == "decided"
    assert session.decision_value == Value("enumeration", "LOW")
    questions = [e for e in session.events if e["type"] == "ask"]
    assert [q["input"] for q in questions] == ["existingcustomer", "applicationriskscore"]
    assert all(q["input"] != "creditscore" for q in questions)


def test_one_shot_decision_single_bot_turn(risk_engine):
    session, replies = script_replies(
        risk_engine,
        ["What is the risk category of an existing customer with a risk score of 35"],
    )
    assert session.status == "decided"
    assert replies[-1].decision == Value("enumeration", "LOW")
    assert not [e for e in session.events if e["type"] == "ask"]


def test_answering_a_different_input_stores_it_and_moves_on(risk_engine):
    session, replies = script_replies(
        risk_engine, ["risk category", "the credit score is 700"]
    )
    # credit score stored even though existing customer was asked
    assert session.collected["creditscore"] == Value("number", 700)
    assert replies[-1].asked == "existingcustomer"


def test_required_parameter_reask_same_question(risk_engine):
    session, replies = script_replies(risk_engine, ["risk category", "risk category"])
    assert replies[0].asked == "existingcustomer"
    assert replies[1].asked == "existingcustomer"


def test_out_of_range_number_triggers_range_reask(risk_engine):
    session, replies = script_replies(risk_engine, ["risk category", "yes", "999"])
    assert "between 0 and 200" in replies[-1].text
    assert "applicationriskscore" not in session.collected
    # and the conversation recovers
    reply = risk_engine.step(session, "50")
    assert reply.decision == Value("enumeration", "LOW")


def test_fallback_leaves_state_unchanged(risk_engine):
    session, _ = script_replies(risk_engine, ["risk category", "yes"])
    before = (dict(session.contexts), dict(session.collected), session.status)
    reply = risk_engine.step(session, "blah blah nothing")
    after = (dict(session.contexts), dict(session.collected), session.status)
    assert before == after
    assert reply.text.startswith("Sorry")
    assert "Risk Score" in reply.text  # names the awaited input


def test_goodbye_closes_session(risk_engine):
    session, replies = script_replies(risk_engine, ["thanks"])
    assert session.status == "closed"
    with pytest.raises(SessionClosed):
        risk_engine.step(session, "hello")


def test_help_lists_decisions(risk_engine):
    session, replies = script_replies(risk_engine, ["help"])
    assert "risk category" in replies[0].text


def test_second_decision_rejected_mid_conversation(risk_engine, job_engine):
    from dmnbot.pipeline import compile_agent

    # a two-decision agent: risk category + job suitability (independent)
    risk_unit = next(iter(risk_engine.compiled.units.values()))
    job_unit = next(iter(job_engine.compiled.units.values()))
    compiled = compile_agent(
        [(risk_unit.model, risk_unit.root), (job_unit.model, job_unit.root)],
        seed=7,
        param_style={"existingcustomer": "of"},
    )
    engine = DialogueEngine(compiled)
    session = engine.create_session("multi")
    engine.step(session, "job suitability")
    reply = engine.step(session, "risk category")
    assert reply.text.startswith("Sorry")  # context gate rejects the second decision
    assert session.active_decision == "jobsuitability"


def test_hierarchy_short_circuit_on_employment(hierarchy_engine):
    session, replies = script_replies(hierarchy_engine, ["job suitability", "yes"])
    assert session.status == "decided"
    assert replies[-1].decision == Value("enumeration", "SUITABLE")
    asks = [e["input"] for e in session.events if e["type"] == "ask"]
    assert asks == ["currentlyemployed"]


def test_hierarchy_collects_child_inputs_when_needed(hierarchy_engine):
    session, replies = script_replies(
        hierarchy_engine, ["job suitability", "no", "yes", "100", "700"]
    )
    assert replies[-1].decision == Value("enumeration", "SUITABLE")
    asks = [e["input"] for e in session.events if e["type"] == "ask"]
    assert asks == [
        "currentlyemployed",
        "existingcustomer",
        "applicationriskscore",
        "creditscore",
    ]


def test_ask_mode_asks_risk_category_directly(job_engine):
    session, replies = script_replies(job_engine, ["job suitability", "no", "high"])
    assert replies[-1].decision == Value("enumeration", "UNSUITABLE")
    asks = [e["input"] for e in session.events if e["type"] == "ask"]
    assert asks == ["currentlyemployed", "riskcategory"]


# --- conversational requirements -----------------------------------------------------


UTTERANCES = {
    "existingcustomer": "it is an existing customer",
    "applicationriskscore": "the risk score is 100",
    "creditscore": "the credit score is 700",
}


def test_r1_any_order_same_decision_and_assignment(risk_engine):
    """All 3! one-value-per-turn orders end in the same state."""
    outcomes = set()
    for order in itertools.permutations(UTTERANCES):
        session = risk_engine.create_session("perm")
        risk_engine.step(session, "risk category")
        for slug in order:
            risk_engine.step(session, UTTERANCES[slug])
        outcomes.add(
            (session.decision_value, tuple(sorted((k, v.render()) for k, v in session.collected.items())))
        )
        assert session.status == "decided"
    assert len(outcomes) == 1
    decision_value, collected = outcomes.pop()
    assert decision_value == Value("enumeration", "LOW")
    assert dict(collected) == {
        "existingcustomer": "true",
        "applicationriskscore": "100",
        "creditscore": "700",
    }


HIERARCHY_UTTERANCES = {
    "currentlyemployed": "without currently employed",
    "existingcustomer": "it is an existing customer",
    "applicationriskscore": "the risk score is 100",
    "creditscore": "the credit score is 500",
}


def test_r1_exhaustive_four_input_hierarchy(hierarchy_engine):
    """All 4! one-value-per-turn orderings decide identically, and each final
    decision equals decision(collected). Orders that make a trailing value
    unnecessary may decide before the last turn; that is R3, not a violation."""
    from dmnbot.engine import decision as engine_decision

    unit = next(iter(hierarchy_engine.compiled.units.values()))
    decisions = set()
    for order in itertools.permutations(HIERARCHY_UTTERANCES):
        session = hierarchy_engine.create_session("perm4")
        hierarchy_engine.step(session, "job suitability")
        for slug in order:
            if session.status == "decided":
                break
            hierarchy_engine.step(session, HIERARCHY_UTTERANCES[slug])
        assert session.status == "decided"
        decisions.add(session.decision_value)
        assert engine_decision(unit.model, unit.root, session.collected) == session.decision_value
    assert decisions == {Value("enumeration", "UNSUITABLE")}  # child MEDIUM, (false, MEDIUM)


def test_necessity_prunes_even_the_first_column(hierarchy_engine):
    """If the volunteered values force the child's output to LOW, the
    employment question itself becomes unnecessary and is never asked."""
    session = hierarchy_engine.create_session("prune-first")
    hierarchy_engine.step(session, "job suitability")
    for line in ("it is an existing customer", "the risk score is 100", "the credit score is 700"):
        hierarchy_engine.step(session, line)
    assert session.status == "decided"
    assert session.decision_value == Value("enumeration", "SUITABLE")
    assert "currentlyemployed" not in session.collected


def groups_partitions(items):
    """All ways to split items into consecutive non-empty groups."""
    if len(items) == 1:
        yield [items]
        return
    for cut in range(1, len(items) + 1):
        head, rest = items[:cut], items[cut:]
        if not rest:
            yield [head]
        else:
            for tail in groups_partitions(rest):
                yield [head] + tail


def test_r2_grouping_freedom_question_count(risk_engine):
    """Any grouping of the values into utterances gives the same decision and
    exactly one question per group."""
    order = ["existingcustomer", "applicationriskscore", "creditscore"]
    for partition in groups_partitions(order):
        session = risk_engine.create_session("group")
        risk_engine.step(session, "risk category")
        for group in partition:
            utterance = " and ".join(UTTERANCES[slug] for slug in group)
            risk_engine.step(session, utterance)
        assert session.status == "decided"
        assert session.decision_value == Value("enumeration", "LOW")
        questions = [e for e in session.events if e["type"] == "ask"]
        assert len(questions) == len(partition)


def test_r3_no_question_about_unnecessary_inputs(risk_engine, hierarchy_engine, job_engine):
    """Replaying varied scripts, every question passes the necessity check."""
    scripts = [
        (risk_engine, ["risk category", "yes", "50"]),
        (risk_engine, ["risk category", "no", "85"]),
        (risk_engine, ["risk category", "the credit score is 700", "no", "42"]),
        (hierarchy_engine, ["job suitability", "yes"]),
        (hierarchy_engine, ["job suitability", "no", "no", "79"]),
        (job_engine, ["job suitability", "no", "low"]),
        (job_engine, ["job suitability", "yes"]),
    ]
    for engine, lines in scripts:
        session = engine.create_session("audit")
        for line in lines:
            engine.step(session, line)
        audit_necessity(engine, session)


def audit_necessity(engine, session):
    for event in session.events:
        if event["type"] != "ask":
            continue
        unit = engine.compiled.units[event["decision"]]
        collected = {}
        for slug, rendered in event["collected"].items():
            clause = next(c for c in unit.question_order() if c.slug == slug)
            if clause.data_type.kind == "number":
                collected[slug] = Value("number", float(rendered))
            elif clause.data_type.kind == "boolean":
                collected[slug] = Value("boolean", rendered == "true")
            else:
                collected[slug] = Value(clause.data_type.kind, rendered)
        assert is_necessary(unit.model, unit.root, event["input"], Assignment(collected)), (
            f"asked unnecessary input {event['input']} with {collected}"
        )


def test_progress_every_turn_replies(risk_engine):
    session = risk_engine.create_session("progress")
    seen = []
    for line in ["risk category", "nonsense", "risk category", "yes", "nonsense", "100", "700"]:
        reply = risk_engine.step(session, line)
        assert reply.text
        seen.append(reply.text)
    assert session.status == "decided"


def test_determinism_byte_identical_transcripts(risk_engine):
    script = ["hello", "risk category", "yes", "100", "700", "bye"]
    assert replay(risk_engine, script) == replay(risk_engine, script)


def test_engine_error_surfaces_as_apology(risk_doc):
    """A defective table yields an apologetic message and a machine-readable
    error event instead of a crash."""
    from dmnbot.model import DecisionModel, DecisionTable, Rule
    from dmnbot.pipeline import compile_agent

    table = risk_doc.model.table(risk_doc.root)
    doubled = DecisionTable(
        table.name, "U", table.inputs, table.output,
        table.rules + (Rule(9, table.rules[0].input_entries, table.rules[0].output_entry),),
    )
    broken = DecisionModel({doubled.name: doubled})
    engine = DialogueEngine(
        compile_agent([(broken, risk_doc.root)], seed=7, param_style={"existingcustomer": "of"})
    )
    session = engine.create_session("broken")
    # the necessity sweep immediately trips over the (true, *) double match
    reply = engine.step(session, "risk category")
    assert reply.text.startswith("I am sorry")
    errors = [e for e in session.events if e["type"] == "error"]
    assert errors and "MultipleMatchingRules" in errors[0]["error"]
