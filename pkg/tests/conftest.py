from __future__ import annotations

from importlib import resources

import pytest

from dmnbot.modelio import ModelDocument, parse_model_json
from dmnbot.pipeline import CompiledAgent, compile_agent
from dmnbot.runtime import DialogueEngine

PARAM_STYLE = {"existingcustomer": "of"}


def load_fixture(name: str) -> ModelDocument:
    blob = resources.files("dmnbot").joinpath(f"fixtures/{name}").read_bytes()
    return parse_model_json(blob)


@pytest.fixture(scope="session")
def risk_doc() -> ModelDocument:
    return load_fixture("risk_category.json")


@pytest.fixture(scope="session")
def risk_full_doc() -> ModelDocument:
    return load_fixture("risk_category_full.json")


@pytest.fixture(scope="session")
def job_doc() -> ModelDocument:
    return load_fixture("job_suitability.json")


@pytest.fixture(scope="session")
def hierarchy_doc() -> ModelDocument:
    return load_fixture("job_suitability_hierarchy.json")


@pytest.fixture(scope="session")
def risk_compiled(risk_doc) -> CompiledAgent:
    return compile_agent([(risk_doc.model, risk_doc.root)], seed=7, param_style=PARAM_STYLE)


@pytest.fixture(scope="session")
def risk_engine(risk_compiled) -> DialogueEngine:
    return DialogueEngine(risk_compiled)


@pytest.fixture(scope="session")
def hierarchy_compiled(hierarchy_doc) -> CompiledAgent:
    return compile_agent(
        [(hierarchy_doc.model, hierarchy_doc.root)], seed=7, param_style=PARAM_STYLE
    )


@pytest.fixture(scope="session")
def hierarchy_engine(hierarchy_compiled) -> DialogueEngine:
    return DialogueEngine(hierarchy_compiled)


@pytest.fixture(scope="session")
def job_compiled(job_doc) -> CompiledAgent:
    return compile_agent([(job_doc.model, job_doc.root)], seed=7)


@pytest.fixture(scope="session")
def job_engine(job_compiled) -> DialogueEngine:
    return DialogueEngine(job_compiled)


@pytest.fixture(scope="session")
def full_compiled(risk_full_doc) -> CompiledAgent:
    return compile_agent(
        [(risk_full_doc.model, risk_full_doc.root)], seed=7, param_style=PARAM_STYLE
    )


@pytest.fixture(scope="session")
def full_engine(full_compiled) -> DialogueEngine:
    return DialogueEngine(full_compiled)


@pytest.fixture(scope="session")
def multi_compiled(risk_doc, job_doc) -> CompiledAgent:
    return compile_agent(
        [(risk_doc.model, risk_doc.root), (job_doc.model, job_doc.root)],
        seed=7,
        param_style=PARAM_STYLE,
    )


@pytest.fixture(scope="session")
def multi_engine(multi_compiled) -> DialogueEngine:
    return DialogueEngine(multi_compiled)


@pytest.fixture(scope="session")
def engines_by_bundle(risk_engine, full_engine, hierarchy_engine, job_engine, multi_engine):
    return {
        "risk": risk_engine,
        "full": full_engine,
        "hierarchy": hierarchy_engine,
        "job": job_engine,
        "multi": multi_engine,
    }
