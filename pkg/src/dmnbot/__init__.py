"""dmnbot: compile DMN decision tables into decision-support chatbot agents."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    Assignment,
    DataTypeSpec,
    DecisionModel,
    DecisionTable,
    InputClause,
    OutputClause,
    Requirement,
    Rule,
    Value,
    bind,
    raw_inputs,
    validate_model,
)
from .engine import decision, is_necessary, matches, validate_unique  # noqa: F401
from .modelio import load_model, parse_dmn_xml, parse_model_json, write_model_json  # noqa: F401
