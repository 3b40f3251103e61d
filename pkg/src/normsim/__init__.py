"""Normative multi-agent runtime: deontic norms, backpacks and a taxi-station simulation."""

from .dsl import EvaluationContext, HostFunction, evaluate, parse, parse_expression, pretty_print, tokenize
from .engine import EngineMode, NormStore, brute_force_check, check_action
from .norms import (
    DEFAULT_DOMAIN,
    ActionDescriptor,
    ComplianceOutcome,
    DeonticType,
    Issuer,
    Norm,
    NormativeResponse,
    RegulatoryStatus,
    StateSchema,
    evaluate_compliance,
    is_active,
    matches,
    validate_norm,
)
from .organization import NormativeBackpack, Organization
from .reasoning import Decision, ReasoningOutcome, default_reason
from .runtime import Behavior, Environment, EventRecord, Message, Runtime

__version__ = "0.1.0"
