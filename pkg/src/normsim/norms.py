"""Norm data model, verdict vocabulary and per-norm checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import AbstractSet, Iterable, Mapping, Sequence

from . import dsl
from .dsl import EvaluationContext, Expression

DEFAULT_DOMAIN = "DEFAULT"


class DeonticType(Enum):
    PROHIBITION = "prohibition"
    PERMISSION = "permission"


class Issuer(Enum):
    SELF = "self"
    SOCIETY = "society"
    ORGANIZATION = "organization"


class RegulatoryStatus(Enum):
    NOT_REGULATED = 0
    ALLOWED = 1
    FORBIDDEN = 2
    INVIOLABLE = 3

    @property
    def severity(self) -> int:
        return self.value

    def __lt__(self, other: "RegulatoryStatus") -> bool:
        if not isinstance(other, RegulatoryStatus):
            return NotImplemented
        return self.value < other.value

    def __le__(self, other: "RegulatoryStatus") -> bool:
        if not isinstance(other, RegulatoryStatus):
            return NotImplemented
        return self.value <= other.value


class ComplianceOutcome(Enum):
    COMPLIES = "complies"
    VIOLATES = "violates"


@dataclass(frozen=True)
class Norm:
    """A deontic rule.

    ``condition`` is the compliance condition: it must hold for the action to
    be performed without breaking the norm. ``activation`` decides whether the
    norm applies at all; ``None`` means always active. ``roles=None`` targets
    every role, and ``domain`` ``DEFAULT`` matches every action domain.
    """

    id: str
    deontic_type: DeonticType
    condition: Expression
    reward: float = 0.0
    penalty: float = 0.0
    activation: Expression | None = None
    roles: frozenset[str] | None = None
    domain: str = DEFAULT_DOMAIN
    inviolable: bool = True
    issuer: Issuer = Issuer.ORGANIZATION

    def __post_init__(self) -> None:
        if self.roles is not None and not isinstance(self.roles, frozenset):
            object.__setattr__(self, "roles", frozenset(self.roles))
        object.__setattr__(self, "reward", float(self.reward))
        object.__setattr__(self, "penalty", float(self.penalty))


@dataclass(frozen=True)
class ActionDescriptor:
    name: str
    domain: str = DEFAULT_DOMAIN
    params: tuple[tuple[str, object], ...] = ()


@dataclass(frozen=True)
class NormativeResponse:
    status: RegulatoryStatus
    allowing: tuple[str, ...] = ()
    forbidding: tuple[str, ...] = ()
    total_reward: float = 0.0
    total_penalty: float = 0.0

    def to_dict(self) -> dict:
        return {
            "status": self.status.name,
            "allowing": list(self.allowing),
            "forbidding": list(self.forbidding),
            "total_reward": self.total_reward,
            "total_penalty": self.total_penalty,
        }


NOT_REGULATED = NormativeResponse(RegulatoryStatus.NOT_REGULATED)


def response_violations(resp: NormativeResponse, norms: Mapping[str, Norm] | None = None) -> list[str]:
    """Return the coherence invariants ``resp`` breaks (empty when coherent).

    ``norms`` maps ids to norms and enables the inviolability check.
    """
    problems = []
    status = resp.status
    if status is RegulatoryStatus.NOT_REGULATED and (
        resp.allowing or resp.forbidding or resp.total_reward != 0 or resp.total_penalty != 0
    ):
        problems.append("NOT_REGULATED response carries norms or totals")
    blocked = status in (RegulatoryStatus.FORBIDDEN, RegulatoryStatus.INVIOLABLE)
    # a permission-mode denial is FORBIDDEN with both lists empty
    permission_denial = status is RegulatoryStatus.FORBIDDEN and not resp.forbidding and not resp.allowing
    if bool(resp.forbidding) != blocked and not permission_denial:
        problems.append("forbidding list disagrees with status")
    if norms is not None:
        any_inviolable = any(norms[i].inviolable for i in resp.forbidding)
        if (status is RegulatoryStatus.INVIOLABLE) != any_inviolable:
            problems.append("INVIOLABLE status disagrees with inviolable flags")
        if resp.total_reward != _ordered_sum(norms[i].reward for i in resp.allowing):
            problems.append("total_reward is not the sum over allowing")
        if resp.total_penalty != _ordered_sum(norms[i].penalty for i in resp.forbidding):
            problems.append("total_penalty is not the sum over forbidding")
    if not resp.total_penalty <= 0 <= resp.total_reward:
        problems.append("totals have the wrong sign")
    return problems


def _ordered_sum(values: Iterable[float]) -> float:
    total = 0.0
    for v in values:
        total += v
    return total


# -- schema & validation --------------------------------------------------------


@dataclass(frozen=True)
class StateSchema:
    """Identifiers (with value tags) and host functions (with arity) a condition may use."""

    identifiers: Mapping[str, str] = field(default_factory=dict)
    functions: Mapping[str, int] = field(default_factory=dict)

    VALUE_TAGS = ("boolean", "number", "string")

    def problems(self) -> list[str]:
        out = []
        for name in set(self.identifiers) & set(self.functions):
            out.append(f"schema name declared twice: {name}")
        for name, tag in self.identifiers.items():
            if tag not in self.VALUE_TAGS:
                out.append(f"schema identifier {name} has unknown type {tag!r}")
        return sorted(out)


def validate_norm(norm: Norm, schema: StateSchema) -> list[str]:
    """Diagnostics for ``norm``; an empty list means the norm is valid."""
    report = []
    if not norm.id:
        report.append("empty id")
    elif any(c.isspace() for c in norm.id):
        report.append(f"id {norm.id!r} contains whitespace")
    if not math.isfinite(norm.reward):
        report.append("reward must be finite")
    elif norm.reward < 0:
        report.append("reward must be ≥ 0")
    if not math.isfinite(norm.penalty):
        report.append("penalty must be finite")
    elif norm.penalty > 0:
        report.append("penalty must be ≤ 0")
    if norm.roles is not None:
        if not norm.roles:
            report.append("empty role set")
        elif any(not r or any(c.isspace() for c in r) for r in norm.roles):
            report.append("role names must be non-empty tokens")
    if not norm.domain or any(c.isspace() for c in norm.domain):
        report.append("domain must be a non-empty token")
    for label, expr in (("condition", norm.condition), ("activation", norm.activation)):
        if expr is None:
            continue
        for name in sorted(dsl.identifiers(expr)):
            if name not in schema.identifiers:
                report.append(f"unresolved identifier: {name} (in {label})")
        for call in dsl.calls(expr):
            if call.name not in schema.functions:
                report.append(f"unknown function: {call.name} (in {label})")
            elif schema.functions[call.name] != len(call.args):
                report.append(
                    f"arity mismatch: {call.name} takes {schema.functions[call.name]} "
                    f"argument(s), got {len(call.args)} (in {label})"
                )
    return report


# -- per-norm checks ------------------------------------------------------------


def matches(norm: Norm, action: ActionDescriptor, agent_roles: AbstractSet[str]) -> bool:
    if norm.domain != DEFAULT_DOMAIN and norm.domain != action.domain:
        return False
    return norm.roles is None or not norm.roles.isdisjoint(agent_roles)


def is_active(norm: Norm, ctx: EvaluationContext) -> bool:
    if norm.activation is None:
        return True
    return dsl.evaluate_bool(norm.activation, ctx, "activation")


def evaluate_compliance(norm: Norm, ctx: EvaluationContext) -> ComplianceOutcome:
    """COMPLIES iff the compliance condition holds, for both deontic types.

    For a permission, COMPLIES means the action is covered by it.
    """
    held = dsl.evaluate_bool(norm.condition, ctx, "condition")
    return ComplianceOutcome.COMPLIES if held else ComplianceOutcome.VIOLATES


def norm_index(norms: Sequence[Norm]) -> dict[str, Norm]:
    return {n.id: n for n in norms}
