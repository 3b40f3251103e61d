"""Organizations, membership, and the per-agent normative backpack."""

from __future__ import annotations

import threading
from typing import AbstractSet, Callable, Iterable, Mapping

from .dsl import EvaluationContext
from .engine import EngineMode, NormStore, brute_force_check, evaluate_candidates
from .reasoning import Decision, ReasoningOutcome, default_reason
from .errors import (
    AlreadyMemberError,
    DuplicateIdError,
    IssuerError,
    ModeConflictError,
    NotMemberError,
    UnknownRoleError,
    ValidationError,
)
from .norms import (
    NOT_REGULATED,
    ActionDescriptor,
    Issuer,
    Norm,
    NormativeResponse,
    StateSchema,
    validate_norm,
)


class Organization:
    """A named scope with its own mode, roles, state schema, norms and members."""

    def __init__(
        self,
        name: str,
        mode: EngineMode,
        roles: Iterable[str],
        schema: StateSchema | None = None,
        norms: Iterable[Norm] = (),
        actions: Mapping[str, str] | None = None,
    ):
        self.name = name
        self.mode = mode
        self.role_registry = frozenset(roles)
        self.schema = schema or StateSchema()
        self.store = NormStore(mode)
        self.members: dict[str, frozenset[str]] = {}
        self._tickets: dict[str, object] = {}
        self._lock = threading.Lock()
        for norm in norms:
            self.add_norm(norm)
        for action, domain in (actions or {}).items():
            self.store.register_action(action, domain)

    def add_norm(self, norm: Norm) -> None:
        problems = validate_norm(norm, self.schema)
        if problems:
            raise ValidationError([f"norm {norm.id!r}: {p}" for p in problems])
        if norm.roles is not None and not norm.roles <= self.role_registry:
            unknown = ", ".join(sorted(norm.roles - self.role_registry))
            raise UnknownRoleError(f"norm {norm.id!r} names unknown role(s) {unknown}")
        self.store.add_norm(norm)

    def register_action(self, name: str, domain: str) -> None:
        self.store.register_action(name, domain)

    def join(self, agent: str, roles: AbstractSet[str]) -> "NormativeBackpack":
        roles = frozenset(roles)
        unknown = roles - self.role_registry
        if unknown:
            raise UnknownRoleError(f"unknown role(s): {', '.join(sorted(unknown))}")
        with self._lock:
            if agent in self.members:
                raise AlreadyMemberError(f"{agent} is already a member of {self.name}")
            self.members[agent] = roles
            ticket = self._tickets[agent] = object()
        return NormativeBackpack(self, agent, ticket=ticket)

    def leave(self, agent: str) -> None:
        with self._lock:
            if agent not in self.members:
                raise NotMemberError(f"{agent} is not a member of {self.name}")
            del self.members[agent]
            del self._tickets[agent]

    def roles_of(self, agent: str, ticket: object = None) -> frozenset[str]:
        roles = self.members.get(agent)
        if roles is None or (ticket is not None and self._tickets.get(agent) is not ticket):
            raise NotMemberError(f"{agent} is not a member of {self.name}")
        return roles


Reasoner = Callable[[NormativeResponse, float], ReasoningOutcome]


class NormativeBackpack:
    """What an agent receives on joining: org norms, its own concerns, the
    regulated actions, and a reasoning engine that turns verdicts into decisions.
    """

    def __init__(
        self,
        organization: Organization,
        agent: str,
        reasoner: Reasoner | None = None,
        ticket: object = None,
    ):
        self.organization = organization
        self.agent = agent
        self.concerns = NormStore(organization.mode)
        self.reasoning_engine: Reasoner = reasoner or default_reason
        self.checks = 0
        self.performed = 0
        self.abstentions = 0
        self.violations = 0
        # identifies the membership this backpack was issued for; a backpack
        # from an earlier membership stays inert after the agent rejoins
        self._ticket = ticket if ticket is not None else object()

    @property
    def regulated_actions(self) -> Mapping[str, str]:
        return self.organization.store.regulated_actions

    @property
    def norms(self) -> tuple[Norm, ...]:
        """Organization norms followed by concerns, in evaluation order."""
        return self.organization.store.norms + self.concerns.norms

    @property
    def roles(self) -> frozenset[str]:
        return self.organization.roles_of(self.agent, self._ticket)

    def is_regulated(self, action: ActionDescriptor) -> bool:
        return self.organization.store.is_regulated(action)

    def add_concern(self, norm: Norm) -> None:
        if norm.issuer is not Issuer.SELF:
            raise IssuerError(f"concern {norm.id!r} must have issuer SELF, not {norm.issuer.name}")
        if norm.deontic_type is not self.organization.mode.deontic_type:
            raise ModeConflictError(
                f"mode conflict: {norm.deontic_type.value} concern in a "
                f"{self.organization.mode.value} organization"
            )
        problems = validate_norm(norm, self.organization.schema)
        if problems:
            raise ValidationError([f"concern {norm.id!r}: {p}" for p in problems])
        if norm.id in self.organization.store:
            raise DuplicateIdError(f"concern id {norm.id!r} collides with an organization norm")
        self.concerns.add_norm(norm)

    def check(self, action: ActionDescriptor, ctx: EvaluationContext) -> NormativeResponse:
        roles = self.roles
        store = self.organization.store
        if not store.is_regulated(action):
            return NOT_REGULATED
        candidates = store.filter_candidates(action, roles) + self.concerns.filter_candidates(
            action, roles
        )
        return evaluate_candidates(candidates, self.organization.mode, ctx)

    def oracle_check(self, action: ActionDescriptor, ctx: EvaluationContext) -> NormativeResponse:
        """``check`` recomputed by brute force over the concatenated norm list."""
        return brute_force_check(
            self.norms,
            self.organization.mode,
            action,
            self.roles,
            ctx,
            self.organization.store.regulated_actions,
        )

    def notify(self, record) -> None:
        """Count a finished normative action process, performed or not."""
        self.checks += 1
        if record.decision is Decision.PERFORM:
            self.performed += 1
            self.violations += len(record.violated)
        else:
            self.abstentions += 1


def join(org: Organization, agent: str, roles: AbstractSet[str]) -> NormativeBackpack:
    return org.join(agent, roles)


def leave(org: Organization, agent: str) -> None:
    org.leave(agent)


def add_concern(backpack: NormativeBackpack, norm: Norm) -> None:
    backpack.add_concern(norm)


def backpack_check(
    backpack: NormativeBackpack, action: ActionDescriptor, ctx: EvaluationContext
) -> NormativeResponse:
    return backpack.check(action, ctx)
