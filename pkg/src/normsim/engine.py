"""Normative engine: indexed norm storage and verdict computation.

``NormStore.check_action`` narrows the norm set through domain and role
indexes before evaluating anything. ``brute_force_check`` computes the same
verdict by a plain linear scan and exists as an oracle for tests.
"""

from __future__ import annotations

import threading
from enum import Enum
from typing import AbstractSet, Iterable, Mapping, Sequence

from .dsl import EvaluationContext
from .errors import DuplicateActionError, DuplicateIdError, EvaluationError, ModeConflictError
from .norms import (
    DEFAULT_DOMAIN,
    NOT_REGULATED,
    ActionDescriptor,
    ComplianceOutcome,
    DeonticType,
    Norm,
    NormativeResponse,
    RegulatoryStatus,
    evaluate_compliance,
    is_active,
    matches,
)


class EngineMode(Enum):
    PROHIBITION_MODE = "prohibition"
    PERMISSION_MODE = "permission"

    @property
    def deontic_type(self) -> DeonticType:
        if self is EngineMode.PROHIBITION_MODE:
            return DeonticType.PROHIBITION
        return DeonticType.PERMISSION

    @classmethod
    def for_type(cls, t: DeonticType) -> "EngineMode":
        return cls.PROHIBITION_MODE if t is DeonticType.PROHIBITION else cls.PERMISSION_MODE


_ALL_ROLES = object()


class _Snapshot:
    """Immutable view of a store; writers publish a new one atomically."""

    __slots__ = ("norms", "by_domain", "by_role", "ids", "actions")

    def __init__(self, norms, by_domain, by_role, ids, actions):
        self.norms: tuple[Norm, ...] = norms
        self.by_domain: dict[str, tuple[int, ...]] = by_domain
        self.by_role: dict[object, tuple[int, ...]] = by_role
        self.ids: frozenset[str] = ids
        self.actions: dict[str, str] = actions


class NormStore:
    """Norms of one deontic type, indexed by domain and role.

    Readers work on an immutable snapshot, so a concurrent ``check_action``
    never sees a half-inserted norm. Mutations serialize on a lock.
    """

    def __init__(self, mode: EngineMode, norms: Iterable[Norm] = ()):
        self.mode = mode
        self._lock = threading.Lock()
        self._snap = _Snapshot((), {}, {}, frozenset(), {})
        for norm in norms:
            self.add_norm(norm)

    @property
    def norms(self) -> tuple[Norm, ...]:
        return self._snap.norms

    @property
    def regulated_actions(self) -> Mapping[str, str]:
        return dict(self._snap.actions)

    def __len__(self) -> int:
        return len(self._snap.norms)

    def __contains__(self, norm_id: str) -> bool:
        return norm_id in self._snap.ids

    def add_norm(self, norm: Norm) -> None:
        if norm.deontic_type is not self.mode.deontic_type:
            raise ModeConflictError(
                f"mode conflict: {norm.deontic_type.value} norm {norm.id!r} "
                f"in a {self.mode.value} store"
            )
        with self._lock:
            snap = self._snap
            if norm.id in snap.ids:
                raise DuplicateIdError(f"duplicate norm id {norm.id!r}")
            pos = len(snap.norms)
            by_domain = dict(snap.by_domain)
            by_domain[norm.domain] = by_domain.get(norm.domain, ()) + (pos,)
            by_role = dict(snap.by_role)
            for key in (sorted(norm.roles) if norm.roles is not None else (_ALL_ROLES,)):
                by_role[key] = by_role.get(key, ()) + (pos,)
            self._snap = _Snapshot(
                snap.norms + (norm,), by_domain, by_role, snap.ids | {norm.id}, snap.actions
            )

    def register_action(self, name: str, domain: str = DEFAULT_DOMAIN) -> None:
        if not name:
            raise ValueError("action name must be non-empty")
        with self._lock:
            snap = self._snap
            known = snap.actions.get(name)
            if known == domain:
                return
            if known is not None:
                raise DuplicateActionError(
                    f"action {name!r} already registered in domain {known!r}"
                )
            actions = dict(snap.actions)
            actions[name] = domain
            self._snap = _Snapshot(snap.norms, snap.by_domain, snap.by_role, snap.ids, actions)

    def is_regulated(self, action: ActionDescriptor) -> bool:
        return action.name in self._snap.actions

    def filter_candidates(
        self, action: ActionDescriptor, agent_roles: AbstractSet[str]
    ) -> list[Norm]:
        snap = self._snap
        in_domain = set(snap.by_domain.get(DEFAULT_DOMAIN, ()))
        if action.domain != DEFAULT_DOMAIN:
            in_domain.update(snap.by_domain.get(action.domain, ()))
        if not in_domain:
            return []
        for_roles = set(snap.by_role.get(_ALL_ROLES, ()))
        for role in agent_roles:
            for_roles.update(snap.by_role.get(role, ()))
        return [snap.norms[i] for i in sorted(in_domain & for_roles)]

    def check_action(
        self,
        action: ActionDescriptor,
        agent_roles: AbstractSet[str],
        ctx: EvaluationContext,
        mode: EngineMode | None = None,
    ) -> NormativeResponse:
        if mode is not None and mode is not self.mode:
            raise ModeConflictError(f"store is in {self.mode.value} mode, not {mode.value}")
        if not self.is_regulated(action):
            return NOT_REGULATED
        return evaluate_candidates(self.filter_candidates(action, agent_roles), self.mode, ctx)


def evaluate_candidates(
    candidates: Sequence[Norm], mode: EngineMode, ctx: EvaluationContext
) -> NormativeResponse:
    """Verdict for an already filtered, ordered candidate list."""
    allowing: list[Norm] = []
    forbidding: list[Norm] = []
    active = 0
    for norm in candidates:
        try:
            if not is_active(norm, ctx):
                continue
            outcome = evaluate_compliance(norm, ctx)
        except EvaluationError as exc:
            exc.norm_id = norm.id
            raise
        active += 1
        if outcome is ComplianceOutcome.COMPLIES:
            allowing.append(norm)
        elif mode is EngineMode.PROHIBITION_MODE:
            forbidding.append(norm)
    if active == 0:
        return NOT_REGULATED

    if mode is EngineMode.PROHIBITION_MODE:
        if any(n.inviolable for n in forbidding):
            status = RegulatoryStatus.INVIOLABLE
        elif forbidding:
            status = RegulatoryStatus.FORBIDDEN
        else:
            status = RegulatoryStatus.ALLOWED
    else:
        status = RegulatoryStatus.ALLOWED if allowing else RegulatoryStatus.FORBIDDEN

    total_reward = 0.0
    for n in allowing:
        total_reward += n.reward
    total_penalty = 0.0
    for n in forbidding:
        total_penalty += n.penalty
    return NormativeResponse(
        status,
        tuple(n.id for n in allowing),
        tuple(n.id for n in forbidding),
        total_reward,
        total_penalty,
    )


def check_action(
    store: NormStore,
    mode: EngineMode,
    action: ActionDescriptor,
    agent_roles: AbstractSet[str],
    ctx: EvaluationContext,
) -> NormativeResponse:
    return store.check_action(action, agent_roles, ctx, mode)


def brute_force_check(
    all_norms: Sequence[Norm],
    mode: EngineMode,
    action: ActionDescriptor,
    agent_roles: AbstractSet[str],
    ctx: EvaluationContext,
    regulated_actions: Mapping[str, str] | None = None,
) -> NormativeResponse:
    """Unindexed single pass over ``all_norms``; the test oracle for ``check_action``.

    ``regulated_actions=None`` treats every action as regulated.
    """
    if regulated_actions is not None and action.name not in regulated_actions:
        return NormativeResponse(RegulatoryStatus.NOT_REGULATED)
    status = RegulatoryStatus.NOT_REGULATED
    allow_ids: list[str] = []
    forbid_ids: list[str] = []
    reward = 0.0
    penalty = 0.0
    for norm in all_norms:
        if not matches(norm, action, agent_roles):
            continue
        try:
            if not is_active(norm, ctx):
                continue
            ok = evaluate_compliance(norm, ctx) is ComplianceOutcome.COMPLIES
        except EvaluationError as exc:
            exc.norm_id = norm.id
            raise
        if mode is EngineMode.PROHIBITION_MODE:
            if ok:
                allow_ids.append(norm.id)
                reward += norm.reward
                status = max(status, RegulatoryStatus.ALLOWED, key=lambda s: s.value)
            else:
                forbid_ids.append(norm.id)
                penalty += norm.penalty
                worst = RegulatoryStatus.INVIOLABLE if norm.inviolable else RegulatoryStatus.FORBIDDEN
                status = max(status, worst, key=lambda s: s.value)
        else:
            if ok:
                allow_ids.append(norm.id)
                reward += norm.reward
            status = RegulatoryStatus.ALLOWED if allow_ids else RegulatoryStatus.FORBIDDEN
    return NormativeResponse(status, tuple(allow_ids), tuple(forbid_ids), reward, penalty)
