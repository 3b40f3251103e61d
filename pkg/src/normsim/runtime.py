"""Tick-driven agent runtime with mailboxes, behaviors and the normative action process."""

from __future__ import annotations

import json
import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Mapping

from .dsl import EvaluationContext, HostFunction
from .errors import DuplicateAgentError, EvaluationError, UnknownAgentError
from .norms import ActionDescriptor, RegulatoryStatus
from .organization import NormativeBackpack
from .reasoning import Decision, ReasoningOutcome, always_abstain, default_reason

__all__ = [
    "Agent",
    "Behavior",
    "BehaviorKind",
    "Decision",
    "Environment",
    "EventRecord",
    "Message",
    "ReasoningOutcome",
    "Runtime",
    "always_abstain",
    "default_reason",
]

log = logging.getLogger(__name__)


class BehaviorKind(Enum):
    ONE_SHOT = "one_shot"
    CYCLIC = "cyclic"
    PERIODIC = "periodic"


StepFn = Callable[["Agent", "Runtime"], None]


@dataclass
class Behavior:
    step: StepFn
    kind: BehaviorKind = BehaviorKind.CYCLIC
    period: int = 1
    runs: int = 0

    def __post_init__(self) -> None:
        if self.kind is BehaviorKind.PERIODIC and self.period < 1:
            raise ValueError("period must be a positive number of ticks")

    @classmethod
    def one_shot(cls, step: StepFn) -> "Behavior":
        return cls(step, BehaviorKind.ONE_SHOT)

    @classmethod
    def cyclic(cls, step: StepFn) -> "Behavior":
        return cls(step, BehaviorKind.CYCLIC)

    @classmethod
    def periodic(cls, period: int, step: StepFn) -> "Behavior":
        return cls(step, BehaviorKind.PERIODIC, period)

    def due(self, tick: int) -> bool:
        if self.kind is BehaviorKind.ONE_SHOT:
            return self.runs == 0
        if self.kind is BehaviorKind.PERIODIC:
            return tick % self.period == 0
        return True


@dataclass(frozen=True)
class Message:
    sender: str
    to: str
    performative: str
    body: Mapping[str, Any] = field(default_factory=dict)
    sent_at: int = 0


@dataclass(frozen=True)
class EventRecord:
    tick: int
    agent: str
    action: str
    status: RegulatoryStatus
    decision: Decision
    violated: tuple[str, ...] = ()
    complied: tuple[str, ...] = ()
    utility_delta: float = 0.0
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "tick": self.tick,
            "agent": self.agent,
            "action": self.action,
            "status": self.status.name,
            "decision": self.decision.name,
            "violated": list(self.violated),
            "complied": list(self.complied),
            "utility_delta": self.utility_delta,
        }
        if self.error is not None:
            d["error"] = self.error
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


Effect = Callable[["Environment", str, ActionDescriptor], None]


class Environment:
    """Shared world state: utility accounts, violation counters, action effects.

    Subclasses hook ``before_tick`` to evolve the world and register effect
    functions that run when an action is performed.
    """

    def __init__(self, facts: Mapping[str, Any] | None = None):
        self.facts: dict[str, Any] = dict(facts or {})
        self.functions: dict[str, HostFunction] = {}
        self.effects: dict[str, Effect] = {}
        self.utility: dict[str, float] = {}
        self.violations: Counter[str] = Counter()
        self.compliances: Counter[str] = Counter()

    def open_account(self, agent_id: str) -> None:
        self.utility[agent_id] = 0.0

    def register_effect(self, action_name: str, effect: Effect) -> None:
        self.effects[action_name] = effect

    def apply_outcome(self, record: EventRecord, action: ActionDescriptor | None = None) -> None:
        if record.decision is not Decision.PERFORM:
            return
        self.utility[record.agent] = self.utility.get(record.agent, 0.0) + record.utility_delta
        self.violations.update(record.violated)
        self.compliances.update(record.complied)
        effect = self.effects.get(record.action)
        if effect is not None:
            effect(self, record.agent, action or ActionDescriptor(record.action))

    def context(self, agent_facts: Mapping[str, Any] | None = None) -> EvaluationContext:
        return EvaluationContext(agent_facts, self.facts, self.functions)

    def before_tick(self, runtime: "Runtime", tick: int) -> None:
        pass

    def after_tick(self, runtime: "Runtime", tick: int) -> None:
        pass


class Agent:
    def __init__(
        self,
        agent_id: str,
        behaviors: Iterable[Behavior],
        backpack: NormativeBackpack | None,
        runtime: "Runtime",
    ):
        self.id = agent_id
        self.behaviors = list(behaviors)
        self.backpack = backpack
        self.mailbox: deque[Message] = deque()
        self.facts: dict[str, Any] = {}
        self.runtime = runtime

    @property
    def utility(self) -> float:
        return self.runtime.environment.utility[self.id]

    def receive(self) -> Message | None:
        return self.mailbox.popleft() if self.mailbox else None

    def send(self, to: str, performative: str, body: Mapping[str, Any] | None = None) -> None:
        self.runtime.send(Message(self.id, to, performative, dict(body or {}), self.runtime.clock))

    def act(
        self,
        action: ActionDescriptor,
        expected_utility: float,
        ctx: EvaluationContext | None = None,
    ) -> EventRecord:
        return self.runtime.normative_action_process(self, action, expected_utility, ctx)

    def __repr__(self) -> str:
        return f"Agent({self.id!r})"


class Runtime:
    """Runs agents on a logical clock.

    Each tick delivers in-flight messages, lets the environment evolve, then
    runs due behaviors agent by agent in sorted id order. Behaviors of one
    agent run in registration order, so the event sequence is a pure function
    of the initial state.
    """

    def __init__(self, environment: Environment | None = None):
        self.environment = environment or Environment()
        self.agents: dict[str, Agent] = {}
        self.clock = 0
        self.events: list[EventRecord] = []
        self._in_flight: deque[Message] = deque()
        self.sent = 0
        self.delivered = 0

    def spawn_agent(
        self,
        agent_id: str,
        behaviors: Iterable[Behavior] = (),
        backpack: NormativeBackpack | None = None,
    ) -> Agent:
        if not agent_id:
            raise ValueError("agent id must be non-empty")
        if agent_id in self.agents:
            raise DuplicateAgentError(f"agent {agent_id!r} already exists")
        agent = Agent(agent_id, behaviors, backpack, self)
        self.agents[agent_id] = agent
        self.environment.open_account(agent_id)
        return agent

    def send(self, msg: Message) -> None:
        if msg.to not in self.agents:
            raise UnknownAgentError(f"no agent named {msg.to!r}")
        self._in_flight.append(msg)
        self.sent += 1

    def flush(self) -> int:
        """Deliver every in-flight message now; returns how many were delivered."""
        n = 0
        while self._in_flight:
            msg = self._in_flight.popleft()
            self.agents[msg.to].mailbox.append(msg)
            n += 1
        self.delivered += n
        return n

    def normative_action_process(
        self,
        agent: Agent,
        action: ActionDescriptor,
        expected_utility: float,
        ctx: EvaluationContext | None = None,
    ) -> EventRecord:
        """Check, reason, then perform or abstain; always notify and log.

        Unregulated actions skip the check and are performed directly.
        """
        expected_utility = float(expected_utility)
        backpack = agent.backpack
        if backpack is None or not backpack.is_regulated(action):
            record = EventRecord(
                self.clock,
                agent.id,
                action.name,
                RegulatoryStatus.NOT_REGULATED,
                Decision.PERFORM,
                utility_delta=expected_utility,
            )
        else:
            if ctx is None:
                ctx = self.environment.context(agent.facts)
            try:
                response = backpack.check(action, ctx)
                outcome = backpack.reasoning_engine(response, expected_utility)
            except EvaluationError as exc:
                log.warning("tick %d: %s could not check %s: %s", self.clock, agent.id, action.name, exc)
                record = EventRecord(
                    self.clock,
                    agent.id,
                    action.name,
                    RegulatoryStatus.FORBIDDEN,
                    Decision.ABSTAIN,
                    error=str(exc),
                )
            else:
                performed = outcome.decision is Decision.PERFORM
                delta = (
                    expected_utility + response.total_penalty + response.total_reward
                    if performed
                    else 0.0
                )
                record = EventRecord(
                    self.clock,
                    agent.id,
                    action.name,
                    response.status,
                    outcome.decision,
                    response.forbidding,
                    response.allowing,
                    delta,
                )
            backpack.notify(record)
        self.environment.apply_outcome(record, action)
        self.events.append(record)
        return record

    def tick(self) -> list[EventRecord]:
        t = self.clock
        start = len(self.events)
        self.flush()
        self.environment.before_tick(self, t)
        for agent_id in sorted(self.agents):
            agent = self.agents[agent_id]
            for behavior in agent.behaviors:
                if behavior.due(t):
                    behavior.step(agent, self)
                    behavior.runs += 1
        self.environment.after_tick(self, t)
        self.clock += 1
        return self.events[start:]

    def run(self, ticks: int) -> list[EventRecord]:
        out: list[EventRecord] = []
        for _ in range(ticks):
            out.extend(self.tick())
        return out
