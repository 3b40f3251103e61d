"""Norm/scenario file loading, the taxi-station environment and simulation driver.

Norm files and scenario files share one JSON layout. A norm file carries
``mode``, ``schema`` and ``norms``; a scenario adds ``roles``, ``actions``,
``agents``, ``environment``, ``ticks`` and ``seed``.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import IO, Any, Callable, Iterable, Mapping

from . import dsl
from .dsl import EvaluationContext, Expression, HostFunction, TokenKind
from .engine import EngineMode
from .errors import (
    FormatError,
    LexError,
    NormsimError,
    ParseError,
    SimulationError,
    ValidationError,
)
from .norms import (
    DEFAULT_DOMAIN,
    ActionDescriptor,
    DeonticType,
    Issuer,
    Norm,
    StateSchema,
    validate_norm,
)
from .organization import Organization
from .prng import MASK64, SplitMix64
from .reasoning import Decision
from .runtime import Agent, Behavior, Environment, EventRecord, Runtime

BUNDLED = ("taxi.scenario", "taxi-shifts.scenario", "taxi_norms.json")

# respectLine keyed on the tail position. Read as a compliance condition it
# lets only the last driver in the queue pick customers, so the head driver
# would be fined for an ordinary pickup. The bundled scenario ships
# ``driverQueuePos == 1`` instead; this variant is kept so the difference
# stays testable.
TAIL_RESPECT_LINE = {
    "id": "respectLine",
    "type": "PROHIBITION",
    "condition": "driverQueuePos == numTaxisQueue",
    "activation": "True",
    "reward": 0,
    "penalty": -1,
    "roles": ["DRIVER"],
    "domain": "QUEUE",
    "inviolable": False,
    "issuer": "ORGANIZATION",
}


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("normsim") / "data" / name))


def resolve_path(path: str | Path) -> Path:
    """``path`` itself if it exists, else the bundled file of that name."""
    p = Path(path)
    if not p.exists() and p.name in BUNDLED and len(p.parts) == 1:
        return bundled_path(p.name)
    return p


# -- documents ------------------------------------------------------------------


def read_document(path: str | Path) -> tuple[dict, str]:
    """Read and JSON-decode ``path``; raises OSError or FormatError."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise FormatError("empty file", 1)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object", 1)
    return doc, text


def parse_condition(source: Any) -> Expression:
    """Parse a condition given as DSL text or a JSON boolean.

    Python-style ``True``/``False`` are accepted and normalised to the
    language's lower-case boolean literals.
    """
    if isinstance(source, bool):
        return dsl.Literal(source)
    if not isinstance(source, str):
        raise ParseError("condition must be a string", 0)
    tokens = [
        dsl.Token(TokenKind.BOOL, t.lexeme.lower(), t.offset)
        if t.kind is TokenKind.IDENT and t.lexeme in ("True", "False")
        else t
        for t in dsl.tokenize(source)
    ]
    return dsl.parse(tokens, len(source))


def _enum_value(enum: type[Enum], raw: Any, what: str) -> Any:
    if isinstance(raw, str):
        for member in enum:
            if raw.lower() in (member.name.lower(), str(member.value).lower()):
                return member
    raise ValueError(f"unknown {what} {raw!r}")


def _number(raw: Any, what: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValueError(f"{what} must be a number")
    return float(raw)


_NORM_KEYS = {
    "id", "type", "condition", "activation", "reward", "penalty",
    "roles", "domain", "inviolable", "issuer",
}


def norm_from_dict(raw: Mapping[str, Any]) -> Norm:
    """Build a Norm from its file representation; raises ValueError, LexError or ParseError."""
    if not isinstance(raw, Mapping):
        raise ValueError("norm entry must be an object")
    missing = {"id", "type", "condition", "reward", "penalty", "issuer"} - set(raw)
    if missing:
        raise ValueError(f"missing key(s): {', '.join(sorted(missing))}")
    extra = set(raw) - _NORM_KEYS
    if extra:
        raise ValueError(f"unknown key(s): {', '.join(sorted(extra))}")
    if not isinstance(raw["id"], str):
        raise ValueError("id must be a string")
    roles = raw.get("roles")
    if roles is not None:
        if not isinstance(roles, list) or not all(isinstance(r, str) for r in roles):
            raise ValueError("roles must be a list of strings")
        roles = frozenset(roles)
    inviolable = raw.get("inviolable", True)
    if not isinstance(inviolable, bool):
        raise ValueError("inviolable must be a boolean")
    domain = raw.get("domain", DEFAULT_DOMAIN)
    if not isinstance(domain, str):
        raise ValueError("domain must be a string")
    activation = raw.get("activation")
    return Norm(
        id=raw["id"],
        deontic_type=_enum_value(DeonticType, raw["type"], "deontic type"),
        condition=_wrap_parse(parse_condition, raw["condition"], "condition"),
        activation=None if activation is None else _wrap_parse(parse_condition, activation, "activation"),
        reward=_number(raw["reward"], "reward"),
        penalty=_number(raw["penalty"], "penalty"),
        roles=roles,
        domain=domain,
        inviolable=inviolable,
        issuer=_enum_value(Issuer, raw["issuer"], "issuer"),
    )


def _wrap_parse(fn: Callable[[Any], Expression], source: Any, label: str) -> Expression:
    try:
        return fn(source)
    except (LexError, ParseError) as exc:
        raise ValueError(f"{label} {source!r}: {exc}") from None


def schema_from_dict(raw: Any) -> StateSchema:
    if raw is None:
        return StateSchema()
    if not isinstance(raw, Mapping):
        raise ValueError("schema must be an object")
    idents = raw.get("identifiers", {})
    funcs = raw.get("functions", {})
    if not isinstance(idents, Mapping) or not all(isinstance(v, str) for v in idents.values()):
        raise ValueError("schema identifiers must map names to type names")
    if not isinstance(funcs, Mapping) or not all(
        isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in funcs.values()
    ):
        raise ValueError("schema functions must map names to arities")
    return StateSchema({k: v.lower() for k, v in idents.items()}, dict(funcs))


def _line_locator(text: str) -> Callable[[str], int | None]:
    def locate(norm_id: str) -> int | None:
        m = re.search(r'"id"\s*:\s*' + re.escape(json.dumps(norm_id)), text)
        return text.count("\n", 0, m.start()) + 1 if m else None

    return locate


def _at(line: int | None, msg: str) -> str:
    return f"line {line}: {msg}" if line is not None else msg


@dataclass
class NormFile:
    mode: EngineMode
    schema: StateSchema
    norms: list[Norm]


def parse_norm_document(doc: Mapping[str, Any], text: str = "") -> tuple[NormFile | None, list[str]]:
    """Decode the norm part of a document; returns the result and diagnostics."""
    diags: list[str] = []
    locate = _line_locator(text)
    try:
        mode = EngineMode(str(doc.get("mode", "")).lower())
    except ValueError:
        diags.append(f"mode must be 'prohibition' or 'permission', got {doc.get('mode')!r}")
        mode = None
    try:
        schema = schema_from_dict(doc.get("schema"))
        diags.extend(schema.problems())
    except ValueError as exc:
        diags.append(str(exc))
        schema = StateSchema()
    raw_norms = doc.get("norms")
    if not isinstance(raw_norms, list):
        diags.append("norms must be a list")
        raw_norms = []
    norms: list[Norm] = []
    seen: set[str] = set()
    for i, raw in enumerate(raw_norms):
        label_id = raw.get("id") if isinstance(raw, Mapping) else None
        line = locate(label_id) if isinstance(label_id, str) and label_id else None
        label = f"norm {label_id}" if label_id else f"norm #{i + 1}"
        try:
            norm = norm_from_dict(raw)
        except (ValueError, LexError, ParseError) as exc:
            diags.append(_at(line, f"{label}: {exc}"))
            continue
        for problem in validate_norm(norm, schema):
            diags.append(_at(line, f"{label}: {problem}"))
        if mode is not None and norm.deontic_type is not mode.deontic_type:
            diags.append(
                _at(
                    line,
                    f"{label}: mode conflict: {norm.deontic_type.value} norm "
                    f"in a {mode.value} file",
                )
            )
        if norm.id in seen:
            diags.append(_at(line, f"{label}: duplicate id"))
        seen.add(norm.id)
        norms.append(norm)
    if mode is None:
        return None, diags
    return NormFile(mode, schema, norms), diags


def check_norm_file(path: str | Path) -> list[str]:
    """All diagnostics for a norm (or scenario) file; empty means clean."""
    try:
        doc, text = read_document(path)
    except OSError as exc:
        return [f"cannot read {path}: {exc.strerror or exc}"]
    except FormatError as exc:
        return [str(exc)]
    return parse_norm_document(doc, text)[1]


def load_norm_file(path: str | Path) -> NormFile:
    doc, text = read_document(path)
    result, diags = parse_norm_document(doc, text)
    if diags or result is None:
        raise ValidationError(diags)
    return result


# -- scenario config --------------------------------------------------------------


@dataclass
class ActionSpec:
    name: str
    domain: str
    effect: str | None = None


@dataclass
class AgentSpec:
    id: str
    roles: frozenset[str]
    behaviors: list[str]
    facts: dict[str, Any] = field(default_factory=dict)


@dataclass
class ScenarioConfig:
    name: str
    mode: EngineMode
    roles: frozenset[str]
    schema: StateSchema
    norms: list[Norm]
    actions: list[ActionSpec]
    agents: list[AgentSpec]
    environment: dict[str, Any]
    ticks: int
    seed: int


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load and fully validate a scenario; raises OSError, FormatError or ValidationError."""
    doc, text = read_document(path)
    norm_part, diags = parse_norm_document(doc, text)

    roles = doc.get("roles", [])
    if not isinstance(roles, list) or not all(isinstance(r, str) and r for r in roles):
        diags.append("roles must be a list of non-empty strings")
        roles = []
    roles = frozenset(roles)
    if norm_part is not None:
        for norm in norm_part.norms:
            if norm.roles is not None and not norm.roles <= roles:
                unknown = ", ".join(sorted(norm.roles - roles))
                diags.append(f"norm {norm.id}: unknown role(s) {unknown}")

    env = doc.get("environment", {})
    if not isinstance(env, dict):
        diags.append("environment must be an object")
        env = {}
    kind = env.get("kind")
    env_kind = ENVIRONMENT_KINDS.get(kind)
    if env_kind is None:
        diags.append(f"unknown environment kind {kind!r}")

    actions: list[ActionSpec] = []
    raw_actions = doc.get("actions", [])
    if not isinstance(raw_actions, list):
        diags.append("actions must be a list")
        raw_actions = []
    seen_actions: dict[str, str] = {}
    for raw in raw_actions:
        if not isinstance(raw, dict) or not isinstance(raw.get("name"), str) or not raw["name"]:
            diags.append(f"action entry {raw!r} needs a non-empty name")
            continue
        spec = ActionSpec(raw["name"], raw.get("domain", DEFAULT_DOMAIN), raw.get("effect"))
        if seen_actions.get(spec.name, spec.domain) != spec.domain:
            diags.append(f"action {spec.name}: registered in two domains")
        seen_actions[spec.name] = spec.domain
        if spec.effect is not None and env_kind is not None and spec.effect not in env_kind.effects:
            diags.append(f"action {spec.name}: unknown effect {spec.effect!r}")
        actions.append(spec)

    agents: list[AgentSpec] = []
    raw_agents = doc.get("agents", [])
    if not isinstance(raw_agents, list):
        diags.append("agents must be a list")
        raw_agents = []
    for raw in raw_agents:
        if not isinstance(raw, dict) or not isinstance(raw.get("id"), str) or not raw["id"]:
            diags.append(f"agent entry {raw!r} needs a non-empty id")
            continue
        agent_roles = frozenset(raw.get("roles", []))
        if not agent_roles <= roles:
            diags.append(
                f"agent {raw['id']}: unknown role(s) {', '.join(sorted(agent_roles - roles))}"
            )
        behaviors = raw.get("behaviors", [])
        for b in behaviors:
            if env_kind is not None and b not in env_kind.behaviors:
                diags.append(f"agent {raw['id']}: unknown behavior {b!r}")
        if any(a.id == raw["id"] for a in agents):
            diags.append(f"agent {raw['id']}: duplicate id")
        agents.append(AgentSpec(raw["id"], agent_roles, list(behaviors), dict(raw.get("facts", {}))))

    ticks = doc.get("ticks")
    if isinstance(ticks, bool) or not isinstance(ticks, int) or ticks < 1:
        diags.append(f"ticks must be a positive integer, got {ticks!r}")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MASK64:
        diags.append(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    if env_kind is not None:
        diags.extend(env_kind.validate(env, agents))

    if diags or norm_part is None:
        raise ValidationError(diags)
    return ScenarioConfig(
        name=str(doc.get("name", Path(path).stem)),
        mode=norm_part.mode,
        roles=roles,
        schema=norm_part.schema,
        norms=norm_part.norms,
        actions=actions,
        agents=agents,
        environment=env,
        ticks=ticks,
        seed=seed,
    )


# -- taxi station -------------------------------------------------------------------


class DriverStatus(Enum):
    QUEUED = "queued"
    TRIP = "trip"
    BREAK = "break"


@dataclass
class Driver:
    id: str
    capacity: int
    hours: float = 0.0
    status: DriverStatus = DriverStatus.QUEUED
    until: int = 0
    ambitious: bool = False
    skips_breaks: bool = False


@dataclass(frozen=True)
class Pickup:
    tick: int
    driver: str
    group: int
    capacity: int


PICK_CLIENTS = "PickClients"
QUEUE = "Queue"
REQUEUE = "Requeue"
TAKE_BREAK = "TakeBreak"
IDLE = "Idle"
DRIVE = "Drive"
REST = "Rest"


class TaxiStation(Environment):
    """A rank of taxis, one waiting customer group at a time.

    Customers arrive only while nobody is waiting: first the scripted group
    sizes in order, then with probability ``probability`` per tick a group of
    uniform size in ``[min_group, max_group]`` drawn from SplitMix64.
    """

    effects_by_name = ("board", "jump_to_head", "rejoin_tail", "start_break")

    def __init__(
        self,
        drivers: Iterable[Driver],
        queue: Iterable[str],
        seed: int,
        script: Iterable[int] = (),
        probability: float = 0.0,
        min_group: int = 1,
        max_group: int = 6,
        fare_per_customer: float = 2.0,
        trip_ticks: int = 6,
        hours_per_tick: float = 0.25,
        max_hours: float = 8.0,
        break_ticks: int = 2,
    ):
        super().__init__()
        self.drivers = {d.id: d for d in drivers}
        self.queue: list[str] = list(queue)
        self.waiting = 0
        self.rng = SplitMix64(seed)
        self.script = deque(script)
        self.probability = probability
        self.min_group = min_group
        self.max_group = max_group
        self.fare_per_customer = fare_per_customer
        self.trip_ticks = trip_ticks
        self.hours_per_tick = hours_per_tick
        self.max_hours = max_hours
        self.break_ticks = break_ticks
        self.now = 0
        self.pickups: list[Pickup] = []
        self.arrivals: list[tuple[int, int]] = []
        self.functions["queueLength"] = HostFunction(0, lambda: len(self.queue))
        for name in self.effects_by_name:
            self.register_effect(name, getattr(self, "_" + name))
        self.register_effect(REQUEUE, self._rejoin_tail)
        self.register_effect(TAKE_BREAK, self._start_break)
        self.check_invariants()

    @classmethod
    def from_config(cls, env: Mapping[str, Any], agents: Iterable[AgentSpec], seed: int) -> "TaxiStation":
        arrivals = env.get("arrivals", {})
        drivers = [
            Driver(
                a.id,
                int(a.facts.get("taxiCapacity", 4)),
                float(a.facts.get("hoursWorked", 0.0)),
                ambitious=bool(a.facts.get("ambitious", False)),
                skips_breaks=bool(a.facts.get("skipsBreaks", False)),
            )
            for a in agents
            if "taxi-driver" in a.behaviors
        ]
        return cls(
            drivers,
            env.get("queue", [d.id for d in drivers]),
            seed,
            script=arrivals.get("script", ()),
            probability=float(arrivals.get("probability", 0.0)),
            min_group=int(arrivals.get("min_group", 1)),
            max_group=int(arrivals.get("max_group", 6)),
            fare_per_customer=float(env.get("fare_per_customer", 2.0)),
            trip_ticks=int(env.get("trip_ticks", 6)),
            hours_per_tick=float(env.get("hours_per_tick", 0.25)),
            max_hours=float(env.get("max_hours", 8.0)),
            break_ticks=int(env.get("break_ticks", 2)),
        )

    @staticmethod
    def validate(env: Mapping[str, Any], agents: list[AgentSpec]) -> list[str]:
        out = []
        drivers = {a.id for a in agents if "taxi-driver" in a.behaviors}
        queue = env.get("queue", sorted(drivers))
        if not isinstance(queue, list) or len(set(queue)) != len(queue):
            out.append("environment.queue must list each driver at most once")
        elif not set(queue) <= drivers:
            out.append(f"environment.queue names unknown driver(s): {sorted(set(queue) - drivers)}")
        arrivals = env.get("arrivals", {})
        if not isinstance(arrivals, dict):
            return out + ["environment.arrivals must be an object"]
        p = arrivals.get("probability", 0.0)
        if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0.0 <= p <= 1.0:
            out.append("arrivals.probability must be in [0, 1]")
        lo, hi = arrivals.get("min_group", 1), arrivals.get("max_group", 6)
        if not (isinstance(lo, int) and isinstance(hi, int) and 1 <= lo <= hi):
            out.append("arrivals.min_group/max_group must satisfy 1 <= min <= max")
        script = arrivals.get("script", [])
        if not isinstance(script, list) or not all(isinstance(g, int) and g > 0 for g in script):
            out.append("arrivals.script must be a list of positive group sizes")
        for a in agents:
            cap = a.facts.get("taxiCapacity", 4)
            if a.id in drivers and (not isinstance(cap, int) or cap < 1):
                out.append(f"agent {a.id}: taxiCapacity must be a positive integer")
        for key in ("trip_ticks", "break_ticks"):
            v = env.get(key, 1)
            if not isinstance(v, int) or v < 1:
                out.append(f"environment.{key} must be a positive integer")
        return out

    # world evolution

    def before_tick(self, runtime: Runtime, tick: int) -> None:
        self.now = tick
        if self.waiting:
            return
        if self.script:
            size = self.script.popleft()
        elif self.probability > 0.0 and self.rng.uniform() < self.probability:
            size = self.min_group + self.rng.below(self.max_group - self.min_group + 1)
        else:
            return
        self.waiting = size
        self.arrivals.append((tick, size))

    def after_tick(self, runtime: Runtime, tick: int) -> None:
        self.check_invariants()

    def check_invariants(self) -> None:
        if len(set(self.queue)) != len(self.queue):
            raise AssertionError(f"driver listed twice in queue {self.queue}")
        if self.waiting < 0:
            raise AssertionError("negative waiting group")
        for d_id in self.queue:
            if self.drivers[d_id].status is not DriverStatus.QUEUED:
                raise AssertionError(f"{d_id} is in the queue while {self.drivers[d_id].status.value}")

    def position(self, driver_id: str) -> int:
        """1-based queue position, 0 when not queued."""
        try:
            return self.queue.index(driver_id) + 1
        except ValueError:
            return 0

    def context(self, agent_facts: Mapping[str, Any] | None = None) -> EvaluationContext:
        return EvaluationContext(
            agent_facts,
            {"NumClientsWaiting": self.waiting, "numTaxisQueue": len(self.queue)},
            self.functions,
        )

    def driver_context(self, driver: Driver) -> EvaluationContext:
        return self.context(
            {
                "taxiCapacity": driver.capacity,
                "hoursWorked": driver.hours,
                "onBreak": driver.status is DriverStatus.BREAK,
                "driverQueuePos": self.position(driver.id),
            }
        )

    # effects

    def _board(self, env: Environment, agent_id: str, action: ActionDescriptor) -> None:
        d = self.drivers[agent_id]
        self.pickups.append(Pickup(self.now, agent_id, self.waiting, d.capacity))
        self.waiting = 0
        if agent_id in self.queue:
            self.queue.remove(agent_id)
        d.status = DriverStatus.TRIP
        d.until = self.now + self.trip_ticks

    def _jump_to_head(self, env: Environment, agent_id: str, action: ActionDescriptor) -> None:
        self.queue.remove(agent_id)
        self.queue.insert(0, agent_id)

    def _rejoin_tail(self, env: Environment, agent_id: str, action: ActionDescriptor) -> None:
        if agent_id in self.queue:
            self.queue.remove(agent_id)
        self.queue.append(agent_id)
        self.drivers[agent_id].status = DriverStatus.QUEUED

    def _start_break(self, env: Environment, agent_id: str, action: ActionDescriptor) -> None:
        if agent_id in self.queue:
            self.queue.remove(agent_id)
        d = self.drivers[agent_id]
        d.status = DriverStatus.BREAK
        d.until = self.now + self.break_ticks


def taxi_driver(agent: Agent, runtime: Runtime) -> None:
    """One tick of a taxi driver's life.

    At the head of the queue the driver offers to take the waiting group. A
    group that does not fit sends the driver back to the tail. An ambitious
    driver further back may jump the queue for a group that fits; the fare is
    booked on the jump, so the boarding that follows carries no extra utility.
    """
    st: TaxiStation = runtime.environment  # type: ignore[assignment]
    d = st.drivers[agent.id]
    now = runtime.clock

    if d.status is DriverStatus.BREAK:
        if now >= d.until:
            d.hours = 0.0
            agent.act(ActionDescriptor(REQUEUE), 0.0)
        else:
            agent.act(ActionDescriptor(REST), 0.0)
        return

    d.hours += st.hours_per_tick
    if d.status is DriverStatus.TRIP:
        if now < d.until:
            agent.act(ActionDescriptor(DRIVE), 0.0)
            return
        agent.act(ActionDescriptor(REQUEUE), 0.0)

    group = st.waiting
    pos = st.position(agent.id)
    fare = st.fare_per_customer * group
    if group and pos == 1:
        pick = ActionDescriptor(PICK_CLIENTS, "PICKING", (("group", group),))
        record = agent.act(pick, fare, st.driver_context(d))
        if record.decision is Decision.ABSTAIN:
            if group > d.capacity:
                agent.act(ActionDescriptor(REQUEUE), 0.0)
            else:
                agent.act(ActionDescriptor(TAKE_BREAK), 0.0)
    elif group and pos > 1 and d.ambitious and group <= d.capacity:
        jump = ActionDescriptor(QUEUE, "QUEUE", (("from_position", pos),))
        record = agent.act(jump, fare, st.driver_context(d))
        if record.decision is Decision.PERFORM:
            pick = ActionDescriptor(PICK_CLIENTS, "PICKING", (("group", group),))
            agent.act(pick, 0.0, st.driver_context(d))
        else:
            agent.act(ActionDescriptor(IDLE), 0.0)
    elif d.status is DriverStatus.QUEUED:
        agent.act(ActionDescriptor(IDLE), 0.0)

    if d.status is DriverStatus.QUEUED and d.hours >= st.max_hours and not d.skips_breaks:
        agent.act(ActionDescriptor(TAKE_BREAK), 0.0)


@dataclass(frozen=True)
class EnvironmentKind:
    build: Callable[[Mapping[str, Any], list[AgentSpec], int], Environment]
    validate: Callable[[Mapping[str, Any], list[AgentSpec]], list[str]]
    effects: tuple[str, ...]
    behaviors: Mapping[str, Callable[[Agent, Runtime], None]]


ENVIRONMENT_KINDS: dict[str, EnvironmentKind] = {
    "taxi-station": EnvironmentKind(
        TaxiStation.from_config,
        TaxiStation.validate,
        TaxiStation.effects_by_name,
        {"taxi-driver": taxi_driver},
    )
}


# -- running -------------------------------------------------------------------------


def build_organization(config: ScenarioConfig) -> Organization:
    return Organization(
        config.name,
        config.mode,
        config.roles,
        config.schema,
        config.norms,
        {a.name: a.domain for a in config.actions},
    )


def build_runtime(config: ScenarioConfig, seed: int | None = None) -> tuple[Runtime, Organization]:
    kind = ENVIRONMENT_KINDS[config.environment["kind"]]
    env = kind.build(config.environment, config.agents, config.seed if seed is None else seed)
    for spec in config.actions:
        if spec.effect is not None:
            env.register_effect(spec.name, env.effects[spec.effect])
    org = build_organization(config)
    runtime = Runtime(env)
    for spec in config.agents:
        backpack = org.join(spec.id, spec.roles)
        behaviors = [Behavior.cyclic(kind.behaviors[b]) for b in spec.behaviors]
        agent = runtime.spawn_agent(spec.id, behaviors, backpack)
        agent.facts.update(spec.facts)
    return runtime, org


def run_simulation(
    config: ScenarioConfig,
    ticks: int | None = None,
    seed: int | None = None,
    log: IO[str] | None = None,
) -> tuple[Runtime, list[EventRecord]]:
    """Run ``config`` and return the runtime (final state) and the event log.

    With ``log`` given, each record is written as one JSON line as it happens.
    """
    n = config.ticks if ticks is None else ticks
    if n < 1:
        raise ValueError("ticks must be at least 1")
    runtime, _ = build_runtime(config, seed)
    events: list[EventRecord] = []
    for _ in range(n):
        t = runtime.clock
        try:
            batch = runtime.tick()
        except (NormsimError, AssertionError) as exc:
            raise SimulationError(str(exc), t) from exc
        events.extend(batch)
        if log is not None:
            for record in batch:
                log.write(record.to_json() + "\n")
    return runtime, events


def format_event_log(events: Iterable[EventRecord]) -> str:
    return "".join(record.to_json() + "\n" for record in events)


def summarize(runtime: Runtime, events: list[EventRecord]) -> dict[str, Any]:
    env = runtime.environment
    by_status: dict[str, int] = {}
    for record in events:
        if record.status.name != "NOT_REGULATED":
            key = f"{record.action}:{record.status.name}:{record.decision.name}"
            by_status[key] = by_status.get(key, 0) + 1
    out: dict[str, Any] = {
        "ticks": runtime.clock,
        "events": len(events),
        "utility": {k: env.utility[k] for k in sorted(env.utility)},
        "violations": dict(sorted(env.violations.items())),
        "regulated_outcomes": dict(sorted(by_status.items())),
    }
    if isinstance(env, TaxiStation):
        out["pickups"] = len(env.pickups)
        out["arrivals"] = len(env.arrivals)
        out["customers_waiting"] = env.waiting
    return out
