"""Random generators shared by the property and acceptance tests."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from normsim.dsl import Binary, Call, Expression, Identifier, Literal, Unary
from normsim.engine import EngineMode, NormStore
from normsim.norms import ActionDescriptor, DeonticType, Issuer, Norm
from normsim.dsl import EvaluationContext, HostFunction

KEYWORDS = {"and", "or", "not", "true", "false"}
BINARY_OPS = ["and", "or", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/"]
NAMES = ["a", "b", "x1", "_tmp", "taxiCapacity", "NumClientsWaiting", "Q_9", "f", "g"]


def random_float(rng: random.Random) -> float:
    kind = rng.randrange(5)
    if kind == 0:
        return float(rng.randint(-20, 20))
    if kind == 1:
        return rng.uniform(-1e3, 1e3)
    if kind == 2:
        return rng.choice([0.0, -0.0, 0.1, 1e-300, 1.7976931348623157e308, 5e-324, 1e16, 123456789.125])
    if kind == 3:
        return float(rng.randint(0, 10**18))
    return rng.random()


def random_ast(rng: random.Random, depth: int = 5) -> Expression:
    """Grammar-shaped random tree; not necessarily well typed."""
    if depth <= 0 or rng.random() < 0.25:
        pick = rng.randrange(3)
        if pick == 0:
            return Literal(rng.random() < 0.5)
        if pick == 1:
            return Literal(random_float(rng))
        return Identifier(rng.choice(NAMES))
    pick = rng.randrange(10)
    if pick < 2:
        return Unary(rng.choice(["not", "-"]), random_ast(rng, depth - 1))
    if pick < 9:
        return Binary(rng.choice(BINARY_OPS), random_ast(rng, depth - 1), random_ast(rng, depth - 1))
    return Call(rng.choice(NAMES), tuple(random_ast(rng, depth - 1) for _ in range(rng.randrange(4))))


_finite = st.floats(allow_nan=False, allow_infinity=False)
_names = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True).filter(lambda s: s not in KEYWORDS)

asts = st.recursive(
    st.one_of(st.booleans().map(Literal), _finite.map(Literal), _names.map(Identifier)),
    lambda kids: st.one_of(
        st.builds(Unary, st.sampled_from(["not", "-"]), kids),
        st.builds(Binary, st.sampled_from(BINARY_OPS), kids, kids),
        st.builds(Call, _names, st.lists(kids, max_size=3).map(tuple)),
    ),
    max_leaves=25,
)


# -- norm sets -------------------------------------------------------------------

NUM_VARS = ["n0", "n1", "n2", "n3"]
BOOL_VARS = ["b0", "b1"]
ROLES = ["DRIVER", "CUSTOMER", "MANAGER"]
DOMAINS = ["DEFAULT", "QUEUE", "PICKING"]
AMOUNTS = [0.0, 0.1, 0.2, 0.3, 0.7, 1.0, 2.5, 1e-3, 5.0, 1e16, 3.3]


def _num_expr(rng: random.Random, depth: int) -> Expression:
    if depth <= 0 or rng.random() < 0.5:
        if rng.random() < 0.6:
            return Identifier(rng.choice(NUM_VARS))
        return Literal(float(rng.randint(-3, 6)))
    op = rng.choice(["+", "-", "*", "/"])
    return Binary(op, _num_expr(rng, depth - 1), _num_expr(rng, depth - 1))


def random_condition(rng: random.Random, depth: int = 2) -> Expression:
    roll = rng.random()
    if depth <= 0 or roll < 0.45:
        cmp = rng.choice(["==", "!=", "<", "<=", ">", ">="])
        return Binary(cmp, _num_expr(rng, 1), _num_expr(rng, 1))
    if roll < 0.55:
        return Identifier(rng.choice(BOOL_VARS))
    if roll < 0.62:
        return Literal(rng.random() < 0.5)
    if roll < 0.7:
        return Unary("not", random_condition(rng, depth - 1))
    if roll < 0.73:
        # sometimes ill typed: a number where a boolean is required
        return _num_expr(rng, 1)
    if roll < 0.76:
        return Call("probe", (Identifier(rng.choice(NUM_VARS)),))
    return Binary(rng.choice(["and", "or"]), random_condition(rng, depth - 1), random_condition(rng, depth - 1))


def random_norm(rng: random.Random, norm_id: str, deontic: DeonticType) -> Norm:
    roles = None if rng.random() < 0.3 else frozenset(rng.sample(ROLES, rng.randint(1, 2)))
    activation = None
    if rng.random() < 0.4:
        activation = random_condition(rng, 1)
    return Norm(
        id=norm_id,
        deontic_type=deontic,
        condition=random_condition(rng),
        activation=activation,
        reward=rng.choice(AMOUNTS),
        penalty=-rng.choice(AMOUNTS),
        roles=roles,
        domain=rng.choice(DOMAINS),
        inviolable=rng.random() < 0.3,
        issuer=rng.choice(list(Issuer)),
    )


def random_norms(rng: random.Random, n: int, deontic: DeonticType, prefix: str = "n") -> list[Norm]:
    return [random_norm(rng, f"{prefix}{i}", deontic) for i in range(n)]


def random_context(rng: random.Random, missing_rate: float = 0.03) -> EvaluationContext:
    agent, env = {}, {}
    for name in NUM_VARS:
        if rng.random() < missing_rate:
            continue
        layer = agent if rng.random() < 0.5 else env
        layer[name] = rng.choice([0, 1, 2, 3, -1, 0.5, 4, 6])
    for name in BOOL_VARS:
        if rng.random() < missing_rate:
            continue
        (agent if rng.random() < 0.5 else env)[name] = rng.random() < 0.5
    return EvaluationContext(agent, env, {"probe": HostFunction(1, lambda v: v > 1)})


def random_action(rng: random.Random) -> ActionDescriptor:
    return ActionDescriptor(rng.choice(["Act0", "Act1", "Act2", "Unreg"]), rng.choice(DOMAINS))


def random_roles(rng: random.Random) -> frozenset[str]:
    return frozenset(r for r in ROLES if rng.random() < 0.4)


def random_store(rng: random.Random, n_norms: int) -> tuple[NormStore, EngineMode]:
    mode = rng.choice(list(EngineMode))
    store = NormStore(mode, random_norms(rng, n_norms, mode.deontic_type))
    for name in ("Act0", "Act1", "Act2"):
        store.register_action(name, rng.choice(DOMAINS))
    return store, mode
