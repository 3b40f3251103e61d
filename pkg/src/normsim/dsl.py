"""Condition language used in the ``condition`` and ``activation`` fields of norms.

The grammar, loosest binding first::

    or_expr   := and_expr ("or" and_expr)*
    and_expr  := not_expr ("and" not_expr)*
    not_expr  := "not" not_expr | cmp_expr
    cmp_expr  := add_expr (CMP add_expr)?          # non-associative
    add_expr  := mul_expr (("+" | "-") mul_expr)*
    mul_expr  := unary (("*" | "/") unary)*
    unary     := "-" unary | primary
    primary   := NUMBER | BOOL | IDENT | IDENT "(" args? ")" | "(" or_expr ")"

A ``-`` directly followed by a number literal folds into a negative literal,
so ``-3`` parses as ``Literal(-3.0)`` while ``-(3)`` stays a negation node.

Values are ``bool``, ``float`` or ``str``. Integers are widened to float on
entry (literals and bindings), and ``bool`` is never treated as a number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, Union

from .errors import (
    ArityMismatch,
    DivisionByZero,
    EvaluationError,
    LexError,
    ParseError,
    TypeMismatch,
    UnknownFunction,
    UnresolvedIdentifier,
)

Value = Union[bool, float, str]

KEYWORD_OPS = frozenset({"and", "or", "not"})
BOOL_WORDS = {"true": True, "false": False}
COMPARISONS = frozenset({"==", "!=", "<", "<=", ">", ">="})
ARITHMETIC = frozenset({"+", "-", "*", "/"})


class TokenKind(Enum):
    IDENT = "IDENT"
    INT = "INT"
    FLOAT = "FLOAT"
    BOOL = "BOOL"
    OP = "OP"
    LPAREN = "LPAREN"
    RPAREN = "RPAREN"
    COMMA = "COMMA"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    offset: int


# -- lexer --------------------------------------------------------------------

_NUMBER = re.compile(r"\d+(\.\d+)?([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TWO_CHAR_OPS = ("==", "!=", "<=", ">=")
_ONE_CHAR_OPS = "<>+-*/"


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens.

    Offsets are character positions. Every valid token is ASCII, so up to the
    first non-ASCII character (which is always a lex error) character and byte
    offsets coincide.
    """
    tokens: list[Token] = []
    pos = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch in " \t\r\n":
            pos += 1
            continue
        if ch.isascii() and ch.isdigit():
            m = _NUMBER.match(source, pos)
            assert m is not None
            end = m.end()
            if end < n and source[end] in ".eE":
                raise LexError("unterminated number", end)
            if end < n and (source[end].isalnum() or source[end] == "_"):
                raise LexError("malformed number", end)
            lexeme = m.group()
            kind = TokenKind.FLOAT if (m.group(1) or m.group(2)) else TokenKind.INT
            tokens.append(Token(kind, lexeme, pos))
            pos = end
            continue
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            m = _IDENT.match(source, pos)
            assert m is not None
            word = m.group()
            if word in BOOL_WORDS:
                kind = TokenKind.BOOL
            elif word in KEYWORD_OPS:
                kind = TokenKind.OP
            else:
                kind = TokenKind.IDENT
            tokens.append(Token(kind, word, pos))
            pos = m.end()
            continue
        two = source[pos : pos + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token(TokenKind.OP, two, pos))
            pos += 2
            continue
        if ch in "=!":
            raise LexError(f"unterminated operator {ch!r}", pos)
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token(TokenKind.OP, ch, pos))
        elif ch == "(":
            tokens.append(Token(TokenKind.LPAREN, ch, pos))
        elif ch == ")":
            tokens.append(Token(TokenKind.RPAREN, ch, pos))
        elif ch == ",":
            tokens.append(Token(TokenKind.COMMA, ch, pos))
        else:
            raise LexError(f"unexpected character {ch!r}", pos)
        pos += 1
    return tokens


# -- AST ------------------------------------------------------------------------
# ``offset`` points back into the source and is excluded from equality so that
# structurally identical trees compare equal regardless of formatting.


@dataclass(frozen=True)
class Literal:
    value: Value
    offset: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Identifier:
    name: str
    offset: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "not" | "-"
    operand: "Expression"
    offset: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expression"
    right: "Expression"
    offset: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expression", ...]
    offset: int = field(default=0, compare=False, repr=False)


Expression = Union[Literal, Identifier, Unary, Binary, Call]

TRUE = Literal(True)


# -- parser -----------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token], source_len: int):
        self.tokens = tokens
        self.pos = 0
        self.end_offset = source_len

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def here(self) -> int:
        tok = self.peek()
        return tok.offset if tok is not None else self.end_offset

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is TokenKind.OP and tok.lexeme in ops

    def parse(self) -> Expression:
        if not self.tokens:
            raise ParseError("empty expression", 0, ("expression",))
        expr = self.or_expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected token {tok.lexeme!r}", tok.offset, ("end of input",))
        return expr

    def or_expr(self) -> Expression:
        left = self.and_expr()
        while self.at_op("or"):
            tok = self.advance()
            left = Binary("or", left, self.and_expr(), tok.offset)
        return left

    def and_expr(self) -> Expression:
        left = self.not_expr()
        while self.at_op("and"):
            tok = self.advance()
            left = Binary("and", left, self.not_expr(), tok.offset)
        return left

    def not_expr(self) -> Expression:
        if self.at_op("not"):
            tok = self.advance()
            return Unary("not", self.not_expr(), tok.offset)
        return self.cmp_expr()

    def cmp_expr(self) -> Expression:
        left = self.add_expr()
        if self.at_op(*COMPARISONS):
            tok = self.advance()
            left = Binary(tok.lexeme, left, self.add_expr(), tok.offset)
            if self.at_op(*COMPARISONS):
                raise ParseError("non-associative comparison", self.here())
        return left

    def add_expr(self) -> Expression:
        left = self.mul_expr()
        while self.at_op("+", "-"):
            tok = self.advance()
            left = Binary(tok.lexeme, left, self.mul_expr(), tok.offset)
        return left

    def mul_expr(self) -> Expression:
        left = self.unary()
        while self.at_op("*", "/"):
            tok = self.advance()
            left = Binary(tok.lexeme, left, self.unary(), tok.offset)
        return left

    def unary(self) -> Expression:
        if self.at_op("-"):
            tok = self.advance()
            nxt = self.peek()
            if nxt is not None and nxt.kind in (TokenKind.INT, TokenKind.FLOAT):
                self.advance()
                return Literal(-float(nxt.lexeme), tok.offset)
            return Unary("-", self.unary(), tok.offset)
        return self.primary()

    def primary(self) -> Expression:
        tok = self.peek()
        expected = ("number", "boolean", "identifier", "(", "not", "-")
        if tok is None:
            raise ParseError("unexpected end of input", self.end_offset, expected)
        if tok.kind in (TokenKind.INT, TokenKind.FLOAT):
            self.advance()
            return Literal(float(tok.lexeme), tok.offset)
        if tok.kind is TokenKind.BOOL:
            self.advance()
            return Literal(BOOL_WORDS[tok.lexeme], tok.offset)
        if tok.kind is TokenKind.IDENT:
            self.advance()
            nxt = self.peek()
            if nxt is not None and nxt.kind is TokenKind.LPAREN:
                self.advance()
                return Call(tok.lexeme, self.arguments(), tok.offset)
            return Identifier(tok.lexeme, tok.offset)
        if tok.kind is TokenKind.LPAREN:
            self.advance()
            inner = self.or_expr()
            self.expect_rparen()
            return inner
        raise ParseError(f"unexpected token {tok.lexeme!r}", tok.offset, expected)

    def arguments(self) -> tuple[Expression, ...]:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.RPAREN:
            self.advance()
            return ()
        args = [self.or_expr()]
        while True:
            tok = self.peek()
            if tok is not None and tok.kind is TokenKind.COMMA:
                self.advance()
                args.append(self.or_expr())
                continue
            self.expect_rparen()
            return tuple(args)

    def expect_rparen(self) -> None:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.RPAREN:
            raise ParseError("missing closing parenthesis", self.here(), (")",))
        self.advance()


def parse(tokens: list[Token], source_len: int | None = None) -> Expression:
    """Build an AST from a token list produced by :func:`tokenize`."""
    if source_len is None:
        source_len = tokens[-1].offset + len(tokens[-1].lexeme) if tokens else 0
    return _Parser(tokens, source_len).parse()


def parse_expression(source: str) -> Expression:
    return parse(tokenize(source), len(source))


# -- printer ------------------------------------------------------------------------


def _format_number(x: float) -> str:
    text = repr(float(x))
    if not math.isfinite(x):
        raise ValueError(f"cannot print non-finite literal {text}")
    return text


def pretty_print(expr: Expression) -> str:
    """Render ``expr`` fully parenthesised; the output reparses to an equal tree."""
    if isinstance(expr, Literal):
        v = expr.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return _format_number(v)
        raise ValueError("string literals have no source syntax")
    if isinstance(expr, Identifier):
        return expr.name
    if isinstance(expr, Unary):
        if expr.op == "not":
            return f"(not {pretty_print(expr.operand)})"
        # the inner parentheses stop "-" from folding into a numeric literal
        return f"(-({pretty_print(expr.operand)}))"
    if isinstance(expr, Binary):
        return f"({pretty_print(expr.left)} {expr.op} {pretty_print(expr.right)})"
    if isinstance(expr, Call):
        return f"{expr.name}({', '.join(pretty_print(a) for a in expr.args)})"
    raise TypeError(f"not an expression node: {expr!r}")


def walk(expr: Expression) -> Iterable[Expression]:
    """Yield every node of ``expr`` in pre-order."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Unary):
            stack.append(node.operand)
        elif isinstance(node, Binary):
            stack.extend((node.right, node.left))
        elif isinstance(node, Call):
            stack.extend(reversed(node.args))


def identifiers(expr: Expression) -> set[str]:
    return {n.name for n in walk(expr) if isinstance(n, Identifier)}


def calls(expr: Expression) -> list[Call]:
    return [n for n in walk(expr) if isinstance(n, Call)]


# -- evaluation ---------------------------------------------------------------------


@dataclass(frozen=True)
class HostFunction:
    """A predefined function the environment exposes to conditions."""

    arity: int
    fn: Callable[..., Any]

    def __call__(self, *args: Value) -> Any:
        return self.fn(*args)


def coerce_value(value: Any) -> Value:
    """Normalise a host value to the language's value domain."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return value
    raise TypeError(f"unsupported value type {type(value).__name__}")


class EvaluationContext:
    """Two binding layers (agent over environment) plus a function registry.

    Lookup checks the agent layer first; a miss in both layers is an error.
    """

    __slots__ = ("agent", "environment", "functions")

    def __init__(
        self,
        agent: Mapping[str, Any] | None = None,
        environment: Mapping[str, Any] | None = None,
        functions: Mapping[str, HostFunction] | None = None,
    ):
        self.agent = {k: coerce_value(v) for k, v in (agent or {}).items()}
        self.environment = {k: coerce_value(v) for k, v in (environment or {}).items()}
        self.functions = dict(functions or {})

    def lookup(self, name: str, node: Any = None) -> Value:
        if name in self.agent:
            return self.agent[name]
        if name in self.environment:
            return self.environment[name]
        raise UnresolvedIdentifier(name, node)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EvaluationContext):
            return NotImplemented
        return (self.agent, self.environment, self.functions) == (
            other.agent,
            other.environment,
            other.functions,
        )

    def __repr__(self) -> str:
        return f"EvaluationContext(agent={self.agent!r}, environment={self.environment!r})"


def _tag(v: Value) -> str:
    if isinstance(v, bool):
        return "Boolean"
    if isinstance(v, float):
        return "Number"
    return "String"


def _need(v: Value, tag: str, node: Expression, op: str) -> None:
    if _tag(v) != tag:
        raise TypeMismatch(f"operator {op!r} expects {tag}, got {_tag(v)}", node)


def evaluate(expr: Expression, ctx: EvaluationContext) -> Value:
    """Evaluate ``expr`` strictly, except that ``and``/``or`` short-circuit."""
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Identifier):
        return ctx.lookup(expr.name, expr)
    if isinstance(expr, Unary):
        v = evaluate(expr.operand, ctx)
        if expr.op == "not":
            _need(v, "Boolean", expr, "not")
            return not v
        _need(v, "Number", expr, "-")
        return -v
    if isinstance(expr, Binary):
        op = expr.op
        if op in ("and", "or"):
            left = evaluate(expr.left, ctx)
            _need(left, "Boolean", expr, op)
            if op == "and" and not left:
                return False
            if op == "or" and left:
                return True
            right = evaluate(expr.right, ctx)
            _need(right, "Boolean", expr, op)
            return right
        left = evaluate(expr.left, ctx)
        right = evaluate(expr.right, ctx)
        if op in ("==", "!="):
            if _tag(left) != _tag(right):
                raise TypeMismatch(
                    f"cannot compare {_tag(left)} with {_tag(right)}", expr
                )
            return (left == right) if op == "==" else (left != right)
        _need(left, "Number", expr, op)
        _need(right, "Number", expr, op)
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if right == 0.0:
                raise DivisionByZero("division by zero", expr)
            return left / right
        raise EvaluationError(f"unknown operator {op!r}", expr)
    if isinstance(expr, Call):
        func = ctx.functions.get(expr.name)
        if func is None:
            raise UnknownFunction(expr.name, expr)
        if len(expr.args) != func.arity:
            raise ArityMismatch(
                f"{expr.name} takes {func.arity} argument(s), got {len(expr.args)}", expr
            )
        args = [evaluate(a, ctx) for a in expr.args]
        result = func(*args)
        try:
            return coerce_value(result)
        except TypeError:
            raise TypeMismatch(
                f"{expr.name} returned unsupported {type(result).__name__}", expr
            ) from None
    raise TypeError(f"not an expression node: {expr!r}")


def evaluate_bool(expr: Expression, ctx: EvaluationContext, what: str = "condition") -> bool:
    v = evaluate(expr, ctx)
    if not isinstance(v, bool):
        raise TypeMismatch(f"{what} must be Boolean, got {_tag(v)}", expr)
    return v
