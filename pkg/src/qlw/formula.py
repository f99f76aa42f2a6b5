"""Abstract and concrete syntax of the quantum propositional language.

Concrete syntax (ASCII)::

    ~A        not
    A & B     and
    A | B     or
    A -> B    implies (right associative, loosest)
    A &> B    sequential conjunction, "A and then B"
    1, 0      the always-true and always-false propositions

``~`` binds tightest, then ``&`` / ``&>`` (left associative; a chain must
use one of the two, mixing them needs parentheses), then ``|``, then ``->``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "Formula", "Elementary", "Top", "Bottom", "Not", "And", "Or", "Implies", "Seq",
    "ParseError", "parse", "render", "elementaries", "is_sequential",
    "to_dict", "from_dict", "RESERVED_WORDS",
]

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")

# English spellings of the connectives; refused as identifiers so that
# "A and B" reports a helpful error instead of a confusing one.
RESERVED_WORDS = frozenset({"and", "or", "not", "implies", "then", "true", "false"})


@dataclass(frozen=True)
class Elementary:
    name: str

    def __post_init__(self):
        if not isinstance(self.name, str) or not IDENT_RE.fullmatch(self.name):
            raise ValueError(f"invalid elementary proposition name: {self.name!r}")
        if self.name in RESERVED_WORDS:
            raise ValueError(f"reserved word used as a name: {self.name!r}")


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Seq:
    """Sequential conjunction: ``left`` tested first, then ``right``."""

    left: "Formula"
    right: "Formula"


Formula = Union[Elementary, Top, Bottom, Not, And, Or, Implies, Seq]

_BINARY = {"&": And, "|": Or, "->": Implies, "&>": Seq}
_SYMBOL = {And: "&", Or: "|", Implies: "->", Seq: "&>"}
_PREC = {Implies: 1, Or: 2, And: 3, Seq: 3, Not: 4}


class ParseError(ValueError):
    """Malformed formula text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        self.reason = message
        super().__init__(f"syntax error at position {position}: {message}")

    def pointer(self) -> str:
        """Two-line rendering of the input with a caret under the offending spot."""
        return f"{self.text}\n{' ' * self.position}^"


# --------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class _Token:
    kind: str  # one of the operator symbols, "(", ")", "1", "0", "ident", "end"
    text: str
    pos: int


_PUNCT = ("&>", "->", "~", "&", "|", "(", ")", "1", "0")


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        for sym in _PUNCT:
            if text.startswith(sym, i):
                tokens.append(_Token(sym, sym, i))
                i += len(sym)
                break
        else:
            m = IDENT_RE.match(text, i)
            if m is None:
                raise ParseError(f"unexpected character {ch!r}", text, i)
            word = m.group()
            if word in RESERVED_WORDS:
                raise ParseError(f"reserved word {word!r} cannot be used as a name", text, i)
            tokens.append(_Token("ident", word, i))
            i = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, self.text, tok.pos)

    def unexpected(self) -> ParseError:
        tok = self.tok
        if tok.kind == "end":
            return self.error("unexpected end of input")
        return self.error(f"unexpected {tok.text!r}")

    def parse(self) -> Formula:
        f = self.implication()
        if self.tok.kind != "end":
            raise self.unexpected()
        return f

    def implication(self) -> Formula:
        operands = [self.disjunction()]
        while self.tok.kind == "->":
            self.i += 1
            operands.append(self.disjunction())
        f = operands.pop()
        while operands:
            f = Implies(operands.pop(), f)
        return f

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.tok.kind == "|":
            self.i += 1
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        chain_op = None
        while self.tok.kind in ("&", "&>"):
            op = self.tok
            if chain_op is not None and op.kind != chain_op:
                raise self.error(f"cannot mix '&' and '&>' without parentheses", op)
            chain_op = op.kind
            self.i += 1
            f = _BINARY[op.kind](f, self.unary())
        return f

    def unary(self) -> Formula:
        negations = 0
        while self.tok.kind == "~":
            negations += 1
            self.i += 1
        f = self.atom()
        for _ in range(negations):
            f = Not(f)
        return f

    def atom(self) -> Formula:
        tok = self.tok
        if tok.kind == "ident":
            self.i += 1
            return Elementary(tok.text)
        if tok.kind == "1":
            self.i += 1
            return Top()
        if tok.kind == "0":
            self.i += 1
            return Bottom()
        if tok.kind == "(":
            self.i += 1
            f = self.implication()
            if self.tok.kind != ")":
                if self.tok.kind == "end":
                    raise self.error("missing ')'")
                raise self.unexpected()
            self.i += 1
            return f
        raise self.unexpected()


def parse(text: str) -> Formula:
    """Parse ``text`` into a formula tree.

    Raises ParseError (with a character offset) on any malformed input.
    """
    if not isinstance(text, str):
        raise TypeError("parse() expects a string")
    try:
        return _Parser(text).parse()
    except RecursionError:
        raise ParseError("formula nested too deeply", text, 0) from None


# --------------------------------------------------------------------------
# Printing


def _needs_parens(child: Formula, parent: type, side: str) -> bool:
    child_prec = _PREC.get(type(child), 5)
    parent_prec = _PREC[parent]
    if parent is Not:
        return child_prec < 4
    if child_prec != parent_prec:
        return child_prec < parent_prec
    if parent is Implies:
        return side == "left"
    # left-associative levels; & and &> never share a chain
    return side == "right" or type(child) is not parent


def render(f: Formula) -> str:
    """Text for ``f`` with the fewest parentheses that parse back to ``f``."""
    if isinstance(f, Elementary):
        return f.name
    if isinstance(f, Top):
        return "1"
    if isinstance(f, Bottom):
        return "0"
    if isinstance(f, Not):
        inner = render(f.child)
        return "~(" + inner + ")" if _needs_parens(f.child, Not, "") else "~" + inner
    kind = type(f)
    if kind not in _SYMBOL:
        raise TypeError(f"not a formula: {f!r}")
    left, right = render(f.left), render(f.right)
    if _needs_parens(f.left, kind, "left"):
        left = f"({left})"
    if _needs_parens(f.right, kind, "right"):
        right = f"({right})"
    return f"{left} {_SYMBOL[kind]} {right}"


# --------------------------------------------------------------------------
# Structural queries


def _walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or, Implies, Seq)):
            stack.append(node.right)
            stack.append(node.left)


def elementaries(f: Formula) -> set[str]:
    return {node.name for node in _walk(f) if isinstance(node, Elementary)}


def is_sequential(f: Formula) -> bool:
    """True if ``f`` contains a sequential conjunction anywhere."""
    return any(isinstance(node, Seq) for node in _walk(f))


def to_dict(f: Formula) -> dict:
    """JSON-ready tree, e.g. ``{"type": "Not", "child": {...}}``."""
    if isinstance(f, Elementary):
        return {"type": "Elementary", "name": f.name}
    if isinstance(f, (Top, Bottom)):
        return {"type": type(f).__name__}
    if isinstance(f, Not):
        return {"type": "Not", "child": to_dict(f.child)}
    return {"type": type(f).__name__, "left": to_dict(f.left), "right": to_dict(f.right)}


_NODE_TYPES = {cls.__name__: cls for cls in (Elementary, Top, Bottom, Not, And, Or, Implies, Seq)}


def from_dict(data: dict) -> Formula:
    cls = _NODE_TYPES.get(data.get("type"))
    if cls is None:
        raise ValueError(f"unknown node type: {data.get('type')!r}")
    if cls is Elementary:
        return Elementary(data["name"])
    if cls in (Top, Bottom):
        return cls()
    if cls is Not:
        return Not(from_dict(data["child"]))
    return cls(from_dict(data["left"]), from_dict(data["right"]))
