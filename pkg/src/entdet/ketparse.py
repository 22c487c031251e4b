"""Tokenizer, recursive-descent parser and evaluator for ket expressions.

Grammar::

    expr    := sign? term (('+' | '-') term)*
    term    := scalar? '*'? factor
    factor  := KET | '(' expr ')'
    scalar  := satom (('*' | '/') satom)*
    satom   := NUMBER 'i'? | 'i' | '-' satom | sqrt satom | '(' sexpr ')'
    sexpr   := scalar (('+' | '-') scalar)*

A parenthesised group is a scalar when it contains no ket, so
``(1/sqrt(2))(|000>+|111>)`` scales the second group by the first. Kets are
written ``|0120>``; ``√`` and ``⟩`` are accepted for ``sqrt`` and ``>``.
Positions in errors are byte offsets into the UTF-8 encoded source.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from .state import PureState

__all__ = [
    "KetSyntaxError",
    "LexError",
    "ParseError",
    "ArityError",
    "RangeError",
    "Token",
    "Scalar",
    "Ket",
    "Scale",
    "Sum",
    "Group",
    "tokenize",
    "parse",
    "parse_scalar",
    "evaluate",
    "expand",
    "parse_state",
    "format_state",
    "iter_expressions",
]


class KetSyntaxError(ValueError):
    """Any error raised while reading a ket expression.

    ``position`` is the byte offset of the offending input.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.message = message
        self.position = position


class LexError(KetSyntaxError):
    pass


class ParseError(KetSyntaxError):
    pass


class ArityError(ParseError):
    """Kets of different lengths in one expression."""


class RangeError(KetSyntaxError):
    """A ket digit at or above the declared local dimension."""


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Scalar:
    value: complex
    text: str = ""


@dataclass(frozen=True)
class Ket:
    digits: str
    position: int = 0


@dataclass(frozen=True)
class Scale:
    scalar: Scalar
    expr: "KetExpr"


@dataclass(frozen=True)
class Group:
    expr: "KetExpr"


@dataclass(frozen=True)
class Sum:
    terms: tuple[tuple[int, "KetExpr"], ...]


KetExpr = Union[Ket, Scale, Group, Sum]


# -- lexer -------------------------------------------------------------------

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_PUNCT = {
    "/": "slash",
    "*": "star",
    "+": "plus",
    "-": "minus",
    "(": "lparen",
    ")": "rparen",
}
_KET_CLOSE = (">", "⟩")


def tokenize(text: str) -> list[Token]:
    tokens = []
    # byte offset of every character index, plus the end
    offsets = [0]
    for ch in text:
        offsets.append(offsets[-1] + len(ch.encode("utf-8")))

    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, offsets[i]))
            i += 1
        elif ch == "√":
            tokens.append(Token("sqrt", ch, offsets[i]))
            i += 1
        elif text.startswith("sqrt", i):
            tokens.append(Token("sqrt", "sqrt", offsets[i]))
            i += 4
        elif ch in "ij" and not (i + 1 < n and text[i + 1].isalnum()):
            tokens.append(Token("imag", ch, offsets[i]))
            i += 1
        elif ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            m = _NUMBER.match(text, i)
            tokens.append(Token("number", m.group(), offsets[i]))
            i = m.end()
        elif ch == "|":
            i += 1
            while i < n and text[i] in "0123456789":
                i += 1
            if i >= n:
                raise LexError("unterminated ket", offsets[i])
            if text[i] not in _KET_CLOSE:
                raise LexError(f"invalid ket character {text[i]!r}", offsets[i])
            if i == start + 1:
                raise LexError("empty ket", offsets[i])
            i += 1
            tokens.append(Token("ket", text[start:i], offsets[start]))
        else:
            raise LexError(f"unexpected character {ch!r}", offsets[i])
    return tokens


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: Sequence[Token], end: int):
        self.toks = list(tokens)
        self.pos = 0
        self.end = end
        self.arity: int | None = None

    def peek(self, k: int = 0) -> Token | None:
        j = self.pos + k
        return self.toks[j] if j < len(self.toks) else None

    def kind(self, k: int = 0) -> str | None:
        t = self.peek(k)
        return t.kind if t else None

    def here(self) -> int:
        t = self.peek()
        return t.position if t else self.end

    def fail(self, what: str):
        t = self.peek()
        found = f"{t.text!r}" if t else "end of input"
        raise ParseError(f"expected {what}, found {found}", self.here())

    def take(self, kind: str, what: str | None = None) -> Token:
        if self.kind() != kind:
            self.fail(what or kind)
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def _matching(self, j: int) -> int | None:
        """Index of the rparen closing the lparen at ``j``."""
        depth = 0
        for k in range(j, len(self.toks)):
            if self.toks[k].kind == "lparen":
                depth += 1
            elif self.toks[k].kind == "rparen":
                depth -= 1
                if depth == 0:
                    return k
        return None

    def _scalar_group_at(self, j: int) -> bool:
        close = self._matching(j)
        if close is None:
            raise ParseError("unbalanced parenthesis", self.toks[j].position)
        return not any(t.kind == "ket" for t in self.toks[j:close])

    def starts_scalar(self) -> bool:
        k = self.kind()
        if k in ("number", "imag", "sqrt"):
            return True
        if k == "lparen":
            return self._scalar_group_at(self.pos)
        return False

    # expressions

    def expr(self) -> Sum:
        terms = []
        sign = 1
        if self.kind() in ("plus", "minus"):
            sign = -1 if self.take(self.kind()).kind == "minus" else 1
        terms.append((sign, self.term()))
        while self.kind() in ("plus", "minus"):
            sign = -1 if self.take(self.kind()).kind == "minus" else 1
            terms.append((sign, self.term()))
        return Sum(tuple(terms))

    def term(self) -> KetExpr:
        if self.starts_scalar():
            start = self.pos
            value = self.scalar()
            text = "".join(t.text for t in self.toks[start:self.pos])
            if self.kind() == "star":
                self.pos += 1
            if self.kind() not in ("ket", "lparen"):
                self.fail("a ket or '(' after a coefficient")
            return Scale(Scalar(value, text), self.factor())
        return self.factor()

    def factor(self) -> KetExpr:
        k = self.kind()
        if k == "ket":
            t = self.take("ket")
            digits = t.text[1:-1]
            if self.arity is None:
                self.arity = len(digits)
            elif len(digits) != self.arity:
                raise ArityError(
                    f"ket {t.text} has {len(digits)} sites, expected {self.arity}", t.position
                )
            return Ket(digits, t.position)
        if k == "lparen":
            open_tok = self.take("lparen")
            inner = self.expr()
            if self.kind() != "rparen":
                if self.peek() is None:
                    raise ParseError("unbalanced parenthesis", open_tok.position)
                self.fail("')'")
            self.pos += 1
            return Group(inner)
        self.fail("a ket or '('")

    # scalars

    def scalar(self) -> complex:
        value = self.satom()
        while self.kind() in ("star", "slash"):
            # '*' directly before a ket/group is the implicit scaling star
            if self.kind() == "star" and self.kind(1) in ("ket",):
                break
            if self.kind() == "star" and self.kind(1) == "lparen" and not self._scalar_group_at(self.pos + 1):
                break
            op = self.take(self.kind())
            rhs = self.satom()
            if op.kind == "star":
                value *= rhs
            else:
                if rhs == 0:
                    raise ParseError("division by zero", op.position)
                value /= rhs
        return value

    def satom(self) -> complex:
        k = self.kind()
        if k == "number":
            t = self.take("number")
            value = complex(float(t.text))
            if self.kind() == "imag":
                self.pos += 1
                value *= 1j
            return value
        if k == "imag":
            self.pos += 1
            return 1j
        if k == "minus":
            self.pos += 1
            return -self.satom()
        if k == "sqrt":
            t = self.take("sqrt")
            arg = self.satom()
            if arg.imag == 0 and arg.real >= 0:
                return complex(math.sqrt(arg.real))
            if arg.imag == 0:
                raise ParseError("square root of a negative number", t.position)
            return cmath.sqrt(arg)
        if k == "lparen":
            open_tok = self.take("lparen")
            value = self.sexpr()
            if self.kind() != "rparen":
                if self.peek() is None:
                    raise ParseError("unbalanced parenthesis", open_tok.position)
                self.fail("')'")
            self.pos += 1
            return value
        self.fail("a number")

    def sexpr(self) -> complex:
        value = self.scalar()
        while self.kind() in ("plus", "minus"):
            op = self.take(self.kind())
            rhs = self.scalar()
            value = value + rhs if op.kind == "plus" else value - rhs
        return value


def _source_end(tokens: Sequence[Token], text: str | None) -> int:
    if text is not None:
        return len(text.encode("utf-8"))
    if not tokens:
        return 0
    last = tokens[-1]
    return last.position + len(last.text.encode("utf-8"))


def parse(tokens: Sequence[Token] | str) -> Sum:
    """Parse a token list (or raw text) into a :class:`Sum` tree."""
    text = None
    if isinstance(tokens, str):
        text = tokens
        tokens = tokenize(text)
    p = _Parser(tokens, _source_end(tokens, text))
    if p.peek() is None:
        raise ParseError("empty expression", p.end)
    tree = p.expr()
    if p.peek() is not None:
        if p.kind() == "rparen":
            raise ParseError("unbalanced parenthesis", p.here())
        p.fail("'+', '-' or end of input")
    return tree


def parse_scalar(text: str) -> complex:
    """Parse a bare coefficient such as ``1/sqrt(2)`` or ``(0.5-0.5i)``."""
    tokens = tokenize(text)
    p = _Parser(tokens, len(text.encode("utf-8")))
    if p.peek() is None:
        raise ParseError("empty expression", 0)
    value = p.sexpr()
    if p.peek() is not None:
        p.fail("end of input")
    return value


# -- evaluation --------------------------------------------------------------


def expand(expr: KetExpr) -> Iterator[tuple[complex, Ket]]:
    """Yield ``(coefficient, ket)`` pairs of the fully distributed expression."""
    if isinstance(expr, Ket):
        yield 1.0 + 0j, expr
    elif isinstance(expr, Scale):
        for c, k in expand(expr.expr):
            yield expr.scalar.value * c, k
    elif isinstance(expr, Group):
        yield from expand(expr.expr)
    elif isinstance(expr, Sum):
        for sign, sub in expr.terms:
            for c, k in expand(sub):
                yield (c if sign > 0 else -c), k
    else:
        raise TypeError(f"not a ket expression node: {expr!r}")


def evaluate(expr: KetExpr, dims: Sequence[int] | None = None) -> PureState:
    """Accumulate amplitudes per basis ket. The result is not normalized.

    Without ``dims`` each slot gets ``max(2, 1 + largest digit seen)``.
    """
    pairs = list(expand(expr))
    arity = len(pairs[0][1].digits)
    if dims is None:
        top = [0] * arity
        for _, k in pairs:
            for s, ch in enumerate(k.digits):
                top[s] = max(top[s], int(ch))
        dims = [max(2, t + 1) for t in top]
    dims = tuple(int(d) for d in dims)
    if len(dims) != arity:
        raise RangeError(f"expression has {arity} sites but {len(dims)} dims were given", 0)

    amps = np.zeros(math.prod(dims), dtype=np.complex128)
    for c, k in pairs:
        off = 0
        for s, ch in enumerate(k.digits):
            b = int(ch)
            if b >= dims[s]:
                raise RangeError(
                    f"digit {b} in {k.digits!r} exceeds dimension {dims[s]} of site {s + 1}",
                    k.position + 1 + s,
                )
            off = off * dims[s] + b
        amps[off] += c
    return PureState(dims, amps)


def parse_state(text: str, dims: Sequence[int] | None = None) -> PureState:
    return evaluate(parse(tokenize(text)), dims)


def _digits(off: int, dims: Sequence[int]) -> str:
    out = []
    for d in reversed(dims):
        off, b = divmod(off, d)
        out.append(str(b))
    return "".join(reversed(out))


def _coef(z: complex) -> str:
    return f"({z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}i)"


def format_state(state: PureState) -> str:
    """Basis expansion that :func:`parse_state` reads back exactly.

    Only single-digit local dimensions (< 11) can be written as kets.
    """
    if max(state.dims) > 10:
        raise ValueError("ket notation needs local dimensions <= 10")
    terms = [
        f"{_coef(complex(z))}|{_digits(off, state.dims)}>"
        for off, z in enumerate(state.amps)
        if z != 0
    ]
    if not terms:
        return f"0|{'0' * state.n_sites}>"
    return " + ".join(terms)


def iter_expressions(text: str) -> Iterator[tuple[int, str]]:
    """Yield ``(line_number, expression)`` from a file body; '#' starts a comment."""
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line
