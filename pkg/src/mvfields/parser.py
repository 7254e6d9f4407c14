"""Lexer and Pratt parser for the ``.mvf`` field-definition format.

Statements, one per line (newlines inside brackets are ignored)::

    dim 3
    domain [0.5, 1.5], [0.5, 1.5], [-1, 1]
    field F = x1*b1 + sin(x2)*(b1^b2)
    chart polar { forward: e1, e2; inverse: e1, e2; domain: [..], [..]; tol: 1e-9 }
    extensor S = [[e11, e12], [e21, e22]]

Expression operators, loosest first: ``+ -``; then ``^ * _| |_ . /`` at one
left-associative level; unary minus; function calls and atoms.  ``#``
starts a comment.  Errors carry a :class:`SourceSpan` and render as
``line:col: message``.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Iterator

from .errors import MvfError
from .expr import (
    FUNCTIONS,
    MULTIPLICATIVE,
    Basis,
    BinOp,
    Call,
    Coord,
    Neg,
    Node,
    Num,
    SourceSpan,
    max_indices,
    possible_grades,
    sexpr,
)

KEYWORDS = ("dim", "domain", "field", "chart", "extensor")


class ParseError(MvfError):
    """Syntax or static-semantic error with a source location."""

    def __init__(self, message: str, span: SourceSpan, text: str | None = None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.text = text

    def location(self) -> tuple[int, int]:
        if self.text is None:
            return (1, self.span.start + 1)
        return line_col(self.text, self.span.start)

    def diagnostic(self) -> str:
        line, col = self.location()
        return f"{line}:{col}: {self.message}"

    def __str__(self):
        return self.diagnostic()


def line_col(text: str, byte_offset: int) -> tuple[int, int]:
    """1-based line and column (in characters) of a byte offset."""
    data = text.encode("utf-8")[:byte_offset].decode("utf-8", errors="ignore")
    line = data.count("\n") + 1
    col = len(data) - (data.rfind("\n") + 1) + 1
    return line, col


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # NUM, NAME, OP, NEWLINE, EOF
    text: str
    span: SourceSpan


_NUMBER = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z][A-Za-z0-9]*(?:_(?!\|)[A-Za-z0-9]*)*")
_OPERATORS = ("_|", "|_", "+", "-", "^", "*", ".", "/", "(", ")", "[", "]", "{", "}", ",", ";", ":", "=")
_OPEN, _CLOSE = "([{", ")]}"


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens; newlines inside brackets are dropped."""
    offsets = _byte_offsets(text)
    tokens: list[Token] = []
    depth = 0
    i = 0
    length = len(text)

    def span(a: int, b: int) -> SourceSpan:
        return SourceSpan(offsets[a], offsets[b])

    while i < length:
        c = text[i]
        if c == "\n":
            if depth == 0:
                tokens.append(Token("NEWLINE", "\n", span(i, i + 1)))
            i += 1
            continue
        if c in " \t\r":
            i += 1
            continue
        if c == "#":
            while i < length and text[i] != "\n":
                i += 1
            continue
        m = _NUMBER.match(text, i)
        if m:
            tokens.append(Token("NUM", m.group(), span(i, m.end())))
            i = m.end()
            continue
        m = _NAME.match(text, i)
        if m:
            tokens.append(Token("NAME", m.group(), span(i, m.end())))
            i = m.end()
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                if op in _OPEN:
                    depth += 1
                elif op in _CLOSE:
                    depth = max(0, depth - 1)
                tokens.append(Token("OP", op, span(i, i + len(op))))
                i += len(op)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", span(i, i + 1), text)
    tokens.append(Token("EOF", "", span(length, length)))
    return tokens


def _byte_offsets(text: str) -> list[int]:
    if text.isascii():
        return list(range(len(text) + 1))
    out = [0]
    for ch in text:
        out.append(out[-1] + len(ch.encode("utf-8")))
    return out


# ---------------------------------------------------------------------------
# file model
# ---------------------------------------------------------------------------

Box = tuple[tuple[float, float], ...]


@dataclass
class ChartDef:
    name: str
    forward: tuple[Node, ...]
    inverse: tuple[Node, ...]
    domain: Box | None = None
    tol: float = 1e-9
    span: SourceSpan = field(default=SourceSpan(0, 0), compare=False, repr=False)


@dataclass
class FieldFile:
    dim: int
    domain: Box | None = None
    fields: dict[str, Node] = field(default_factory=dict)
    charts: dict[str, ChartDef] = field(default_factory=dict)
    extensors: dict[str, tuple[tuple[Node, ...], ...]] = field(default_factory=dict)
    text: str = field(default="", repr=False, compare=False)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

# binding powers for the Pratt loop
_BP_ADD, _BP_MUL = 10, 20


class Parser:
    def __init__(self, text: str, dim: int | None = None):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.dim = dim

    # -- token helpers ------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def prev(self) -> Token:
        return self.tokens[max(0, self.pos - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at_op(self, *ops: str) -> bool:
        return self.tok.kind == "OP" and self.tok.text in ops

    def error(self, message: str, span: SourceSpan | None = None) -> ParseError:
        return ParseError(message, span or self.tok.span, self.text)

    def describe(self, t: Token) -> str:
        if t.kind == "EOF":
            return "end of input"
        if t.kind == "NEWLINE":
            return "end of line"
        return f"{t.text!r}"

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            raise self.error(f"expected {op!r}, found {self.describe(self.tok)}")
        return self.advance()

    def expect_name(self, what: str) -> Token:
        if self.tok.kind != "NAME":
            raise self.error(f"expected {what}, found {self.describe(self.tok)}")
        return self.advance()

    # -- expressions --------------------------------------------------------
    def expression(self, min_bp: int = 0) -> Node:
        left = self.unary()
        while True:
            t = self.tok
            if t.kind != "OP":
                break
            if t.text in ("+", "-"):
                bp = _BP_ADD
            elif t.text in MULTIPLICATIVE:
                bp = _BP_MUL
            else:
                break
            if bp < min_bp:
                break
            self.advance()
            # left-associative: the right operand binds strictly tighter
            right = self.expression(bp + 1)
            left = BinOp(t.text, left, right, SourceSpan(_start(left), _end(right)))
        return left

    def unary(self) -> Node:
        if self.at_op("-"):
            t = self.advance()
            operand = self.unary()
            return Neg(operand, SourceSpan(t.span.start, _end(operand)))
        return self.atom()

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "NUM":
            self.advance()
            return Num(float(t.text), t.span)
        if t.kind == "NAME":
            self.advance()
            return self.name_atom(t)
        if self.at_op("("):
            self.advance()
            inner = self.expression()
            close = self.expect_op(")")
            return _respan(inner, SourceSpan(t.span.start, close.span.end))
        if t.kind in ("EOF", "NEWLINE") or self.at_op(";", ",", ")", "]", "}"):
            p = self.prev()
            if p.kind == "OP" and p.text not in ("(", "[", "{", ",", ";", ":"):
                raise self.error(f"expected expression after {p.text!r}", p.span)
            raise self.error(f"expected expression, found {self.describe(t)}")
        raise self.error(f"expected expression, found {self.describe(t)}")

    def name_atom(self, t: Token) -> Node:
        name = t.text
        m = re.fullmatch(r"([xb])(\d+)", name)
        if m:
            index = int(m.group(2))
            kind = "coordinate" if m.group(1) == "x" else "basis vector"
            if index < 1:
                raise self.error(f"{kind} index must be at least 1", t.span)
            if self.dim is not None and index > self.dim:
                raise self.error(f"{kind} {name} exceeds dimension {self.dim}", t.span)
            return Coord(index, t.span) if m.group(1) == "x" else Basis(index, t.span)
        if name in FUNCTIONS:
            if not self.at_op("("):
                raise self.error(f"function {name!r} must be called with arguments", t.span)
            self.advance()
            args = [self.expression()]
            while self.at_op(","):
                self.advance()
                args.append(self.expression())
            close = self.expect_op(")")
            span = SourceSpan(t.span.start, close.span.end)
            arity = FUNCTIONS[name]
            if len(args) != arity:
                plural = "s" if arity != 1 else ""
                raise self.error(f"{name} expects {arity} argument{plural}, got {len(args)}", span)
            return Call(name, tuple(args), span)
        raise self.error(f"unknown name {name!r}", t.span)

    # -- statements ---------------------------------------------------------
    def parse_file(self) -> FieldFile:
        result: FieldFile | None = None
        seen: dict[str, str] = {}
        while True:
            while self.tok.kind == "NEWLINE":
                self.advance()
            t = self.tok
            if t.kind == "EOF":
                break
            if t.kind != "NAME" or t.text not in KEYWORDS:
                raise self.error(f"expected a statement keyword, found {self.describe(t)}")
            if t.text == "dim":
                if result is not None:
                    raise self.error("duplicate dim declaration")
                self.advance()
                num_tok = self.tok
                if num_tok.kind != "NUM" or not num_tok.text.isdigit():
                    raise self.error(f"expected an integer dimension, found {self.describe(num_tok)}")
                self.advance()
                n = int(num_tok.text)
                if not 1 <= n <= 8:
                    raise self.error(f"dimension must be between 1 and 8, got {n}", num_tok.span)
                self.dim = n
                result = FieldFile(dim=n, text=self.text)
            else:
                if result is None:
                    raise self.error("missing 'dim' declaration before first statement")
                self.statement(result, seen)
            self.end_statement()
        if result is None:
            raise self.error("missing 'dim' declaration")
        return result

    def end_statement(self) -> None:
        if self.tok.kind not in ("NEWLINE", "EOF"):
            raise self.error(f"unexpected {self.describe(self.tok)} after statement")

    def statement(self, out: FieldFile, seen: dict[str, str]) -> None:
        kw = self.advance()
        if kw.text == "domain":
            if out.domain is not None:
                raise self.error("duplicate domain declaration", kw.span)
            out.domain = self.box()
            return
        name_tok = self.expect_name(f"a name after '{kw.text}'")
        name = name_tok.text
        if name in KEYWORDS or name in FUNCTIONS or re.fullmatch(r"[xb]\d+", name):
            raise self.error(f"reserved name {name!r}", name_tok.span)
        if name in seen:
            raise self.error(f"duplicate name {name!r} (already a {seen[name]})", name_tok.span)
        if kw.text == "field":
            self.expect_op("=")
            out.fields[name] = self.expression()
        elif kw.text == "extensor":
            self.expect_op("=")
            out.extensors[name] = self.matrix()
        else:
            out.charts[name] = self.chart(name, name_tok.span)
        seen[name] = kw.text

    def box(self) -> Box:
        intervals = [self.interval()]
        while self.at_op(","):
            self.advance()
            intervals.append(self.interval())
        if len(intervals) != self.dim:
            raise self.error(
                f"domain needs {self.dim} intervals, got {len(intervals)}", self.prev().span
            )
        return tuple(intervals)

    def interval(self) -> tuple[float, float]:
        open_tok = self.expect_op("[")
        lo = self.signed_number()
        self.expect_op(",")
        hi = self.signed_number()
        close = self.expect_op("]")
        if not lo < hi:
            raise self.error("empty interval: lower bound must be below upper bound",
                             SourceSpan(open_tok.span.start, close.span.end))
        return (lo, hi)

    def signed_number(self) -> float:
        sign = 1.0
        if self.at_op("-"):
            self.advance()
            sign = -1.0
        t = self.tok
        if t.kind != "NUM":
            raise self.error(f"expected a number, found {self.describe(t)}")
        self.advance()
        return sign * float(t.text)

    def matrix(self) -> tuple[tuple[Node, ...], ...]:
        open_tok = self.expect_op("[")
        rows = [self.row()]
        while self.at_op(","):
            self.advance()
            rows.append(self.row())
        close = self.expect_op("]")
        span = SourceSpan(open_tok.span.start, close.span.end)
        if len(rows) != self.dim:
            raise self.error(f"extensor matrix needs {self.dim} rows, got {len(rows)}", span)
        for k, r in enumerate(rows, start=1):
            if len(r) != self.dim:
                raise self.error(f"extensor row {k} has {len(r)} entries, expected {self.dim}", span)
        for row in rows:
            for entry in row:
                if possible_grades(entry, self.dim) - {0}:
                    raise self.error("extensor matrix entries must be scalar-valued",
                                     SourceSpan(_start(entry), _end(entry)))
        return tuple(rows)

    def row(self) -> tuple[Node, ...]:
        self.expect_op("[")
        entries = [self.expression()]
        while self.at_op(","):
            self.advance()
            entries.append(self.expression())
        self.expect_op("]")
        return tuple(entries)

    def chart(self, name: str, span: SourceSpan) -> ChartDef:
        self.expect_op("{")
        parts: dict[str, object] = {}
        while not self.at_op("}"):
            key_tok = self.expect_name("'forward', 'inverse', 'domain' or 'tol'")
            key = key_tok.text
            if key not in ("forward", "inverse", "domain", "tol"):
                raise self.error(f"unknown chart entry {key!r}", key_tok.span)
            if key in parts:
                raise self.error(f"duplicate chart entry {key!r}", key_tok.span)
            self.expect_op(":")
            if key in ("forward", "inverse"):
                exprs = [self.expression()]
                while self.at_op(","):
                    self.advance()
                    exprs.append(self.expression())
                if len(exprs) != self.dim:
                    raise self.error(
                        f"chart {key} map needs {self.dim} expressions, got {len(exprs)}",
                        key_tok.span,
                    )
                for e in exprs:
                    if possible_grades(e, self.dim) - {0}:
                        raise self.error(f"chart {key} expressions must be scalar-valued",
                                         SourceSpan(_start(e), _end(e)))
                    if max_indices(e)[1]:
                        raise self.error(f"chart {key} expressions cannot use basis vectors",
                                         SourceSpan(_start(e), _end(e)))
                parts[key] = tuple(exprs)
            elif key == "domain":
                parts[key] = self.box()
            else:
                tol = self.signed_number()
                if tol <= 0:
                    raise self.error("chart tol must be positive", self.prev().span)
                parts[key] = tol
            if self.at_op(";"):
                self.advance()
            elif not self.at_op("}"):
                raise self.error(f"expected ';' or '}}', found {self.describe(self.tok)}")
        self.advance()
        for key in ("forward", "inverse"):
            if key not in parts:
                raise self.error(f"chart {name!r} is missing its {key} map", span)
        return ChartDef(
            name=name,
            forward=parts["forward"],
            inverse=parts["inverse"],
            domain=parts.get("domain"),
            tol=parts.get("tol", 1e-9),
            span=span,
        )


def _start(e: Node) -> int:
    return e.span.start


def _end(e: Node) -> int:
    return e.span.end


def _respan(e: Node, span: SourceSpan) -> Node:
    # Parenthesised expressions report the span including the parentheses.
    return dataclasses.replace(e, span=span)


def parse(text: str) -> FieldFile:
    """Parse a complete ``.mvf`` document."""
    return Parser(text).parse_file()


def parse_expression(text: str, dim: int | None = None) -> Node:
    """Parse a single expression, e.g. a multivector in text form."""
    p = Parser(text, dim)
    while p.tok.kind == "NEWLINE":
        p.advance()
    e = p.expression()
    while p.tok.kind == "NEWLINE":
        p.advance()
    if p.tok.kind != "EOF":
        raise p.error(f"unexpected {p.describe(p.tok)} after expression")
    return e


def parse_file(path) -> FieldFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def iter_nodes(e: Node) -> Iterator[Node]:
    yield e
    for c in e.children():
        yield from iter_nodes(c)


def dump(ff: FieldFile) -> str:
    """Deterministic text dump of a parsed file (golden-corpus format)."""
    lines = [f"dim {ff.dim}"]
    if ff.domain is not None:
        lines.append("domain " + ", ".join(f"[{_g(a)}, {_g(b)}]" for a, b in ff.domain))
    for name, e in ff.fields.items():
        lines.append(f"field {name} @{e.span.start}:{e.span.end} = {sexpr(e)}")
    for name, c in ff.charts.items():
        lines.append(f"chart {name} tol={_g(c.tol)}")
        lines.append("  forward " + " | ".join(sexpr(e) for e in c.forward))
        lines.append("  inverse " + " | ".join(sexpr(e) for e in c.inverse))
        if c.domain is not None:
            lines.append("  domain " + ", ".join(f"[{_g(a)}, {_g(b)}]" for a, b in c.domain))
    for name, rows in ff.extensors.items():
        lines.append(f"extensor {name}")
        for r in rows:
            lines.append("  [" + ", ".join(sexpr(e) for e in r) + "]")
    return "\n".join(lines) + "\n"


def _g(v: float) -> str:
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text
