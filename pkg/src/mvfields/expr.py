"""Expression trees for multivector fields in chart coordinates.

A tree is built from numbers, coordinate variables ``x1..xn``, basis vectors
``b1..bn``, unary minus, ``+``/``-``, the five multivector products, division
by a scalar, and a handful of scalar functions.  Trees are immutable and
compare structurally (source spans are ignored).

Evaluation is vectorised: :func:`evaluate_array` takes an ``(N, n)`` array of
points and returns ``(N, 2**n)`` coefficients, sharing work between repeated
subtrees.  :func:`differentiate` is exact and symbolic; :func:`fd_partial` is
the central-difference oracle it is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .algebra import Multivector, grades_of, product_arrays
from .errors import DomainError, EvaluationError, GradeError


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets ``[start, end)`` into the parsed text."""

    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError(f"bad span {self.start}..{self.end}")


NO_SPAN = SourceSpan(0, 0)


class Node:
    """Base class of expression nodes."""

    __slots__ = ()

    def children(self) -> tuple[Node, ...]:
        return ()


@dataclass(frozen=True, eq=True)
class Num(Node):
    value: float
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True, eq=True)
class Coord(Node):
    """Coordinate variable ``x<index>`` (1-based)."""

    index: int
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True, eq=True)
class Basis(Node):
    """Fiducial basis vector ``b<index>`` (1-based)."""

    index: int
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True, eq=True)
class Neg(Node):
    operand: Node
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)

    def children(self):
        return (self.operand,)


# Binary operator symbols.  '+', '-' are additive; the rest share one
# left-associative multiplicative level.
ADDITIVE = ("+", "-")
PRODUCT_OPS = {"^": "wedge", "*": "geometric", "_|": "left", "|_": "right", ".": "scalar"}
MULTIPLICATIVE = tuple(PRODUCT_OPS) + ("/",)


@dataclass(frozen=True, eq=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Call(Node):
    func: str
    args: tuple[Node, ...]
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)

    def children(self):
        return self.args


FUNCTIONS: dict[str, int] = {
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "ln": 1,
    "sqrt": 1,
    "pow": 2,
    "atan2": 2,
}


# ---------------------------------------------------------------------------
# smart constructors: constant folding and zero/one elimination only
# ---------------------------------------------------------------------------

ZERO = Num(0.0)
ONE = Num(1.0)


def is_zero(e: Node) -> bool:
    return isinstance(e, Num) and e.value == 0.0


def is_one(e: Node) -> bool:
    return isinstance(e, Num) and e.value == 1.0


def num(v: float) -> Num:
    return Num(float(v))


def neg(e: Node) -> Node:
    if isinstance(e, Num):
        return num(-e.value)
    if isinstance(e, Neg):
        return e.operand
    return Neg(e)


def add(a: Node, b: Node) -> Node:
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return num(a.value + b.value)
    if isinstance(b, Neg):
        return BinOp("-", a, b.operand)
    return BinOp("+", a, b)


def sub(a: Node, b: Node) -> Node:
    if is_zero(b):
        return a
    if is_zero(a):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return num(a.value - b.value)
    return BinOp("-", a, b)


def binop(op: str, a: Node, b: Node) -> Node:
    """Product node with folding; every product is bilinear so zero absorbs."""
    if op == "/":
        return div(a, b)
    if op not in PRODUCT_OPS:
        raise ValueError(f"unknown product operator {op!r}")
    if is_zero(a) or is_zero(b):
        return ZERO
    if isinstance(a, Num) and isinstance(b, Num):
        return num(a.value * b.value)
    if isinstance(a, Basis) and isinstance(b, Basis) and a.index == b.index and op != "^":
        # b_mu squares to 1 under every non-exterior product
        return ONE
    if isinstance(a, Basis) and isinstance(b, Basis) and a.index == b.index:
        return ZERO
    # A unit scalar is the identity for every product but the scalar one.
    if op != "." and is_one(a) and op in ("*", "^", "_|"):
        return b
    if op != "." and is_one(b) and op in ("*", "^", "|_"):
        return a
    return BinOp(op, a, b)


def mul(a: Node, b: Node) -> Node:
    return binop("*", a, b)


def div(a: Node, b: Node) -> Node:
    if is_zero(a):
        return ZERO
    if is_one(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return num(a.value / b.value)
    return BinOp("/", a, b)


def call(func: str, *args: Node) -> Node:
    if func not in FUNCTIONS:
        raise ValueError(f"unknown function {func!r}")
    return Call(func, tuple(args))


def sum_nodes(terms) -> Node:
    out: Node = ZERO
    for t in terms:
        out = add(out, t)
    return out


def vector_expr(components) -> Node:
    """``c1*b1 + c2*b2 + ...`` from component expressions or numbers."""
    terms = []
    for mu, c in enumerate(components, start=1):
        c = c if isinstance(c, Node) else num(c)
        terms.append(mul(c, Basis(mu)))
    return sum_nodes(terms)


def blade_expr(mask: int) -> Node:
    """Wedge of basis vectors for a blade mask (``1`` for the empty mask)."""
    out: Node | None = None
    mu = 1
    while mask:
        if mask & 1:
            out = Basis(mu) if out is None else BinOp("^", out, Basis(mu))
        mask >>= 1
        mu += 1
    return ONE if out is None else out


def multivector_expr(x: Multivector) -> Node:
    terms = []
    for mask, c in enumerate(x.coefficients):
        if c != 0:
            terms.append(mul(num(c), blade_expr(mask)))
    return sum_nodes(terms)


# ---------------------------------------------------------------------------
# structure queries
# ---------------------------------------------------------------------------

def max_indices(e: Node) -> tuple[int, int]:
    """Largest coordinate and basis index used in the tree."""
    cmax = bmax = 0
    stack = [e]
    seen = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Coord):
            cmax = max(cmax, node.index)
        elif isinstance(node, Basis):
            bmax = max(bmax, node.index)
        stack.extend(node.children())
    return cmax, bmax


def uses_coordinates(e: Node) -> bool:
    return max_indices(e)[0] > 0


def possible_grades(e: Node, n: int, _memo=None) -> frozenset[int]:
    """Static over-approximation of the grades an expression can carry."""
    memo = {} if _memo is None else _memo
    key = id(e)
    if key in memo:
        return memo[key]
    if isinstance(e, (Num, Coord, Call)):
        out = frozenset({0})
    elif isinstance(e, Basis):
        out = frozenset({1})
    elif isinstance(e, Neg):
        out = possible_grades(e.operand, n, memo)
    elif isinstance(e, BinOp):
        a = possible_grades(e.left, n, memo)
        b = possible_grades(e.right, n, memo)
        if e.op in ADDITIVE:
            out = a | b
        elif e.op == "/":
            out = a
        elif e.op == ".":
            out = frozenset({0}) if a & b else frozenset()
        elif e.op == "^":
            out = frozenset(r + s for r in a for s in b if r + s <= n)
        elif e.op == "_|":
            out = frozenset(s - r for r in a for s in b if s >= r)
        elif e.op == "|_":
            out = frozenset(r - s for r in a for s in b if r >= s)
        else:
            out = frozenset(
                g
                for r in a
                for s in b
                for g in range(abs(r - s), min(r + s, 2 * n - r - s) + 1, 2)
            )
    else:
        raise TypeError(f"not an expression node: {e!r}")
    memo[key] = out
    return out


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _require_scalar(values: np.ndarray, what: str) -> np.ndarray:
    if values.shape[-1] > 1 and np.any(values[..., 1:] != 0):
        raise EvaluationError(f"{what} requires a scalar operand")
    return values[..., 0]


def _scalar_result(s: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros((s.shape[0], size))
    out[:, 0] = s
    return out


def _apply_function(func: str, args: list[np.ndarray]) -> np.ndarray:
    with np.errstate(all="ignore"):
        if func == "sin":
            return np.sin(args[0])
        if func == "cos":
            return np.cos(args[0])
        if func == "exp":
            return np.exp(args[0])
        if func == "ln":
            if np.any(args[0] <= 0):
                raise DomainError("ln of a non-positive value")
            return np.log(args[0])
        if func == "sqrt":
            if np.any(args[0] < 0):
                raise DomainError("sqrt of a negative value")
            return np.sqrt(args[0])
        if func == "pow":
            base, expo = args
            integral = expo == np.round(expo)
            if np.any((base < 0) & ~integral):
                raise DomainError("pow of a negative base with a non-integer exponent")
            if np.any((base == 0) & (expo < 0)):
                raise DomainError("pow of zero with a negative exponent")
            return np.power(base, expo)
        if func == "atan2":
            y, x = args
            if np.any((x == 0) & (y == 0)):
                raise DomainError("atan2(0, 0) is undefined")
            return np.arctan2(y, x)
    raise EvaluationError(f"unknown function {func!r}")


def evaluate_array(e: Node, points: np.ndarray, n: int) -> np.ndarray:
    """Evaluate ``e`` at each row of ``points`` (shape ``(N, n)``).

    Returns coefficients of shape ``(N, 2**n)``.  Raises :class:`DomainError`
    when a scalar function is undefined at any point.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != n:
        raise EvaluationError(f"points must have {n} coordinates, got {pts.shape[1]}")
    size = 1 << n
    count = pts.shape[0]
    memo: dict[int, np.ndarray] = {}

    def ev(node: Node) -> np.ndarray:
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Num):
            out = np.zeros((count, size))
            out[:, 0] = node.value
        elif isinstance(node, Coord):
            if not 1 <= node.index <= n:
                raise GradeError(f"coordinate x{node.index} outside 1..{n}")
            out = _scalar_result(pts[:, node.index - 1], size)
        elif isinstance(node, Basis):
            if not 1 <= node.index <= n:
                raise GradeError(f"basis vector b{node.index} outside 1..{n}")
            out = np.zeros((count, size))
            out[:, 1 << (node.index - 1)] = 1.0
        elif isinstance(node, Neg):
            out = -ev(node.operand)
        elif isinstance(node, BinOp):
            a, b = ev(node.left), ev(node.right)
            if node.op == "+":
                out = a + b
            elif node.op == "-":
                out = a - b
            elif node.op == "/":
                d = _require_scalar(b, "division")
                if np.any(d == 0):
                    raise DomainError("division by zero")
                out = a / d[:, None]
            elif node.op == ".":
                out = _scalar_result(np.einsum("ij,ij->i", a, b), size)
            else:
                out = product_arrays(PRODUCT_OPS[node.op], a, b)
        elif isinstance(node, Call):
            args = [_require_scalar(ev(a), node.func) for a in node.args]
            out = _scalar_result(_apply_function(node.func, args), size)
        else:
            raise TypeError(f"not an expression node: {node!r}")
        memo[key] = out
        return out

    return ev(e)


def evaluate(e: Node, point, n: int) -> Multivector:
    """Value of ``e`` at one coordinate tuple."""
    point = np.asarray(point, dtype=float).reshape(1, -1)
    return Multivector(n, evaluate_array(e, point, n)[0])


# ---------------------------------------------------------------------------
# symbolic differentiation
# ---------------------------------------------------------------------------

def differentiate(e: Node, mu: int, _memo=None) -> Node:
    """Exact partial derivative with respect to coordinate ``x<mu>``."""
    if mu < 1:
        raise GradeError(f"coordinate index must be >= 1, got {mu}")
    memo = {} if _memo is None else _memo
    key = id(e)
    if key in memo:
        return memo[key][1]
    d = _diff(e, mu, memo)
    # keep e alive so its id cannot be recycled while the memo is in use
    memo[key] = (e, d)
    return d


def _diff(e: Node, mu: int, memo) -> Node:
    D = lambda x: differentiate(x, mu, memo)  # noqa: E731
    if isinstance(e, (Num, Basis)):
        return ZERO
    if isinstance(e, Coord):
        return ONE if e.index == mu else ZERO
    if isinstance(e, Neg):
        return neg(D(e.operand))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        if e.op == "+":
            return add(D(a), D(b))
        if e.op == "-":
            return sub(D(a), D(b))
        if e.op == "/":
            da, db = D(a), D(b)
            return sub(div(da, b), div(mul(a, db), mul(b, b)))
        return add(binop(e.op, D(a), b), binop(e.op, a, D(b)))
    if isinstance(e, Call):
        f, args = e.func, e.args
        u = args[0]
        du = D(u)
        if f == "pow":
            w = args[1]
            dw = D(w)
            if is_zero(dw):
                if is_zero(du):
                    return ZERO
                return mul(mul(w, call("pow", u, sub(w, ONE))), du)
            return mul(e, add(mul(dw, call("ln", u)), div(mul(w, du), u)))
        if f == "atan2":
            # args are (y, x)
            y, x = args
            dy, dx = du, D(x)
            if is_zero(dy) and is_zero(dx):
                return ZERO
            return div(sub(mul(x, dy), mul(y, dx)), add(mul(x, x), mul(y, y)))
        if is_zero(du):
            return ZERO
        if f == "sin":
            return mul(call("cos", u), du)
        if f == "cos":
            return neg(mul(call("sin", u), du))
        if f == "exp":
            return mul(e, du)
        if f == "ln":
            return div(du, u)
        if f == "sqrt":
            return div(du, mul(num(2.0), e))
        raise EvaluationError(f"no derivative rule for {f!r}")
    raise TypeError(f"not an expression node: {e!r}")


def substitute(e: Node, mapping: Mapping[int, Node], _memo=None) -> Node:
    """Replace coordinate ``x<i>`` by ``mapping[i]`` (missing keys are kept)."""
    memo = {} if _memo is None else _memo
    key = id(e)
    if key in memo:
        return memo[key][1]
    if isinstance(e, Coord):
        out = mapping.get(e.index, e)
    elif isinstance(e, (Num, Basis)):
        out = e
    elif isinstance(e, Neg):
        out = neg(substitute(e.operand, mapping, memo))
    elif isinstance(e, BinOp):
        a = substitute(e.left, mapping, memo)
        b = substitute(e.right, mapping, memo)
        if e.op == "+":
            out = add(a, b)
        elif e.op == "-":
            out = sub(a, b)
        else:
            out = binop(e.op, a, b)
    elif isinstance(e, Call):
        out = Call(e.func, tuple(substitute(a, mapping, memo) for a in e.args))
    else:
        raise TypeError(f"not an expression node: {e!r}")
    memo[key] = (e, out)
    return out


def fd_partial(
    e: Node, mu: int, point, n: int, h: float = 1e-5
) -> Multivector:
    """Central difference ``(f(p + h e_mu) - f(p - h e_mu)) / 2h``."""
    if h <= 0:
        raise ValueError("step h must be positive")
    return Multivector(n, fd_partial_array(e, mu, np.asarray(point, float).reshape(1, -1), n, h)[0])


def fd_partial_array(e: Node, mu: int, points: np.ndarray, n: int, h: float = 1e-5) -> np.ndarray:
    if not 1 <= mu <= n:
        raise GradeError(f"coordinate index {mu} outside 1..{n}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    step = np.zeros(n)
    step[mu - 1] = h
    plus = evaluate_array(e, pts + step, n)
    minus = evaluate_array(e, pts - step, n)
    return (plus - minus) / (2.0 * h)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_UNARY, _LEVEL_ATOM = 1, 2, 3, 4


def _level(e: Node) -> int:
    if isinstance(e, BinOp):
        return _LEVEL_ADD if e.op in ADDITIVE else _LEVEL_MUL
    if isinstance(e, Neg):
        return _LEVEL_UNARY
    if isinstance(e, Num) and (e.value < 0 or not math.isfinite(e.value)):
        return _LEVEL_UNARY
    return _LEVEL_ATOM


def _render_num(v: float) -> str:
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


def render(e: Node) -> str:
    """Source text that reparses to a structurally identical tree."""
    if isinstance(e, Num):
        return _render_num(e.value)
    if isinstance(e, Coord):
        return f"x{e.index}"
    if isinstance(e, Basis):
        return f"b{e.index}"
    if isinstance(e, Neg):
        inner = render(e.operand)
        if _level(e.operand) < _LEVEL_UNARY:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, BinOp):
        lvl = _level(e)
        left, right = render(e.left), render(e.right)
        if _level(e.left) < lvl:
            left = f"({left})"
        # left-associative: an equal-level right operand needs parentheses
        if _level(e.right) <= lvl:
            right = f"({right})"
        if isinstance(e.left, Num) and e.left.value < 0:
            left = f"({left})"
        if isinstance(e.right, Num) and e.right.value < 0:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(render(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


def sexpr(e: Node) -> str:
    """Compact prefix dump used by the parser golden corpus."""
    if isinstance(e, Num):
        return _render_num(e.value)
    if isinstance(e, Coord):
        return f"x{e.index}"
    if isinstance(e, Basis):
        return f"b{e.index}"
    if isinstance(e, Neg):
        return f"(neg {sexpr(e.operand)})"
    if isinstance(e, BinOp):
        return f"({e.op} {sexpr(e.left)} {sexpr(e.right)})"
    if isinstance(e, Call):
        return f"({e.func} {' '.join(sexpr(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


def node_count(e: Node) -> int:
    seen: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.extend(node.children())
    return len(seen)


def grade_mask_of(grades, n: int) -> np.ndarray:
    return np.isin(grades_of(n), list(grades))


Evaluator = Callable[[np.ndarray], np.ndarray]
