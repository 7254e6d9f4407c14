"""Multivector fields: an expression tree plus dimension, domain box and chart."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import expr as E
from .algebra import Multivector
from .errors import DimensionError, DomainError, EvaluationError
from .parser import parse_expression

Box = tuple[tuple[float, float], ...]

DEFAULT_SAMPLE_HALF_WIDTH = 1.0
BOX_SLACK = 1e-12


def check_points_in_box(points: np.ndarray, box: Box | None) -> None:
    if box is None:
        return
    lo = np.array([a for a, _ in box])
    hi = np.array([b for _, b in box])
    # a few ulps of slack so that chart round trips landing on an edge still count
    slack = BOX_SLACK * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    inside = np.all((points >= lo - slack) & (points <= hi + slack), axis=1)
    if not np.all(inside):
        bad = points[np.argmin(inside)]
        raise DomainError(f"point {tuple(float(v) for v in bad)} is outside the domain {box}")


def sample_box(box: Box | None, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` uniform points in ``box`` (``[-1, 1]^n`` when no box is declared)."""
    if box is None:
        box = ((-DEFAULT_SAMPLE_HALF_WIDTH, DEFAULT_SAMPLE_HALF_WIDTH),) * n
    lo = np.array([a for a, _ in box])
    hi = np.array([b for _, b in box])
    return lo + (hi - lo) * rng.random((count, n))


class MultivectorField:
    """A smooth multivector field given by its coordinate representation.

    ``chart`` names the coordinate system the expression is written in;
    ``None`` means the canonical chart.  Fields are immutable; the arithmetic
    operators build new expression trees pointwise.
    """

    __slots__ = ("expr", "n", "domain", "chart", "name")

    def __init__(self, expression: E.Node, n: int, domain: Box | None = None,
                 chart: str | None = None, name: str | None = None):
        cmax, bmax = E.max_indices(expression)
        if max(cmax, bmax) > n:
            raise DimensionError(f"expression uses index {max(cmax, bmax)} but n={n}")
        if domain is not None and len(domain) != n:
            raise DimensionError(f"domain has {len(domain)} intervals, expected {n}")
        self.expr = expression
        self.n = n
        self.domain = domain
        self.chart = chart
        self.name = name

    # -- constructors ---------------------------------------------------------
    @classmethod
    def parse(cls, text: str, n: int, **kwargs) -> MultivectorField:
        return cls(parse_expression(text, n), n, **kwargs)

    @classmethod
    def constant(cls, value: Multivector, **kwargs) -> MultivectorField:
        return cls(E.multivector_expr(value), value.n, **kwargs)

    @classmethod
    def position(cls, n: int, **kwargs) -> MultivectorField:
        """``x1*b1 + ... + xn*bn``."""
        return cls(E.vector_expr([E.Coord(mu) for mu in range(1, n + 1)]), n, **kwargs)

    def _like(self, expression: E.Node) -> MultivectorField:
        return MultivectorField(expression, self.n, self.domain, self.chart)

    # -- evaluation -----------------------------------------------------------
    def evaluate_many(self, points, check_domain: bool = True) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.n:
            raise EvaluationError(f"points need {self.n} coordinates, got {pts.shape[1]}")
        if check_domain:
            check_points_in_box(pts, self.domain)
        return E.evaluate_array(self.expr, pts, self.n)

    def evaluate(self, point: Sequence[float]) -> Multivector:
        return Multivector(self.n, self.evaluate_many([point])[0])

    __call__ = evaluate

    def partial(self, mu: int) -> MultivectorField:
        if not 1 <= mu <= self.n:
            raise DimensionError(f"coordinate index {mu} outside 1..{self.n}")
        return self._like(E.differentiate(self.expr, mu))

    def fd_partial(self, mu: int, point, h: float = 1e-5) -> Multivector:
        return E.fd_partial(self.expr, mu, point, self.n, h)

    # -- structure ------------------------------------------------------------
    @property
    def grades(self) -> frozenset[int]:
        return E.possible_grades(self.expr, self.n)

    @property
    def grade(self) -> int | None:
        """The grade when the field is statically homogeneous, else ``None``."""
        g = self.grades
        return next(iter(g)) if len(g) == 1 else None

    def is_vector_field(self) -> bool:
        return self.grades <= {1}

    def is_scalar_field(self) -> bool:
        return self.grades <= {0}

    def render(self) -> str:
        return E.render(self.expr)

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"<MultivectorField{tag} n={self.n}: {self.render()}>"

    # -- pointwise products -----------------------------------------------------
    def _coerce(self, other) -> E.Node:
        if isinstance(other, MultivectorField):
            if other.n != self.n:
                raise DimensionError(f"dimension mismatch: n={self.n} vs n={other.n}")
            if other.chart != self.chart:
                raise DimensionError(
                    f"fields live in different charts: {self.chart!r} vs {other.chart!r}"
                )
            return other.expr
        if isinstance(other, Multivector):
            if other.n != self.n:
                raise DimensionError(f"dimension mismatch: n={self.n} vs n={other.n}")
            return E.multivector_expr(other)
        if isinstance(other, (int, float)):
            return E.num(other)
        if isinstance(other, E.Node):
            return other
        raise TypeError(f"cannot combine a field with {type(other).__name__}")

    def __add__(self, other):
        return self._like(E.add(self.expr, self._coerce(other)))

    def __radd__(self, other):
        return self._like(E.add(self._coerce(other), self.expr))

    def __sub__(self, other):
        return self._like(E.sub(self.expr, self._coerce(other)))

    def __rsub__(self, other):
        return self._like(E.sub(self._coerce(other), self.expr))

    def __neg__(self):
        return self._like(E.neg(self.expr))

    def __mul__(self, other):
        return self._like(E.mul(self.expr, self._coerce(other)))

    def __rmul__(self, other):
        return self._like(E.mul(self._coerce(other), self.expr))

    def __xor__(self, other):
        return self._like(E.binop("^", self.expr, self._coerce(other)))

    def __rxor__(self, other):
        return self._like(E.binop("^", self._coerce(other), self.expr))

    def __truediv__(self, other):
        return self._like(E.div(self.expr, self._coerce(other)))

    def product(self, op: str, other) -> MultivectorField:
        """Pointwise product by DSL operator symbol (``^ * _| |_ .``)."""
        return self._like(E.binop(op, self.expr, self._coerce(other)))

    def wedge(self, other):
        return self.product("^", other)

    def left_contraction(self, other):
        return self.product("_|", other)

    def right_contraction(self, other):
        return self.product("|_", other)

    def dot(self, other):
        return self.product(".", other)


def as_field(value, n: int, **kwargs) -> MultivectorField:
    if isinstance(value, MultivectorField):
        return value
    if isinstance(value, Multivector):
        return MultivectorField.constant(value, **kwargs)
    if isinstance(value, str):
        return MultivectorField.parse(value, n, **kwargs)
    if isinstance(value, (int, float)):
        return MultivectorField(E.num(value), n, **kwargs)
    raise TypeError(f"cannot make a field from {type(value).__name__}")
