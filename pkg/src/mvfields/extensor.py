"""Extensors and extensor fields.

An extensor of arity ``k`` (1 or 2) is stored as a dense table over blade
bases restricted to declared grade sets:

    table[o, i]        t(e_i) . e_o
    table[o, i, j]     t(e_i, e_j) . e_o

where ``e_o`` runs over the output blades and ``e_i``, ``e_j`` over the slot
blades.  Because the blades are orthonormal under the scalar product, the
adjoint is a plain transpose.

An extensor *field* keeps the same layout with scalar expressions as entries,
stored sparsely as ``{(out_mask, in_mask, ...): node}``.
"""

from __future__ import annotations

from itertools import product as cartesian
from typing import Iterable, Sequence

import numpy as np

from . import expr as E
from .algebra import Multivector, grades_of
from .calculus import Direction, direction_components
from .errors import DimensionError, GradeError, SignatureError, SingularJacobianError
from .fields import Box, MultivectorField, check_points_in_box

Grades = frozenset
VECTOR = frozenset({1})
CONDITION_LIMIT = 1e12


def masks_for(n: int, grades: Iterable[int]) -> tuple[int, ...]:
    g = grades_of(n)
    wanted = set(grades)
    return tuple(m for m in range(1 << n) if g[m] in wanted)


def _grade_set(gs) -> frozenset:
    out = frozenset(int(g) for g in gs)
    if not out:
        raise SignatureError("a grade signature cannot be empty")
    return out


def _check_signature(x: Multivector, grades: frozenset, slot: int) -> None:
    g = grades_of(x.n)
    bad = [m for m in np.flatnonzero(x.coefficients) if g[m] not in grades]
    if bad:
        raise SignatureError(
            f"slot {slot} accepts grades {sorted(grades)}, argument has grade {int(g[bad[0]])}"
        )


class Extensor:
    """A multilinear map on multivectors with a fixed slot signature."""

    __slots__ = ("n", "slots", "out", "table")

    def __init__(self, n: int, slots: Sequence[Iterable[int]], out: Iterable[int], table):
        if not 1 <= len(slots) <= 2:
            raise SignatureError(f"arity must be 1 or 2, got {len(slots)}")
        self.n = n
        self.slots = tuple(_grade_set(s) for s in slots)
        self.out = _grade_set(out)
        shape = (len(masks_for(n, self.out)),) + tuple(len(masks_for(n, s)) for s in self.slots)
        table = np.array(table, dtype=float)
        if table.shape != shape:
            raise DimensionError(f"table shape {table.shape} does not match signature {shape}")
        table.setflags(write=False)
        self.table = table

    @property
    def arity(self) -> int:
        return len(self.slots)

    @classmethod
    def from_matrix(cls, matrix) -> Extensor:
        """(1,1)-extensor with ``matrix[nu][mu] = t(b_mu) . b_nu``, so ``t(a) = M a``."""
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("a (1,1)-extensor needs a square matrix")
        return cls(m.shape[0], [VECTOR], VECTOR, m)

    @classmethod
    def identity(cls, n: int, grades: Iterable[int] = (1,)) -> Extensor:
        g = _grade_set(grades)
        k = len(masks_for(n, g))
        return cls(n, [g], g, np.eye(k))

    def matrix(self) -> np.ndarray:
        if self.arity != 1:
            raise SignatureError("only arity-1 extensors have a matrix")
        return self.table

    def __call__(self, *args: Multivector) -> Multivector:
        return apply(self, *args)

    def adjoint(self) -> Extensor:
        if self.arity != 1:
            raise SignatureError(f"the adjoint needs a single slot, arity is {self.arity}")
        return Extensor(self.n, [self.out], self.slots[0], self.table.T)

    def compose(self, other: Extensor) -> Extensor:
        """``(self o other)(X) = self(other(X))`` for arity-1 extensors."""
        if self.arity != 1 or other.arity != 1:
            raise SignatureError("composition needs arity-1 extensors")
        if other.out != self.slots[0]:
            raise SignatureError("output grades of the inner extensor must match the outer slot")
        return Extensor(self.n, other.slots, self.out, self.table @ other.table)

    def inverse(self) -> Extensor:
        m = self.matrix()
        cond = np.linalg.cond(m) if m.size else 1.0
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SingularJacobianError(f"extensor is singular (condition {cond:.3e})", cond, None)
        return Extensor(self.n, [self.out], self.slots[0], np.linalg.inv(m))

    def is_close(self, other: Extensor, atol: float = 0.0) -> bool:
        return (self.slots == other.slots and self.out == other.out
                and np.allclose(self.table, other.table, rtol=0.0, atol=atol))

    def __eq__(self, other):
        return isinstance(other, Extensor) and self.is_close(other)

    def __hash__(self):
        return hash((self.n, self.slots, self.out, self.table.tobytes()))

    def __add__(self, other: Extensor) -> Extensor:
        if (self.slots, self.out) != (other.slots, other.out):
            raise SignatureError("cannot add extensors with different signatures")
        return Extensor(self.n, self.slots, self.out, self.table + other.table)

    def __mul__(self, alpha: float) -> Extensor:
        return Extensor(self.n, self.slots, self.out, float(alpha) * self.table)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Extensor(n={self.n}, slots={[sorted(s) for s in self.slots]}, out={sorted(self.out)})"


def apply(t: Extensor, *args: Multivector) -> Multivector:
    """Multilinear contraction of the table with the slot coefficients."""
    if len(args) != t.arity:
        raise SignatureError(f"extensor takes {t.arity} arguments, got {len(args)}")
    vecs = []
    for k, (x, grades) in enumerate(zip(args, t.slots), start=1):
        if x.n != t.n:
            raise DimensionError(f"argument {k} has n={x.n}, extensor has n={t.n}")
        _check_signature(x, grades, k)
        vecs.append(x.coefficients[list(masks_for(t.n, grades))])
    vals = t.table
    for v in reversed(vecs):
        vals = vals @ v
    out = np.zeros(1 << t.n)
    out[list(masks_for(t.n, t.out))] = vals
    return Multivector(t.n, out)


def adjoint(t):
    return t.adjoint()


# ---------------------------------------------------------------------------
# extensor fields
# ---------------------------------------------------------------------------

Key = tuple[int, ...]


class ExtensorField:
    """Point-dependent extensor with scalar expression entries."""

    __slots__ = ("n", "slots", "out", "entries", "domain", "chart", "name")

    def __init__(self, n: int, slots: Sequence[Iterable[int]], out: Iterable[int],
                 entries: dict[Key, E.Node], domain: Box | None = None,
                 chart: str | None = None, name: str | None = None):
        if not 1 <= len(slots) <= 2:
            raise SignatureError(f"arity must be 1 or 2, got {len(slots)}")
        self.n = n
        self.slots = tuple(_grade_set(s) for s in slots)
        self.out = _grade_set(out)
        allowed = [set(masks_for(n, self.out))] + [set(masks_for(n, s)) for s in self.slots]
        clean: dict[Key, E.Node] = {}
        for key, node in entries.items():
            key = tuple(int(k) for k in key)
            if len(key) != len(allowed) or any(k not in a for k, a in zip(key, allowed)):
                raise SignatureError(f"entry key {key} lies outside the signature")
            if not E.possible_grades(node, n) <= {0}:
                raise GradeError(f"extensor entry {key} is not scalar-valued")
            if not E.is_zero(node):
                clean[key] = node
        self.entries = clean
        self.domain = domain
        self.chart = chart
        self.name = name

    @property
    def arity(self) -> int:
        return len(self.slots)

    def _like(self, entries: dict[Key, E.Node], slots=None, out=None) -> ExtensorField:
        return ExtensorField(self.n, self.slots if slots is None else slots,
                             self.out if out is None else out, entries, self.domain, self.chart)

    # -- constructors ---------------------------------------------------------
    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence[E.Node | float]], **kwargs) -> ExtensorField:
        """(1,1)-extensor field with ``rows[nu][mu] = t(b_mu) . b_nu``."""
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise DimensionError("extensor matrix must be square")
        entries = {}
        for nu, row in enumerate(rows):
            for mu, val in enumerate(row):
                node = val if isinstance(val, E.Node) else E.num(val)
                entries[(1 << nu, 1 << mu)] = node
        return cls(n, [VECTOR], VECTOR, entries, **kwargs)

    @classmethod
    def constant(cls, t: Extensor, **kwargs) -> ExtensorField:
        outs = masks_for(t.n, t.out)
        ins = [masks_for(t.n, s) for s in t.slots]
        entries = {}
        for idx in cartesian(*(range(len(m)) for m in [outs] + ins)):
            v = float(t.table[idx])
            if v != 0.0:
                key = (outs[idx[0]],) + tuple(ins[k][i] for k, i in enumerate(idx[1:]))
                entries[key] = E.num(v)
        return cls(t.n, t.slots, t.out, entries, **kwargs)

    @classmethod
    def identity(cls, n: int, **kwargs) -> ExtensorField:
        return cls.constant(Extensor.identity(n), **kwargs)

    # -- evaluation -----------------------------------------------------------
    def matrix_nodes(self) -> list[list[E.Node]]:
        if self.arity != 1 or self.slots[0] != VECTOR or self.out != VECTOR:
            raise SignatureError("only (1,1)-extensor fields have a matrix form")
        return [[self.entries.get((1 << nu, 1 << mu), E.ZERO) for mu in range(self.n)]
                for nu in range(self.n)]

    def tables(self, points, check_domain: bool = True) -> np.ndarray:
        """Entry tables at many points: shape ``(N, out, in[, in2])``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if check_domain:
            check_points_in_box(pts, self.domain)
        outs = masks_for(self.n, self.out)
        ins = [masks_for(self.n, s) for s in self.slots]
        pos = [{m: i for i, m in enumerate(outs)}] + [{m: i for i, m in enumerate(x)} for x in ins]
        tab = np.zeros((pts.shape[0], len(outs)) + tuple(len(x) for x in ins))
        for key, node in self.entries.items():
            idx = tuple(p[k] for p, k in zip(pos, key))
            tab[(slice(None),) + idx] = E.evaluate_array(node, pts, self.n)[:, 0]
        return tab

    def at(self, point) -> Extensor:
        return Extensor(self.n, self.slots, self.out, self.tables([point])[0])

    def apply(self, *args, point) -> Multivector:
        vals = [a.evaluate(point) if isinstance(a, MultivectorField) else a for a in args]
        return apply(self.at(point), *vals)

    # -- algebra ----------------------------------------------------------------
    def adjoint(self) -> ExtensorField:
        if self.arity != 1:
            raise SignatureError(f"the adjoint needs a single slot, arity is {self.arity}")
        swapped = {(i, o): node for (o, i), node in self.entries.items()}
        return self._like(swapped, slots=[self.out], out=self.slots[0])

    def _check_compatible(self, other: ExtensorField) -> None:
        if (self.n, self.slots, self.out) != (other.n, other.slots, other.out):
            raise SignatureError("extensor fields have different signatures")
        if self.chart != other.chart:
            raise DimensionError(f"extensor fields live in charts {self.chart!r} and {other.chart!r}")

    def __add__(self, other: ExtensorField) -> ExtensorField:
        self._check_compatible(other)
        entries = dict(self.entries)
        for k, v in other.entries.items():
            entries[k] = E.add(entries.get(k, E.ZERO), v)
        return self._like(entries)

    def __neg__(self) -> ExtensorField:
        return self._like({k: E.neg(v) for k, v in self.entries.items()})

    def __sub__(self, other: ExtensorField) -> ExtensorField:
        return self + (-other)

    def scale(self, f) -> ExtensorField:
        """Multiply by a scalar field or a number."""
        if isinstance(f, MultivectorField):
            if not f.is_scalar_field():
                raise GradeError("extensor fields scale by scalar fields only")
            node = f.expr
        else:
            node = E.num(f)
        return self._like({k: E.mul(node, v) for k, v in self.entries.items()})

    __rmul__ = scale

    def structurally_equal(self, other: ExtensorField) -> bool:
        return (self.n, self.slots, self.out, self.entries) == (other.n, other.slots, other.out, other.entries)

    def compose(self, other: ExtensorField) -> ExtensorField:
        """Pointwise ``self o other`` for (1,1)-extensor fields."""
        a, b = self.matrix_nodes(), other.matrix_nodes()
        n = self.n
        rows = [[E.sum_nodes(E.mul(a[i][k], b[k][j]) for k in range(n)) for j in range(n)]
                for i in range(n)]
        return ExtensorField.from_matrix(rows, domain=self.domain, chart=self.chart)

    def inverse_at(self, point) -> Extensor:
        """Numeric inverse of a (1,1)-extensor field at one point."""
        t = self.at(point)
        try:
            return t.inverse()
        except SingularJacobianError as err:
            raise SingularJacobianError(
                f"singular at {tuple(float(v) for v in point)} (condition {err.condition:.3e})",
                err.condition, tuple(float(v) for v in point)) from None

    def condition_numbers(self, points, check_domain: bool = True) -> np.ndarray:
        tabs = self.tables(points, check_domain)
        with np.errstate(all="ignore"):
            c = np.linalg.cond(tabs)
        return np.where(np.isfinite(c), c, np.inf)

    def render_matrix(self) -> list[list[str]]:
        return [[E.render(x) for x in row] for row in self.matrix_nodes()]

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"<ExtensorField{tag} n={self.n} arity={self.arity}>"


def dod_extensor(a: Direction, t: ExtensorField) -> ExtensorField:
    """Entry-wise directional derivative of the table.

    Constant blade arguments have vanishing derivative, so this equals the
    definitional form ``a.d(t(X...)) - sum_i t(..., a.d X_i, ...)``.
    """
    coeffs = direction_components(a, t.n, t.chart)
    entries = {}
    for key, node in t.entries.items():
        d = E.sum_nodes(E.mul(c, E.differentiate(node, mu))
                        for mu, c in enumerate(coeffs, start=1) if not E.is_zero(c))
        entries[key] = d
    return t._like(entries)


def induced_operator(t: ExtensorField, *args: MultivectorField) -> MultivectorField:
    """The field ``p -> t(p)(X1(p), ..., Xk(p))`` as one expression."""
    if len(args) != t.arity:
        raise SignatureError(f"extensor field takes {t.arity} arguments, got {len(args)}")
    for k, (x, grades) in enumerate(zip(args, t.slots), start=1):
        if x.n != t.n:
            raise DimensionError(f"argument {k} has n={x.n}, extensor has n={t.n}")
        if x.chart != t.chart:
            raise DimensionError(f"argument {k} lives in chart {x.chart!r}, extensor in {t.chart!r}")
        extra = x.grades - grades
        if extra and not E.is_zero(x.expr):
            raise SignatureError(f"slot {k} accepts grades {sorted(grades)}, argument may have {sorted(extra)}")
    terms = []
    for key, node in t.entries.items():
        term = node
        for mask, x in zip(key[1:], args):
            term = E.mul(term, E.binop(".", E.blade_expr(mask), x.expr))
        terms.append(E.mul(term, E.blade_expr(key[0])))
    base = args[0] if args else None
    domain = t.domain if t.domain is not None else (base.domain if base else None)
    return MultivectorField(E.sum_nodes(terms), t.n, domain, t.chart)


def dod_extensor_definitional(a: Direction, t: ExtensorField, args: Sequence[MultivectorField],
                              points) -> np.ndarray:
    """Right side of the defining formula evaluated at ``points``.

    ``a.d(t(X1..Xk)) - sum_i t(.., a.d X_i, ..)`` with ``a.d`` from the calculus
    module.  Returns an ``(N, 2^n)`` array.
    """
    from .calculus import dod

    whole = dod(a, induced_operator(t, *args)).evaluate_many(points)
    for i in range(len(args)):
        shifted = list(args)
        shifted[i] = dod(a, args[i])
        whole = whole - induced_operator(t, *shifted).evaluate_many(points)
    return whole
