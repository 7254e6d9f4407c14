"""Secondary coordinate charts over the canonical chart.

A :class:`Chart` is given by two lists of scalar expressions:

* ``forward[nu]``: the chart coordinate ``x^nu`` as a function of the
  canonical coordinates ``x_o``;
* ``inverse[nu]``: the canonical coordinate ``x_o^nu`` as a function of the
  chart coordinates ``x``.

Fields written in canonical coordinates have ``chart=None``; :meth:`Chart.pull`
rewrites them in chart coordinates by substituting the inverse map, and
:meth:`Chart.push` goes the other way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr as E
from .algebra import Multivector
from .calculus import Direction, direction_components, dod
from .errors import DimensionError, GradeError, SingularJacobianError
from .extensor import CONDITION_LIMIT, ExtensorField
from .fields import Box, MultivectorField, check_points_in_box, sample_box
from .parser import ChartDef
from .report import CheckReport, compare


def _scalar_nodes(nodes: Sequence[E.Node], n: int, what: str) -> tuple[E.Node, ...]:
    nodes = tuple(nodes)
    if len(nodes) != n:
        raise DimensionError(f"{what} map needs {n} expressions, got {len(nodes)}")
    for k, node in enumerate(nodes, start=1):
        if not E.possible_grades(node, n) <= {0}:
            raise GradeError(f"{what} expression {k} is not scalar-valued")
    return nodes


def _eval_scalars(nodes: Sequence[E.Node], points: np.ndarray, n: int) -> np.ndarray:
    return np.stack([E.evaluate_array(node, points, n)[:, 0] for node in nodes], axis=1)


@dataclass(frozen=True)
class CanonicalChart:
    """The canonical chart: position vector ``x_o = x_o^mu b_mu``."""

    n: int
    domain: Box | None = None

    def position(self, point) -> Multivector:
        pts = np.atleast_2d(np.asarray(point, dtype=float))
        check_points_in_box(pts, self.domain)
        return Multivector.vector(pts[0])

    def position_field(self) -> MultivectorField:
        return MultivectorField.position(self.n, domain=self.domain)

    def as_chart(self) -> Chart:
        coords = tuple(E.Coord(mu) for mu in range(1, self.n + 1))
        return Chart("canonical", self.n, coords, coords, self.domain, self.domain)


class Chart:
    """A secondary chart with user-supplied forward and inverse transition maps."""

    __slots__ = ("name", "n", "forward", "inverse", "domain", "canonical_domain", "tol")

    def __init__(self, name: str, n: int, forward: Sequence[E.Node], inverse: Sequence[E.Node],
                 domain: Box | None = None, canonical_domain: Box | None = None, tol: float = 1e-9):
        self.name = name
        self.n = n
        self.forward = _scalar_nodes(forward, n, "forward")
        self.inverse = _scalar_nodes(inverse, n, "inverse")
        self.domain = domain
        self.canonical_domain = canonical_domain
        self.tol = tol

    @classmethod
    def from_def(cls, cdef: ChartDef, n: int, canonical_domain: Box | None = None) -> Chart:
        return cls(cdef.name, n, cdef.forward, cdef.inverse, cdef.domain, canonical_domain, cdef.tol)

    @classmethod
    def identity(cls, n: int, domain: Box | None = None) -> Chart:
        coords = tuple(E.Coord(mu) for mu in range(1, n + 1))
        return cls("identity", n, coords, coords, domain, domain)

    def __repr__(self):
        return f"<Chart {self.name} n={self.n}>"

    # -- transition maps --------------------------------------------------------
    def to_chart(self, canonical_points, check_domain: bool = True) -> np.ndarray:
        """Chart coordinates of canonical points (rows)."""
        pts = np.atleast_2d(np.asarray(canonical_points, dtype=float))
        if check_domain:
            check_points_in_box(pts, self.canonical_domain)
        return _eval_scalars(self.forward, pts, self.n)

    def to_canonical(self, chart_points, check_domain: bool = True) -> np.ndarray:
        """Canonical coordinates of chart points (rows)."""
        pts = np.atleast_2d(np.asarray(chart_points, dtype=float))
        if check_domain:
            check_points_in_box(pts, self.domain)
        return _eval_scalars(self.inverse, pts, self.n)

    def varphi(self, x_o: Multivector) -> Multivector:
        """``x_o -> x = phi^nu(x_o) b_nu``."""
        if x_o.grade_parts() - {1}:
            raise GradeError("varphi takes a position vector")
        return Multivector.vector(self.to_chart([x_o.vector_components()])[0])

    def varphi_inverse(self, x: Multivector) -> Multivector:
        if x.grade_parts() - {1}:
            raise GradeError("varphi_inverse takes a position vector")
        return Multivector.vector(self.to_canonical([x.vector_components()])[0])

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        return sample_box(self.domain, self.n, count, rng)

    def roundtrip_residuals(self, chart_points) -> tuple[np.ndarray, np.ndarray]:
        """``|phi(phi^-1(x)) - x|`` and ``|phi^-1(phi(x_o)) - x_o|`` per point.

        The canonical-side points are the images of ``chart_points``, which
        keeps them inside the region the chart actually covers.
        """
        x = np.atleast_2d(np.asarray(chart_points, dtype=float))
        xo = self.to_canonical(x)
        back = self.to_chart(xo, check_domain=False)
        r1 = np.max(np.abs(back - x), axis=1)
        xo2 = self.to_canonical(back, check_domain=False)
        r2 = np.max(np.abs(xo2 - xo), axis=1)
        return r1, r2

    # -- moving fields between coordinate systems -------------------------------
    def pull(self, X: MultivectorField) -> MultivectorField:
        """Rewrite a canonical-coordinate field in this chart's coordinates."""
        if X.chart is not None:
            raise DimensionError(f"pull expects a canonical field, got chart {X.chart!r}")
        mapping = dict(enumerate(self.inverse, start=1))
        return MultivectorField(E.substitute(X.expr, mapping), self.n, self.domain, self.name)

    def push(self, X: MultivectorField) -> MultivectorField:
        """Rewrite a chart-coordinate field in canonical coordinates."""
        if X.chart != self.name:
            raise DimensionError(f"push expects a field in chart {self.name!r}, got {X.chart!r}")
        mapping = dict(enumerate(self.forward, start=1))
        return MultivectorField(E.substitute(X.expr, mapping), self.n, self.canonical_domain, None)

    def field(self, expression: E.Node | str) -> MultivectorField:
        """A field written directly in this chart's coordinates."""
        if isinstance(expression, str):
            return MultivectorField.parse(expression, self.n, domain=self.domain, chart=self.name)
        return MultivectorField(expression, self.n, self.domain, self.name)

    # -- frames and Jacobians ---------------------------------------------------
    def covariant_frame(self) -> list[MultivectorField]:
        """``b_mu . d x_o = sum_nu (d x_o^nu / d x^mu) b_nu`` in chart coordinates."""
        frames = []
        for mu in range(1, self.n + 1):
            comps = [E.differentiate(inv, mu) for inv in self.inverse]
            frames.append(self.field(E.vector_expr(comps)))
        return frames

    def contravariant_frame(self, pulled: bool = True) -> list[MultivectorField]:
        """``d_o x^nu = sum_mu (d x^nu / d x_o^mu) b^mu``.

        Built in canonical coordinates; with ``pulled=True`` (default) the
        result is rewritten in chart coordinates so it can be compared with
        the covariant frame at the same chart points.
        """
        frames = []
        for fwd in self.forward:
            comps = [E.differentiate(fwd, mu) for mu in range(1, self.n + 1)]
            canon = MultivectorField(E.vector_expr(comps), self.n, self.canonical_domain)
            frames.append(self.pull(canon) if pulled else canon)
        return frames

    def jacobian(self) -> ExtensorField:
        """``J(a) = a . d x_o`` with matrix entries ``d x_o^nu / d x^mu``."""
        rows = [[E.differentiate(inv, mu) for mu in range(1, self.n + 1)] for inv in self.inverse]
        return ExtensorField.from_matrix(rows, domain=self.domain, chart=self.name)

    def jacobian_inverse(self, check_points=None) -> ExtensorField:
        """``J^-1(a) = a . d_o x`` with entries ``d x^nu / d x_o^mu``, in chart coordinates.

        When ``check_points`` are given, the forward Jacobian is checked to be
        nonsingular there first.
        """
        if check_points is not None:
            self.check_nonsingular(check_points)
        mapping = dict(enumerate(self.inverse, start=1))
        rows = [[E.substitute(E.differentiate(fwd, mu), mapping) for mu in range(1, self.n + 1)]
                for fwd in self.forward]
        return ExtensorField.from_matrix(rows, domain=self.domain, chart=self.name)

    def jacobian_star(self, check_points=None) -> ExtensorField:
        """``J^*``, taken to be the adjoint of ``J^-1``."""
        return self.jacobian_inverse(check_points).adjoint()

    def condition_numbers(self, chart_points) -> np.ndarray:
        return self.jacobian().condition_numbers(chart_points, check_domain=False)

    def check_nonsingular(self, chart_points) -> None:
        pts = np.atleast_2d(np.asarray(chart_points, dtype=float))
        cond = self.condition_numbers(pts)
        k = int(np.argmax(cond))
        if not cond[k] <= CONDITION_LIMIT:
            where = tuple(float(v) for v in pts[k])
            raise SingularJacobianError(
                f"Jacobian of chart {self.name!r} is singular at {where} (condition {cond[k]:.3e})",
                float(cond[k]), where)


def dod_chart(chart: Chart, a: Direction, X: MultivectorField) -> MultivectorField:
    """``a . d X``: partials with respect to the chart coordinates ``x^mu``."""
    if X.chart != chart.name:
        raise DimensionError(f"field must be written in chart {chart.name!r}, got {X.chart!r}")
    return dod(a, X)


def _canonical_partials(X: MultivectorField, xo: np.ndarray) -> list[np.ndarray]:
    check_points_in_box(xo, X.domain)
    return [E.evaluate_array(E.differentiate(X.expr, mu), xo, X.n) for mu in range(1, X.n + 1)]


def _direction_values(chart: Chart, a: Direction, points: np.ndarray) -> np.ndarray:
    comps = direction_components(a, chart.n, chart.name)
    return np.stack([E.evaluate_array(c, points, chart.n)[:, 0] for c in comps], axis=1)


def chain_rule_sides(chart: Chart, X: MultivectorField, a: Direction, points) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of ``J(a) . d_o X = a . d X`` at chart points.

    ``X`` is a canonical field.  The left side applies the canonical
    derivative at ``x_o = phi^-1(x)`` along the vector ``J(a)(x)``; the right
    side differentiates the pulled field in chart coordinates.
    """
    if X.chart is not None:
        raise DimensionError("the chain-rule check takes a canonical field")
    x = np.atleast_2d(np.asarray(points, dtype=float))
    xo = chart.to_canonical(x)
    jac = chart.jacobian().tables(x)                     # (N, n, n)
    av = _direction_values(chart, a, x)                  # (N, n)
    ja = np.einsum("kij,kj->ki", jac, av)                # J(a) components
    partials = _canonical_partials(X, xo)
    lhs = sum(ja[:, mu:mu + 1] * partials[mu] for mu in range(chart.n))
    rhs = dod_chart(chart, a, chart.pull(X)).evaluate_many(x)
    return lhs, rhs


def check_chain_rule(chart: Chart, X: MultivectorField, a: Direction, points=None,
                     tol: float = 1e-8, seed: int = 0, count: int = 100,
                     label: str | None = None) -> CheckReport:
    if points is None:
        points = chart.sample(count, np.random.default_rng(seed))
    lhs, rhs = chain_rule_sides(chart, X, a, points)
    name = label or f"chain-rule[{chart.name}]"
    return compare(name, "J(a).d_o X = a.d X", lhs, rhs, points, tol, seed)


def check_chain_rule_corollary(chart: Chart, X: MultivectorField, mu: int, points=None,
                               tol: float = 1e-8, seed: int = 0, count: int = 100,
                               label: str | None = None) -> CheckReport:
    """``(b_mu . d x_o) . d_o X = b_mu . d X``: covariant frame vector as direction."""
    if not 1 <= mu <= chart.n:
        raise DimensionError(f"index {mu} outside 1..{chart.n}")
    if points is None:
        points = chart.sample(count, np.random.default_rng(seed))
    x = np.atleast_2d(np.asarray(points, dtype=float))
    frame = chart.covariant_frame()[mu - 1].evaluate_many(x)
    ev = frame[:, [1 << k for k in range(chart.n)]]
    partials = _canonical_partials(X, chart.to_canonical(x))
    lhs = sum(ev[:, k:k + 1] * partials[k] for k in range(chart.n))
    rhs = chart.pull(X).partial(mu).evaluate_many(x)
    name = label or f"chain-rule-corollary[{chart.name},mu={mu}]"
    return compare(name, "(b_mu.d x_o).d_o X = b_mu.d X", lhs, rhs, x, tol, seed)


def reciprocity_residuals(chart: Chart, points) -> np.ndarray:
    """``max_{mu,nu} |e_mu . e^nu - delta|`` per chart point."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    cov = [f.evaluate_many(x) for f in chart.covariant_frame()]
    con = [f.evaluate_many(x) for f in chart.contravariant_frame()]
    worst = np.zeros(x.shape[0])
    for i, e in enumerate(cov):
        for j, f in enumerate(con):
            worst = np.maximum(worst, np.abs(np.einsum("ij,ij->i", e, f) - (i == j)))
    return worst
