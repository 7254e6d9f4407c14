"""Directional ordinary derivatives, Lie brackets and Hestenes derivatives.

Every operator here is built symbolically from coordinate partials, so
results are new :class:`MultivectorField` objects that can be evaluated,
differentiated again, or rendered.  The directional derivative along ``a`` is

    a . d X = sum_mu (a . b^mu) dX/dx^mu

with ``a`` either a constant vector or a vector field.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from . import expr as E
from .algebra import Multivector, product_arrays
from .errors import DimensionError, FrameError, GradeError
from .fields import MultivectorField, sample_box
from .report import CheckReport, compare

Direction = Union[Multivector, MultivectorField, Sequence[float]]

HESTENES_OPS = {"curl": "^", "divergence": "_|", "gradient": "*"}


def direction_components(a: Direction, n: int, chart: str | None = None) -> list[E.Node]:
    """Scalar expressions ``a . b^mu`` for ``mu = 1..n``."""
    if isinstance(a, MultivectorField):
        if a.n != n:
            raise DimensionError(f"direction has n={a.n}, field has n={n}")
        if a.chart != chart:
            raise DimensionError(f"direction lives in chart {a.chart!r}, field in {chart!r}")
        if not a.is_vector_field():
            raise GradeError("a direction field must be grade-1")
        return [E.binop(".", a.expr, E.Basis(mu)) for mu in range(1, n + 1)]
    if isinstance(a, Multivector):
        if a.n != n:
            raise DimensionError(f"direction has n={a.n}, field has n={n}")
        if a.grade_parts() - {1}:
            raise GradeError("a constant direction must be a vector")
        comps = a.vector_components()
    else:
        comps = [float(v) for v in a]
        if len(comps) != n:
            raise DimensionError(f"direction has {len(comps)} components, expected {n}")
    return [E.num(c) for c in comps]


def dod(a: Direction, X: MultivectorField) -> MultivectorField:
    """Directional ordinary derivative ``a . d X`` in X's own coordinates."""
    coeffs = direction_components(a, X.n, X.chart)
    terms = []
    for mu, c in enumerate(coeffs, start=1):
        if E.is_zero(c):
            continue
        terms.append(E.mul(c, E.differentiate(X.expr, mu)))
    return X._like(E.sum_nodes(terms))


def dod_fd(a: Direction, X: MultivectorField, points, h: float = 1e-5) -> np.ndarray:
    """Finite-difference oracle for :func:`dod` at an array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    coeffs = direction_components(a, X.n, X.chart)
    out = np.zeros((pts.shape[0], 1 << X.n))
    for mu, c in enumerate(coeffs, start=1):
        cv = E.evaluate_array(c, pts, X.n)[:, :1]
        out += cv * E.fd_partial_array(X.expr, mu, pts, X.n, h)
    return out


def lie_bracket(a: MultivectorField, b: MultivectorField) -> MultivectorField:
    """``[a, b] = a.d b - b.d a`` for vector fields."""
    for v in (a, b):
        if not v.is_vector_field():
            raise GradeError("the Lie bracket is defined for vector fields")
    if a.n != b.n:
        raise DimensionError(f"dimension mismatch: n={a.n} vs n={b.n}")
    return dod(a, b) - dod(b, a)


def hestenes(kind: str, X: MultivectorField) -> MultivectorField:
    """Curl, left-contracted divergence or gradient in the fiducial frame."""
    try:
        op = HESTENES_OPS[kind]
    except KeyError:
        raise ValueError(f"kind must be one of {sorted(HESTENES_OPS)}, got {kind!r}") from None
    terms = []
    for mu in range(1, X.n + 1):
        d = E.differentiate(X.expr, mu)
        terms.append(E.binop(op, E.Basis(mu), d))
    return X._like(E.sum_nodes(terms))


def curl(X: MultivectorField) -> MultivectorField:
    return hestenes("curl", X)


def divergence(X: MultivectorField) -> MultivectorField:
    return hestenes("divergence", X)


def gradient(X: MultivectorField) -> MultivectorField:
    return hestenes("gradient", X)


def _as_frame_field(v, X: MultivectorField) -> MultivectorField:
    if isinstance(v, MultivectorField):
        return v
    if isinstance(v, Multivector):
        return MultivectorField.constant(v, domain=X.domain, chart=X.chart)
    return MultivectorField.constant(Multivector.vector(v), domain=X.domain, chart=X.chart)


def reciprocity_residual(frame, coframe, points: np.ndarray, n: int) -> tuple[float, np.ndarray]:
    """Max over points of ``|e_mu . e^nu - delta|`` and the worst point."""
    ev = [f.evaluate_many(points, check_domain=False) for f in frame]
    cv = [f.evaluate_many(points, check_domain=False) for f in coframe]
    worst = np.zeros(points.shape[0])
    for mu in range(n):
        for nu in range(n):
            g = np.einsum("ij,ij->i", ev[mu], cv[nu])
            worst = np.maximum(worst, np.abs(g - (1.0 if mu == nu else 0.0)))
    k = int(np.argmax(worst))
    return float(worst[k]), points[k]


def frame_hestenes(kind: str, X: MultivectorField, frame, coframe, *, points=None,
                   tol: float = 1e-9, seed: int = 0) -> MultivectorField:
    """``sum_mu e^mu * (e_mu . d X)`` for a reciprocal frame pair.

    Reciprocity is verified at ``points`` (or 100 seeded samples of X's
    domain); a violation raises :class:`FrameError` with the worst residual.
    """
    op = HESTENES_OPS[kind]
    n = X.n
    if len(frame) != n or len(coframe) != n:
        raise DimensionError(f"frame and coframe need {n} vectors each")
    frame = [_as_frame_field(v, X) for v in frame]
    coframe = [_as_frame_field(v, X) for v in coframe]
    if points is None:
        points = sample_box(X.domain, n, 100, np.random.default_rng(seed))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    res, where = reciprocity_residual(frame, coframe, points, n)
    if res > tol:
        raise FrameError(
            f"frame pair is not reciprocal: residual {res:.3e} at {tuple(where)}", res, tuple(where)
        )
    terms = [E.binop(op, e_up.expr, dod(e_dn, X).expr) for e_dn, e_up in zip(frame, coframe)]
    return X._like(E.sum_nodes(terms))


# ---------------------------------------------------------------------------
# gradients of linear forms in an auxiliary vector slot
# ---------------------------------------------------------------------------

LINEAR_FORMS = {"wedge": "^", "left": "_|", "geometric": "*"}


def linear_gradient(form: str, X, Y, point=None) -> Multivector:
    """``sum_mu F(b_mu) b^mu`` for ``F(n) = (n * X) . Y`` with ``*`` one of
    ``wedge``, ``left`` (contraction) or ``geometric``.

    ``X`` and ``Y`` may be multivectors or fields (then ``point`` is needed).
    """
    op = LINEAR_FORMS[form]
    kind = {"^": "wedge", "_|": "left", "*": "geometric"}[op]
    xv = X.evaluate(point) if isinstance(X, MultivectorField) else X
    yv = Y.evaluate(point) if isinstance(Y, MultivectorField) else Y
    n = xv.n
    comps = []
    for mu in range(n):
        e = np.zeros(1 << n)
        e[1 << mu] = 1.0
        slot = product_arrays(kind, e, xv.coefficients)
        comps.append(float(np.dot(slot, yv.coefficients)))
    return Multivector.vector(comps)


def linear_gradient_field(form: str, X: MultivectorField, Y: MultivectorField) -> MultivectorField:
    """The vector field ``p -> sum_mu ((b_mu * X(p)) . Y(p)) b^mu``."""
    op = LINEAR_FORMS[form]
    comps = [E.binop(".", E.binop(op, E.Basis(mu), X.expr), Y.expr) for mu in range(1, X.n + 1)]
    return X._like(E.vector_expr(comps))


def scalar_divergence(V: MultivectorField) -> MultivectorField:
    """``sum_mu b^mu . dV/dx^mu``."""
    terms = [E.binop(".", E.Basis(mu), E.differentiate(V.expr, mu)) for mu in range(1, V.n + 1)]
    return V._like(E.sum_nodes(terms))


LAGRANGIAN_VARIANTS = {
    "a": ("curl", "divergence", "wedge"),
    "b": ("divergence", "curl", "left"),
    "c": ("gradient", "gradient", "geometric"),
}

LAGRANGIAN_ANCHORS = {
    "a": "(d^X).Y + X.(d_|Y) = d.(grad_n (n^X).Y)",
    "b": "(d_|X).Y + X.(d^Y) = d.(grad_n (n_|X).Y)",
    "c": "(dX).Y + X.(dY) = d.(grad_n (nX).Y)",
}


def lagrangian_sides(variant: str, X: MultivectorField, Y: MultivectorField) -> tuple[MultivectorField, MultivectorField]:
    first, second, form = LAGRANGIAN_VARIANTS[variant]
    lhs = hestenes(first, X).dot(Y) + X.dot(hestenes(second, Y))
    rhs = scalar_divergence(linear_gradient_field(form, X, Y))
    return lhs, rhs


def check_lagrangian(variant: str, X: MultivectorField, Y: MultivectorField, points=None,
              tol: float = 1e-8, seed: int = 0, count: int = 50) -> CheckReport:
    """Verify one of the three Lagrangian-theory identities at sample points."""
    if variant not in LAGRANGIAN_VARIANTS:
        raise ValueError(f"variant must be 'a', 'b' or 'c', got {variant!r}")
    if points is None:
        points = sample_box(X.domain, X.n, count, np.random.default_rng(seed))
    lhs, rhs = lagrangian_sides(variant, X, Y)
    return compare(f"lagrangian-{variant}", LAGRANGIAN_ANCHORS[variant], lhs.evaluate_many(points),
                   rhs.evaluate_many(points), points, tol, seed)
