"""The identity-verification harness.

:func:`run_suite` takes a parsed ``.mvf`` file and checks every identity that
applies to its contents, returning one :class:`CheckReport` per identity and
subject.  Every report draws its sample points from its own generator seeded
by ``(seed, crc32(identity))``, so results do not depend on which other
checks ran or in what order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import expr as E
from .algebra import (
    Multivector,
    geometric_product,
    grade_project,
    left_contraction,
    reverse,
    right_contraction,
    scalar_product,
    wedge,
)
from .calculus import (
    check_lagrangian,
    dod,
    dod_fd,
    frame_hestenes,
    hestenes,
    lie_bracket,
)
from .charts import Chart, check_chain_rule, check_chain_rule_corollary, dod_chart, reciprocity_residuals
from .errors import MvfError
from .extensor import ExtensorField, dod_extensor, dod_extensor_definitional, induced_operator
from .fields import MultivectorField, sample_box
from .parser import FieldFile
from .report import CheckReport, compare, make_report, residuals

TOLERANCES = {
    "algebra": 1e-12,
    "exact": 0.0,
    "derivative": 1e-9,
    "fd": 1e-6,
    "position": 1e-12,
    "lagrangian": 1e-8,
    "frame": 1e-9,
    "chain": 1e-8,
}

FD_STEP = 1e-5
LAGRANGIAN_POINTS = 50
ALGEBRA_DIMENSIONS = (2, 3, 4)


def rng_for(seed: int, identity: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(identity.encode())])


# ---------------------------------------------------------------------------
# algebra laws on random multivectors
# ---------------------------------------------------------------------------

def random_multivector(n: int, rng: np.random.Generator, grade: int | None = None) -> Multivector:
    coeffs = rng.standard_normal(1 << n)
    x = Multivector(n, coeffs)
    return grade_project(x, grade) if grade is not None else x


def _norm(x: Multivector) -> float:
    return float(np.linalg.norm(x.coefficients))


def _algebra_report(identity: str, anchor: str, n: int, samples: int, seed: int, tol: float,
                    draw: Callable[[np.random.Generator], tuple[np.ndarray, np.ndarray, float]]) -> CheckReport:
    name = f"{identity}[n={n}]"
    rng = rng_for(seed, name)
    res = np.empty(samples)
    for k in range(samples):
        lhs, rhs, scale = draw(rng)
        res[k] = float(np.max(np.abs(np.atleast_1d(lhs) - np.atleast_1d(rhs)))) / max(scale, 1e-300)
    return make_report(name, anchor, res, None, tol, seed)


def _assoc(kind: str, n: int):
    op = {"wedge": wedge, "geometric": geometric_product}[kind]

    def draw(rng):
        x, y, z = (random_multivector(n, rng) for _ in range(3))
        return op(op(x, y), z).coefficients, op(x, op(y, z)).coefficients, _norm(x) * _norm(y) * _norm(z)
    return draw


def _duality(form: str, n: int):
    def draw(rng):
        r = int(rng.integers(0, n + 1))
        s = int(rng.integers(0, n - r + 1))
        a = random_multivector(n, rng, r)
        b = random_multivector(n, rng, s)
        c = random_multivector(n, rng, r + s)
        lhs = scalar_product(wedge(a, b), c)
        if form == "left":
            rhs = scalar_product(b, left_contraction(a, c))
        elif form == "right":
            rhs = scalar_product(a, right_contraction(c, b))
        else:  # the form A.(B_|C), recorded separately because it does not hold
            rhs = scalar_product(a, left_contraction(b, c))
        return lhs, rhs, _norm(a) * _norm(b) * _norm(c)
    return draw


def _determinant(n: int):
    def draw(rng):
        a1, a2, b1, b2 = (Multivector.vector(rng.standard_normal(n)) for _ in range(4))
        gram = np.array([[scalar_product(a, b) for b in (b1, b2)] for a in (a1, a2)])
        lhs = scalar_product(wedge(a1, a2), wedge(b1, b2))
        return lhs, np.linalg.det(gram), _norm(a1) * _norm(a2) * _norm(b1) * _norm(b2)
    return draw


def _decomposition(n: int):
    def draw(rng):
        a = Multivector.vector(rng.standard_normal(n))
        x = random_multivector(n, rng)
        lhs = geometric_product(a, x)
        rhs = left_contraction(a, x) + wedge(a, x)
        return lhs.coefficients, rhs.coefficients, _norm(a) * _norm(x)
    return draw


def _reverse_law(n: int):
    def draw(rng):
        x, y = random_multivector(n, rng), random_multivector(n, rng)
        lhs = reverse(geometric_product(x, y))
        rhs = geometric_product(reverse(y), reverse(x))
        return lhs.coefficients, rhs.coefficients, _norm(x) * _norm(y)
    return draw


ALGEBRA_LAWS = {
    "algebra.assoc-wedge": ("(X^Y)^Z = X^(Y^Z)", lambda n: _assoc("wedge", n)),
    "algebra.assoc-geometric": ("(XY)Z = X(YZ)", lambda n: _assoc("geometric", n)),
    "algebra.duality-left": ("(A^B).C = B.(A_|C)", lambda n: _duality("left", n)),
    "algebra.duality-right": ("(A^B).C = A.(C|_B)", lambda n: _duality("right", n)),
    "algebra.determinant": ("(a1^a2).(b1^b2) = det[ai.bj]", _determinant),
    "algebra.decomposition": ("aX = a_|X + a^X", _decomposition),
    "algebra.reverse": ("rev(XY) = rev(Y)rev(X)", _reverse_law),
}


def algebra_reports(seed: int = 0, samples: int = 500, tol: float | None = None,
                    dims=ALGEBRA_DIMENSIONS) -> list[CheckReport]:
    tol = TOLERANCES["algebra"] if tol is None else tol
    out = []
    for identity, (anchor, make) in ALGEBRA_LAWS.items():
        for n in dims:
            out.append(_algebra_report(identity, anchor, n, samples, seed, tol, make(n)))
    return out


def literal_duality_report(n: int, seed: int = 0, samples: int = 500,
                           tol: float | None = None) -> CheckReport:
    """``(A^B).C = A.(B_|C)`` read literally; see the README for why it fails."""
    tol = TOLERANCES["algebra"] if tol is None else tol
    return _algebra_report("algebra.duality-literal", "(A^B).C = A.(B_|C)", n, samples, seed,
                           tol, _duality("literal", n))


# ---------------------------------------------------------------------------
# fixture
# ---------------------------------------------------------------------------

@dataclass
class Fixture:
    """Typed view of a parsed ``.mvf`` file."""

    n: int
    domain: tuple | None
    fields: dict[str, MultivectorField] = field(default_factory=dict)
    charts: dict[str, Chart] = field(default_factory=dict)
    extensors: dict[str, ExtensorField] = field(default_factory=dict)

    @classmethod
    def from_file(cls, ff: FieldFile) -> Fixture:
        fx = cls(ff.dim, ff.domain)
        for name, node in ff.fields.items():
            fx.fields[name] = MultivectorField(node, ff.dim, ff.domain, name=name)
        for name, cdef in ff.charts.items():
            fx.charts[name] = Chart.from_def(cdef, ff.dim, ff.domain)
        for name, rows in ff.extensors.items():
            fx.extensors[name] = ExtensorField.from_matrix(rows, domain=ff.domain, name=name)
        return fx

    def scalars(self) -> list[MultivectorField]:
        return [f for f in self.fields.values() if f.is_scalar_field() and E.uses_coordinates(f.expr)]

    def vectors(self) -> list[MultivectorField]:
        return [f for f in self.fields.values() if f.grades == {1}]

    def nonscalar(self) -> list[MultivectorField]:
        return [f for f in self.fields.values() if f.grades - {0} and E.uses_coordinates(f.expr)]

    def constant_direction(self) -> Multivector:
        return Multivector.vector([1.0 / (1 + k) * (-1) ** k for k in range(self.n)])

    def directions(self) -> list:
        return [self.constant_direction()] + self.vectors()

    def scalar_pair(self) -> tuple[MultivectorField, MultivectorField]:
        s = self.scalars()
        n = self.n
        f = s[0] if s else MultivectorField.parse("1 + x1*x1", n, domain=self.domain)
        g = s[1] if len(s) > 1 else MultivectorField.parse(f"exp(0.5*x{n})", n, domain=self.domain)
        return f, g

    def vector_triple(self) -> list[MultivectorField]:
        v = self.vectors()
        pos = MultivectorField.position(self.n, domain=self.domain)
        while len(v) < 3:
            v.append(pos if all(x.expr != pos.expr for x in v) else v[-1] * 2.0)
        return v[:3]


def _label(x) -> str:
    if isinstance(x, MultivectorField):
        return x.name or "field"
    return "const"


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------

class Suite:
    """Runs the identity checks for one fixture; see :func:`run_suite`."""

    def __init__(self, fixture: Fixture, samples: int = 100, seed: int = 0, tol: float | None = None):
        if samples < 1:
            raise ValueError("samples must be at least 1")
        if tol is not None and tol < 0:
            raise ValueError("tolerance must be non-negative")
        self.fx = fixture
        self.samples = samples
        self.seed = seed
        self.tol_override = tol

    def tol(self, key: str, default: float | None = None) -> float:
        if self.tol_override is not None:
            return self.tol_override
        return TOLERANCES[key] if default is None else default

    def points(self, identity: str, box=None, count: int | None = None) -> np.ndarray:
        box = self.fx.domain if box is None else box
        count = self.samples if count is None else count
        return sample_box(box, self.fx.n, count, rng_for(self.seed, identity))

    def guarded(self, identity: str, anchor: str, tol: float, fn: Callable[[], CheckReport]) -> CheckReport:
        try:
            return fn()
        except (MvfError, ArithmeticError) as err:
            rep = CheckReport(identity, f"{anchor} [error: {err}]", self.samples, self.seed,
                              float("inf"), None, tol, False)
            return rep

    def compare_fields(self, identity: str, anchor: str, lhs, rhs, tol: float,
                       box=None) -> CheckReport:
        pts = self.points(identity, box)
        lv = lhs.evaluate_many(pts) if isinstance(lhs, MultivectorField) else lhs(pts)
        rv = rhs.evaluate_many(pts) if isinstance(rhs, MultivectorField) else rhs(pts)
        return compare(identity, anchor, lv, rv, pts, tol, self.seed)

    def compare_many(self, identity: str, anchor: str, pairs, tol: float, box=None) -> CheckReport:
        """Aggregate several (lhs, rhs) pairs into one report (max residual)."""
        pts = self.points(identity, box)
        res = np.zeros(pts.shape[0])
        for lhs, rhs in pairs:
            lv = lhs.evaluate_many(pts) if isinstance(lhs, MultivectorField) else lhs(pts)
            rv = rhs.evaluate_many(pts) if isinstance(rhs, MultivectorField) else rhs(pts)
            res = np.maximum(res, residuals(lv, rv))
        return make_report(identity, anchor, res, pts, tol, self.seed)

    def run(self, algebra_samples: int = 500) -> list[CheckReport]:
        reports: list[CheckReport] = []
        if self.tol_override is None:
            reports.extend(algebra_reports(self.seed, algebra_samples))
        else:
            reports.extend(algebra_reports(self.seed, algebra_samples, self.tol_override))
        for section in (self.derivative_laws, self.fd_oracle, self.lie_algebra, self.hestenes_laws,
                        self.lagrangian_laws, self.extensor_laws, self.chart_laws):
            reports.extend(section())
        return reports

    # -- directional derivatives -------------------------------------------------
    def derivative_laws(self) -> Iterator[CheckReport]:
        fx = self.fx
        dirs = fx.directions()
        f, g = fx.scalar_pair()
        va, vb = fx.vector_triple()[:2]
        tol = self.tol("derivative")
        for name, X in fx.fields.items():
            ident = f"dod.grade-preserving[{name}]"
            if X.grade is not None:
                yield self.guarded(ident, "grade(a.d X) = grade(X)", self.tol("exact"),
                                   lambda X=X, ident=ident: self._grade_preserving(ident, X, dirs))
            ident = f"dod.linearity[{name}]"
            yield self.guarded(ident, "(f a + g b).d X = f a.d X + g b.d X", tol,
                               lambda X=X, ident=ident: self.compare_many(ident, "(f a + g b).d X = f a.d X + g b.d X", [
                                   (dod(f * va + g * vb, X), f * dod(va, X) + g * dod(vb, X)),
                                   (dod(2.0 * va - 3.0 * vb, X), 2.0 * dod(va, X) - 3.0 * dod(vb, X)),
                               ], tol))
            ident = f"dod.module-rule[{name}]"
            yield self.guarded(ident, "a.d(fX) = (a.d f)X + f a.d X", tol,
                               lambda X=X, ident=ident: self.compare_many(ident, "a.d(fX) = (a.d f)X + f a.d X", [
                                   (dod(a, f * X), dod(a, f) * X + f * dod(a, X)) for a in dirs
                               ], tol))
        names = list(fx.fields)
        pairs = [(fx.fields[a], fx.fields[b]) for a, b in zip(names, names[1:] + names[:1])]
        a = dirs[-1]
        for op in ("^", "*", "_|", "|_", "."):
            ident = f"dod.leibniz[{op}]"
            anchor = f"a.d(X{op}Y) = (a.d X){op}Y + X{op}(a.d Y)"
            yield self.guarded(ident, anchor, tol, lambda op=op, ident=ident, anchor=anchor: self.compare_many(
                ident, anchor,
                [(dod(a, X.product(op, Y)), dod(a, X).product(op, Y) + X.product(op, dod(a, Y)))
                 for X, Y in pairs], tol))

    def _grade_preserving(self, ident: str, X: MultivectorField, dirs) -> CheckReport:
        k = X.grade
        pts = self.points(ident)
        mask = np.array([bin(m).count("1") != k for m in range(1 << X.n)])
        res = np.zeros(pts.shape[0])
        for a in dirs:
            d = dod(a, X)
            if not d.grades <= {k}:
                res[:] = np.inf
            res = np.maximum(res, np.max(np.abs(d.evaluate_many(pts)[:, mask]), axis=1, initial=0.0))
        return make_report(ident, "grade(a.d X) = grade(X)", res, pts, self.tol("exact"), self.seed)

    def fd_oracle(self) -> Iterator[CheckReport]:
        tol = self.tol("fd")
        for name, X in self.fx.fields.items():
            ident = f"fd-oracle[{name}]"
            anchor = "dX/dx^mu = central difference (h=1e-5)"

            def run(X=X, ident=ident, anchor=anchor):
                pts = self.points(ident)
                res = np.zeros(pts.shape[0])
                for mu in range(1, X.n + 1):
                    sym = X.partial(mu).evaluate_many(pts)
                    num = E.fd_partial_array(X.expr, mu, pts, X.n, FD_STEP)
                    res = np.maximum(res, residuals(sym, num))
                return make_report(ident, anchor, res, pts, tol, self.seed)
            yield self.guarded(ident, anchor, tol, run)
        # the directional derivative itself against the same oracle
        for name, X in self.fx.fields.items():
            ident = f"fd-oracle-dod[{name}]"
            anchor = "a.d X = sum (a.b^mu) central difference"
            a = self.fx.directions()[-1]
            yield self.guarded(ident, anchor, tol, lambda X=X, ident=ident, anchor=anchor, a=a: self.compare_fields(
                ident, anchor, dod(a, X), lambda p: dod_fd(a, X, p, FD_STEP), tol))

    # -- Lie algebra -----------------------------------------------------------
    def lie_algebra(self) -> Iterator[CheckReport]:
        fx = self.fx
        a, b, c = fx.vector_triple()
        f, _ = fx.scalar_pair()
        tol = self.tol("derivative")
        checks = {
            "bracket.distributive": ("[a, b + c] = [a, b] + [a, c]", [
                (lie_bracket(a, b + c), lie_bracket(a, b) + lie_bracket(a, c)),
                (lie_bracket(a + b, c), lie_bracket(a, c) + lie_bracket(b, c)),
            ]),
            "bracket.f-rule-left": ("[fa, b] = f[a, b] - (b.d f)a", [
                (lie_bracket(f * a, b), f * lie_bracket(a, b) - dod(b, f) * a),
            ]),
            "bracket.f-rule-right": ("[a, fb] = (a.d f)b + f[a, b]", [
                (lie_bracket(a, f * b), dod(a, f) * b + f * lie_bracket(a, b)),
            ]),
            "bracket.jacobi": ("[a,[b,c]] + [b,[c,a]] + [c,[a,b]] = 0", [
                (lie_bracket(a, lie_bracket(b, c)) + lie_bracket(b, lie_bracket(c, a))
                 + lie_bracket(c, lie_bracket(a, b)), MultivectorField(E.ZERO, fx.n, fx.domain)),
            ]),
            "bracket.antisymmetry": ("[a, b] = -[b, a]", [(lie_bracket(a, b), -lie_bracket(b, a))]),
        }
        for ident, (anchor, pairs) in checks.items():
            yield self.guarded(ident, anchor, tol, lambda i=ident, an=anchor, p=pairs: self.compare_many(i, an, p, tol))
        for name, X in fx.fields.items():
            ident = f"bracket.commutator[{name}]"
            anchor = "a.d(b.d X) - b.d(a.d X) = [a,b].d X"
            yield self.guarded(ident, anchor, tol, lambda X=X, ident=ident, anchor=anchor: self.compare_fields(
                ident, anchor, dod(a, dod(b, X)) - dod(b, dod(a, X)), dod(lie_bracket(a, b), X), tol))
        if fx.n >= 2:
            ident = "bracket.worked-example"
            anchor = "[x2 b1, x1 b2] = x2 b2 - x1 b1"
            p = MultivectorField.parse("x2*b1", fx.n, domain=fx.domain)
            q = MultivectorField.parse("x1*b2", fx.n, domain=fx.domain)
            hand = MultivectorField.parse("x2*b2 - x1*b1", fx.n, domain=fx.domain)
            yield self.guarded(ident, anchor, self.tol("exact"), lambda: self.compare_fields(
                ident, anchor, lie_bracket(p, q), hand, self.tol("exact")))

    # -- Hestenes derivatives ----------------------------------------------------
    def frames(self) -> list[tuple[str, list, list]]:
        n = self.fx.n
        basis = [Multivector.blade(n, [mu]) for mu in range(1, n + 1)]
        out = [("scaled", [2.0 * e for e in basis], [0.5 * e for e in basis])]
        if n >= 2:
            k = n  # rotate the b1-b2 plane by an angle that depends on the last coordinate
            rot = [
                MultivectorField.parse(f"cos(x{k})*b1 + sin(x{k})*b2", n, domain=self.fx.domain),
                MultivectorField.parse(f"-sin(x{k})*b1 + cos(x{k})*b2", n, domain=self.fx.domain),
            ] + [MultivectorField.constant(basis[m], domain=self.fx.domain) for m in range(2, n)]
            out.append(("rotating", rot, rot))
        return out

    def hestenes_laws(self) -> Iterator[CheckReport]:
        fx = self.fx
        tol = self.tol("frame")
        frames = self.frames()
        for name, X in fx.fields.items():
            ident = f"hestenes.frame-independence[{name}]"
            anchor = "e^mu * (e_mu.d X) = b^mu * (b_mu.d X)"

            def run(X=X, ident=ident, anchor=anchor):
                pts = self.points(ident)
                pairs = []
                for _, fr, co in frames:
                    for kind in ("curl", "divergence", "gradient"):
                        pairs.append((frame_hestenes(kind, X, fr, co, points=pts), hestenes(kind, X)))
                res = np.zeros(pts.shape[0])
                for lhs, rhs in pairs:
                    res = np.maximum(res, residuals(lhs.evaluate_many(pts), rhs.evaluate_many(pts)))
                return make_report(ident, anchor, res, pts, tol, self.seed)
            yield self.guarded(ident, anchor, tol, run)
            ident = f"hestenes.decomposition[{name}]"
            anchor = "dX = d_|X + d^X"
            yield self.guarded(ident, anchor, tol, lambda X=X, ident=ident, anchor=anchor: self.compare_fields(
                ident, anchor, hestenes("gradient", X), hestenes("divergence", X) + hestenes("curl", X), tol))
        pos = MultivectorField.position(fx.n, domain=fx.domain)
        ident = "hestenes.position-values"
        anchor = "d^x = 0, d_|x = n, dx = n"
        n_field = MultivectorField(E.num(fx.n), fx.n, fx.domain)
        zero = MultivectorField(E.ZERO, fx.n, fx.domain)
        yield self.guarded(ident, anchor, self.tol("position"), lambda: self.compare_many(ident, anchor, [
            (hestenes("curl", pos), zero), (hestenes("divergence", pos), n_field),
            (hestenes("gradient", pos), n_field)], self.tol("position")))

    def lagrangian_pairs(self) -> list[tuple[MultivectorField, MultivectorField]]:
        """Each non-scalar field paired with the field spanning the most grades.

        Pairing homogeneous fields of mismatched grades would make both sides
        vanish identically, so the partner is chosen to be as mixed as possible.
        """
        ns = self.fx.nonscalar()
        if not ns:
            return []
        partner = max(ns, key=lambda x: len(x.grades))
        return [(x, partner) for x in ns]

    def lagrangian_laws(self) -> Iterator[CheckReport]:
        tol = self.tol("lagrangian")
        for X, Y in self.lagrangian_pairs():
            for variant in "abc":
                ident = f"lagrangian-{variant}[{_label(X)},{_label(Y)}]"
                yield self.guarded(ident, "", tol, lambda v=variant, X=X, Y=Y, ident=ident: self._lagrangian(v, X, Y, ident, tol))

    def _lagrangian(self, variant, X, Y, ident, tol) -> CheckReport:
        pts = self.points(ident, count=min(self.samples, LAGRANGIAN_POINTS))
        rep = check_lagrangian(variant, X, Y, pts, tol, self.seed)
        return CheckReport(ident, rep.anchor, rep.points, rep.seed, rep.max_residual, rep.worst_point,
                           rep.tol, rep.passed)

    # -- extensor fields -----------------------------------------------------------
    def extensor_laws(self) -> Iterator[CheckReport]:
        fx = self.fx
        tol = self.tol("derivative")
        f, g = fx.scalar_pair()
        va, vb = fx.vector_triple()[:2]
        dirs = fx.directions()
        ext = list(fx.extensors.items())
        for k, (name, t) in enumerate(ext):
            other = ext[(k + 1) % len(ext)][1]

            ident = f"ext.definition[{name}]"
            anchor = "(a.d t)(X) = a.d(t(X)) - t(a.d X)"

            def run_def(t=t, ident=ident, anchor=anchor):
                pts = self.points(ident)
                res = np.zeros(pts.shape[0])
                for a in dirs:
                    for X in fx.vector_triple():
                        lhs = induced_operator(dod_extensor(a, t), X).evaluate_many(pts)
                        rhs = dod_extensor_definitional(a, t, [X], pts)
                        res = np.maximum(res, residuals(lhs, rhs))
                return make_report(ident, anchor, res, pts, tol, self.seed)
            yield self.guarded(ident, anchor, tol, run_def)

            ident = f"ext.adjoint-involution[{name}]"
            anchor = "(t^dagger)^dagger = t"
            yield self.guarded(ident, anchor, self.tol("exact"), lambda t=t, ident=ident, anchor=anchor: make_report(
                ident, anchor, np.array([0.0 if t.adjoint().adjoint().structurally_equal(t) else np.inf]),
                None, self.tol("exact"), self.seed))

            ident = f"ext.linearity[{name}]"
            anchor = "(f a + g b).d t = f a.d t + g b.d t"
            yield self.guarded(ident, anchor, tol, lambda t=t, ident=ident, anchor=anchor: self._tables(
                ident, anchor, dod_extensor(f * va + g * vb, t),
                f.expr, dod_extensor(va, t), g.expr, dod_extensor(vb, t), tol))

            ident = f"ext.additivity[{name}]"
            anchor = "a.d(t + u) = a.d t + a.d u"
            a = dirs[-1]
            yield self.guarded(ident, anchor, tol, lambda t=t, other=other, ident=ident, anchor=anchor, a=a: self._tables(
                ident, anchor, dod_extensor(a, t + other),
                E.ONE, dod_extensor(a, t), E.ONE, dod_extensor(a, other), tol))

            ident = f"ext.module-rule[{name}]"
            anchor = "a.d(f t) = (a.d f) t + f a.d t"
            yield self.guarded(ident, anchor, tol, lambda t=t, ident=ident, anchor=anchor, a=a: self._tables(
                ident, anchor, dod_extensor(a, t.scale(f)),
                dod(a, f).expr, t, f.expr, dod_extensor(a, t), tol))

            ident = f"ext.adjoint-commutes[{name}]"
            anchor = "(a.d t)^dagger = a.d(t^dagger)"
            yield self.guarded(ident, anchor, tol, lambda t=t, ident=ident, anchor=anchor: self._tables(
                ident, anchor, dod_extensor(dirs[-1], t).adjoint(),
                E.ONE, dod_extensor(dirs[-1], t.adjoint()), E.ZERO, None, tol))

    def _tables(self, ident, anchor, lhs: ExtensorField, c1: E.Node, t1: ExtensorField,
                c2: E.Node, t2: ExtensorField | None, tol: float) -> CheckReport:
        """Compare ``lhs`` with ``c1 t1 + c2 t2`` entry-wise at sample points."""
        pts = self.points(ident)
        n = self.fx.n
        left = lhs.tables(pts).reshape(pts.shape[0], -1)
        right = E.evaluate_array(c1, pts, n)[:, :1] * t1.tables(pts).reshape(pts.shape[0], -1)
        if t2 is not None:
            right = right + E.evaluate_array(c2, pts, n)[:, :1] * t2.tables(pts).reshape(pts.shape[0], -1)
        return compare(ident, anchor, left, right, pts, tol, self.seed)

    # -- charts -----------------------------------------------------------------
    def chart_laws(self) -> Iterator[CheckReport]:
        fx = self.fx
        tol = self.tol("frame")
        ident_chart = Chart.identity(fx.n, fx.domain)
        for name, X in fx.fields.items():
            ident = f"dod-chart-identity[{name}]"
            anchor = "a.d X = a.d_o X on the identity chart"
            a = fx.constant_direction()
            yield self.guarded(ident, anchor, tol, lambda X=X, ident=ident, anchor=anchor, a=a: self.compare_fields(
                ident, anchor, dod_chart(ident_chart, a, ident_chart.pull(X)), dod(a, X), tol))
        for cname, chart in fx.charts.items():
            yield from self._chart(cname, chart)

    def _chart(self, cname: str, chart: Chart) -> Iterator[CheckReport]:
        fx = self.fx
        tol = self.tol("frame")
        n = fx.n
        box = chart.domain

        ident = f"chart.roundtrip[{cname}]"
        anchor = "phi(phi^-1(x)) = x and phi^-1(phi(x_o)) = x_o"
        rt_tol = self.tol("frame", chart.tol)

        def roundtrip():
            pts = self.points(ident, box)
            r1, r2 = chart.roundtrip_residuals(pts)
            return make_report(ident, anchor, np.maximum(r1, r2), pts, rt_tol, self.seed)
        yield self.guarded(ident, anchor, rt_tol, roundtrip)

        ident18 = f"chart.reciprocity[{cname}]"
        anchor18 = "(b_mu.d x_o).(d_o x^nu) = delta"
        yield self.guarded(ident18, anchor18, tol, lambda: make_report(
            ident18, anchor18, reciprocity_residuals(chart, self.points(ident18, box)),
            self.points(ident18, box), tol, self.seed))

        ident_ns = f"chart.nonsingular[{cname}]"

        def nonsingular():
            pts = self.points(ident_ns, box)
            chart.check_nonsingular(pts)
            return make_report(ident_ns, "cond J < 1e12", np.zeros(pts.shape[0]), pts, tol, self.seed)
        yield self.guarded(ident_ns, "cond J < 1e12", tol, nonsingular)

        basis = [Multivector.blade(n, [mu]) for mu in range(1, n + 1)]
        ident20a = f"chart.jacobian-columns[{cname}]"
        anchor20a = "J(b_mu) = b_mu.d x_o"

        def cols():
            pts = self.points(ident20a, box)
            jac = chart.jacobian()
            cov = chart.covariant_frame()
            pairs = [(induced_operator(jac, MultivectorField.constant(b, domain=box, chart=cname)), cov[mu])
                     for mu, b in enumerate(basis)]
            res = np.zeros(pts.shape[0])
            for lhs, rhs in pairs:
                res = np.maximum(res, residuals(lhs.evaluate_many(pts), rhs.evaluate_many(pts)))
            return make_report(ident20a, anchor20a, res, pts, tol, self.seed)
        yield self.guarded(ident20a, anchor20a, tol, cols)

        ident20b = f"chart.inverse-adjoint[{cname}]"
        anchor20b = "J^*(b^nu) = d_o x^nu with J^* = (J^-1)^dagger"

        def star():
            pts = self.points(ident20b, box)
            js = chart.jacobian_star(pts)
            con = chart.contravariant_frame()
            res = np.zeros(pts.shape[0])
            for nu, b in enumerate(basis):
                lhs = induced_operator(js, MultivectorField.constant(b, domain=box, chart=cname))
                res = np.maximum(res, residuals(lhs.evaluate_many(pts), con[nu].evaluate_many(pts)))
            return make_report(ident20b, anchor20b, res, pts, tol, self.seed)
        yield self.guarded(ident20b, anchor20b, tol, star)

        ident_inv = f"chart.jacobian-inverse[{cname}]"
        anchor_inv = "J^-1 o J = id"

        def inverse():
            pts = self.points(ident_inv, box)
            prod = np.einsum("kij,kjl->kil", chart.jacobian_inverse(pts).tables(pts), chart.jacobian().tables(pts))
            res = np.max(np.abs(prod - np.eye(n)), axis=(1, 2))
            return make_report(ident_inv, anchor_inv, res, pts, tol, self.seed)
        yield self.guarded(ident_inv, anchor_inv, tol, inverse)

        ctol = self.tol("chain")
        chart_dirs = [self.fx.constant_direction()] + [chart.pull(v) for v in fx.vectors()[:1]]
        for fname, X in fx.fields.items():
            ident = f"chain-rule[{cname},{fname}]"
            anchor = "J(a).d_o X = a.d X"

            def chain(X=X, ident=ident, anchor=anchor):
                pts = self.points(ident, box)
                reps = [check_chain_rule(chart, X, a, pts, ctol, self.seed) for a in chart_dirs]
                worst = max(reps, key=lambda r: r.max_residual)
                return CheckReport(ident, anchor, worst.points, self.seed, worst.max_residual,
                                   worst.worst_point, ctol, all(r.passed for r in reps))
            yield self.guarded(ident, anchor, ctol, chain)

            ident = f"chain-rule-corollary[{cname},{fname}]"
            anchor = "(b_mu.d x_o).d_o X = b_mu.d X"

            def corollary(X=X, ident=ident, anchor=anchor):
                pts = self.points(f"chain-rule[{cname},{fname}]", box)
                reps = [check_chain_rule_corollary(chart, X, mu, pts, ctol, self.seed) for mu in range(1, n + 1)]
                worst = max(reps, key=lambda r: r.max_residual)
                return CheckReport(ident, anchor, worst.points, self.seed, worst.max_residual,
                                   worst.worst_point, ctol, all(r.passed for r in reps))
            yield self.guarded(ident, anchor, ctol, corollary)


def run_suite(ff: FieldFile, samples: int = 100, seed: int = 0, tol: float | None = None,
              algebra_samples: int = 500) -> list[CheckReport]:
    """Check every applicable identity on the contents of ``ff``."""
    return Suite(Fixture.from_file(ff), samples, seed, tol).run(algebra_samples)
