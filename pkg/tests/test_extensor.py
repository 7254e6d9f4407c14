import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mvfields import expr as E
from mvfields.algebra import Multivector, scalar_product
from mvfields.calculus import dod, lie_bracket
from mvfields.errors import DimensionError, GradeError, SignatureError, SingularJacobianError
from mvfields.extensor import (
    Extensor,
    ExtensorField,
    dod_extensor,
    dod_extensor_definitional,
    induced_operator,
)
from mvfields.fields import MultivectorField
from mvfields.parser import parse_expression

BOX = ((-1.0, 1.0), (-1.0, 1.0))
# t(a) = (a . b1) b2, so the only nonzero entry sits in row 2, column 1
PROJ = Extensor.from_matrix([[0, 0], [1, 0]])


def b(*idx, coef=1.0):
    return Multivector.blade(2, list(idx), coef)


def F(text, n=2):
    return MultivectorField.parse(text, n, domain=BOX if n == 2 else ((-1.0, 1.0),) * n)


def T(rows, n=2):
    return ExtensorField.from_matrix([[parse_expression(str(v), n) for v in r] for r in rows],
                                     domain=BOX if n == 2 else ((-1.0, 1.0),) * n)


def pts(n=2, count=30, seed=0):
    return np.random.default_rng(seed).uniform(-1, 1, (count, n))


# -- constant extensors -------------------------------------------------------------------

def test_identity_applies_as_identity():
    v = Multivector.vector([0.3, -2.0])
    assert Extensor.identity(2)(v) == v


def test_projection_example():
    assert PROJ(b(1) + 3 * b(2)) == b(2)
    zero = Extensor.from_matrix(np.zeros((2, 2)))
    assert zero(b(1)).max_abs() == 0.0


def test_adjoint_examples():
    assert Extensor.identity(3).adjoint() == Extensor.identity(3)
    # t(a) = (a.b1) b2  ->  t+(a) = (a.b2) b1
    assert PROJ.adjoint()(b(2)) == b(1)
    assert PROJ.adjoint()(b(1)).max_abs() == 0.0


def test_grade_signature_is_enforced():
    with pytest.raises(SignatureError):
        PROJ(b(1, 2))
    with pytest.raises(SignatureError):
        PROJ(b(1), b(2))
    with pytest.raises(DimensionError):
        PROJ(Multivector.vector([1, 0, 0]))


def test_bivector_extensor():
    t = Extensor(3, [{2}], {2}, 2 * np.eye(3))
    B = Multivector.blade(3, [1, 3])
    assert t(B) == 2 * B
    with pytest.raises(SignatureError):
        t(Multivector.blade(3, [1]))


def test_two_slot_extensor():
    # t(a, c) = (a.b1)(c.b2) b1
    table = np.zeros((2, 2, 2))
    table[0, 0, 1] = 1.0
    t = Extensor(2, [{1}, {1}], {1}, table)
    assert t(b(1), b(2)) == b(1)
    assert t(b(2), b(2)).max_abs() == 0.0
    with pytest.raises(SignatureError):
        t.adjoint()


def test_inverse_and_singularity():
    m = Extensor.from_matrix([[2, 1], [0, 1]])
    assert m.compose(m.inverse()).is_close(Extensor.identity(2), atol=1e-15)
    with pytest.raises(SingularJacobianError):
        PROJ.inverse()


matrices = arrays(np.float64, (3, 3), elements=st.floats(-5, 5, allow_nan=False))
vectors = arrays(np.float64, 3, elements=st.floats(-5, 5, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(matrices, vectors, vectors)
def test_adjoint_property(m, x, y):
    t = Extensor.from_matrix(m)
    X, Y = Multivector.vector(x), Multivector.vector(y)
    lhs = scalar_product(t.adjoint()(X), Y)
    rhs = scalar_product(t(Y), X)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + np.abs(m).sum() * np.abs(x).sum() * np.abs(y).sum()))
    assert t.adjoint().adjoint() == t


# -- extensor fields ------------------------------------------------------------------------

def test_field_entries_must_be_scalars():
    with pytest.raises(GradeError):
        ExtensorField.from_matrix([[E.Basis(1), E.ZERO], [E.ZERO, E.ONE]])


def test_constant_field_has_zero_derivative():
    t = ExtensorField.constant(PROJ, domain=BOX)
    d = dod_extensor([1.0, 0.5], t)
    assert d.entries == {}
    assert np.all(d.tables(pts()) == 0.0)


def test_dod_of_x1_times_identity_is_identity():
    t = ExtensorField.identity(2, domain=BOX).scale(F("x1"))
    d = dod_extensor([1.0, 0.0], t)
    for tab in d.tables(pts()):
        assert np.array_equal(tab, np.eye(2))


def test_definitional_consistency_example():
    # entry x1*x2 at (b1 -> b2), tested on X1 = x2 b1
    t = T([[0, 0], ["x1*x2", 0]])
    X1 = F("x2*b1")
    for a in ([1.0, 0.0], [0.0, 1.0], F("x2*b1 - x1*b2")):
        d = dod_extensor(a, t)
        p = pts(seed=3)
        lhs = induced_operator(d, X1).evaluate_many(p)
        rhs = dod_extensor_definitional(a, t, [X1], p)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_induced_operator_examples():
    ident = ExtensorField.identity(2, domain=BOX)
    X = MultivectorField.position(2, domain=BOX)
    p = pts()
    assert np.array_equal(induced_operator(ident, X).evaluate_many(p), X.evaluate_many(p))
    proj = ExtensorField.constant(PROJ, domain=BOX)
    assert np.array_equal(induced_operator(proj, F("x1*b1")).evaluate_many(p), F("x1*b2").evaluate_many(p))
    zero = ExtensorField.from_matrix([[0, 0], [0, 0]], domain=BOX)
    assert np.all(induced_operator(zero, X).evaluate_many(p) == 0.0)


def test_induced_operator_rejects_wrong_grades():
    with pytest.raises(SignatureError):
        induced_operator(ExtensorField.identity(2, domain=BOX), F("x1*(b1^b2)"))


def test_adjoint_field_is_an_involution():
    t = T([["sin(x1)", "x2"], ["x1*x2", "exp(x2)"]])
    assert t.adjoint().adjoint().structurally_equal(t)
    assert np.array_equal(t.adjoint().tables(pts()), np.transpose(t.tables(pts()), (0, 2, 1)))


def test_derivative_commutes_with_adjoint():
    t = T([["sin(x1)", "x2"], ["x1*x2", "exp(x2)"]])
    a = F("x2*b1 + b2")
    lhs = dod_extensor(a, t.adjoint()).tables(pts())
    rhs = dod_extensor(a, t).adjoint().tables(pts())
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_derivative_of_composition_is_leibniz():
    t = T([["sin(x1)", "x2"], ["x1*x2", "exp(x2)"]])
    s = T([["x2", "1"], ["cos(x1*x2)", "x1"]])
    a = [0.4, -1.1]
    lhs = dod_extensor(a, t.compose(s)).tables(pts())
    rhs = (dod_extensor(a, t).compose(s) + t.compose(dod_extensor(a, s))).tables(pts())
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_commutator_of_derivatives_is_the_bracket():
    t = T([["sin(x1)*x2", "x2*x2"], ["x1*x2*x2", "exp(x1 - x2)"]])
    a, c = F("x2*b1 + b2"), F("sin(x1)*b2 - x1*b1")
    comm = dod_extensor(a, dod_extensor(c, t)) - dod_extensor(c, dod_extensor(a, t))
    rhs = dod_extensor(lie_bracket(a, c), t)
    assert np.max(np.abs(comm.tables(pts()) - rhs.tables(pts()))) <= 1e-9


def test_compose_inverse_at_point():
    t = T([["2 + x1", "x2"], ["0", "1"]])
    inv = t.inverse_at((0.5, 0.3))
    assert t.at((0.5, 0.3)).compose(inv).is_close(Extensor.identity(2), atol=1e-14)
    assert np.all(t.condition_numbers(pts()) < 10)


def test_field_arithmetic_and_render():
    t = T([["x1", "0"], ["0", "1"]])
    assert np.all((t - t).tables(pts()) == 0.0)
    assert t.render_matrix() == [["x1", "0"], ["0", "1"]]
    assert t.apply(b(1), point=(0.5, 0.0)) == 0.5 * b(1)
    assert dod([1, 0], F("x1*b1")).evaluate((0, 0)) == b(1)
