import math

import numpy as np
import pytest

from mvfields import expr as E
from mvfields.algebra import Multivector, format_multivector
from mvfields.errors import DomainError, EvaluationError
from mvfields.parser import parse_expression


def P(text, n=2):
    return parse_expression(text, n)


def ev(text, point, n=2):
    return E.evaluate(P(text, n), point, n)


def test_evaluate_examples():
    assert format_multivector(ev("x1*b1 + x2*b2", (3, 4))) == "3*b1 + 4*b2"
    assert ev("b1^b1", (0.3, 0.7)) == Multivector.scalar(2, 0.0)
    assert ev("(x1*b1) . (x1*b1)", (2, 0)) == Multivector.scalar(2, 4.0)


def test_evaluate_functions():
    v = ev("exp(x1) + ln(x2) + sqrt(x2) + pow(x1, 3) + atan2(x2, x1)", (0.5, 4.0))
    want = math.exp(0.5) + math.log(4) + 2 + 0.125 + math.atan2(4.0, 0.5)
    assert v.coefficients[0] == pytest.approx(want, abs=1e-14)


def test_division_by_scalar():
    assert ev("(x1*b1 + b2) / 2", (4, 0)) == Multivector.vector([2.0, 0.5])
    with pytest.raises(EvaluationError):
        ev("x1 / b1", (1, 1))
    with pytest.raises(DomainError):
        ev("1 / x1", (0, 1))


@pytest.mark.parametrize("text, point", [
    ("ln(x1)", (0.0, 1.0)),
    ("ln(x1)", (-1.0, 1.0)),
    ("sqrt(x1)", (-0.5, 1.0)),
    ("atan2(x1, x2)", (0.0, 0.0)),
    ("pow(x1, 0.5)", (-1.0, 0.0)),
])
def test_domain_errors(text, point):
    with pytest.raises(DomainError):
        ev(text, point)


def test_vectorized_evaluation_matches_pointwise():
    e = P("sin(x1)*(b1^b2) + x2*b1 - cos(x1*x2)")
    pts = np.random.default_rng(0).uniform(-1, 1, (25, 2))
    arr = E.evaluate_array(e, pts, 2)
    for row, p in zip(arr, pts):
        assert np.array_equal(row, E.evaluate(e, p, 2).coefficients)


# -- symbolic derivatives -------------------------------------------------------------

def test_differentiate_examples():
    d = E.differentiate(P("x1*x1"), 1)
    assert E.evaluate(d, (1.5, 0), 2) == Multivector.scalar(2, 3.0)
    d = E.differentiate(P("sin(x1)*(b1^b2)"), 1)
    assert E.evaluate(d, (0.3, 0), 2).coefficients[3] == pytest.approx(math.cos(0.3), abs=1e-15)
    d = E.differentiate(P("x1*x2*(b1^b2)"), 1)
    assert E.evaluate(d, (1, 5), 2) == Multivector.blade(2, [1, 2], 5.0)
    fd = E.fd_partial(P("x1*x2*(b1^b2)"), 1, (1, 5), 2)
    assert abs(fd.coefficients[3] - 5.0) <= 1e-8


def test_basis_and_constants_differentiate_to_zero():
    assert E.differentiate(P("3*b1 + b2^b1"), 1) == E.ZERO
    assert E.differentiate(P("x2"), 1) == E.ZERO


def test_fd_examples():
    assert E.fd_partial(P("x1*b1"), 1, (0, 0), 2, 1e-5).is_close(Multivector.blade(2, [1]), atol=1e-9)
    assert E.fd_partial(P("2*b1 + 7"), 2, (0.1, 0.2), 2).max_abs() == 0.0
    fd = E.fd_partial(P("sin(x1)"), 1, (0.5, 0), 2, 1e-5)
    assert fd.coefficients[0] == pytest.approx(math.cos(0.5), abs=1e-9)


CHAIN_CASES = ["sin(x1*x2)", "cos(x1)*x2", "exp(x1 - x2)", "ln(2 + x1*x1)", "sqrt(3 + x2)",
               "pow(x1, 3)", "pow(2 + x1, x2)", "atan2(x2, 2 + x1)", "x1 / (2 + x2*x2)",
               "-(x1*x2)*b1 + x2*(b1^b2)"]


@pytest.mark.parametrize("text", CHAIN_CASES)
def test_symbolic_matches_fd(text):
    e = P(text)
    pts = np.random.default_rng(3).uniform(-0.9, 0.9, (50, 2))
    for mu in (1, 2):
        sym = E.evaluate_array(E.differentiate(e, mu), pts, 2)
        fd = E.fd_partial_array(e, mu, pts, 2)
        assert np.max(np.abs(sym - fd)) <= 1e-6


@pytest.mark.parametrize("text", CHAIN_CASES)
def test_mixed_partials_commute(text):
    e = P(text)
    pts = np.random.default_rng(4).uniform(-0.9, 0.9, (30, 2))
    d12 = E.evaluate_array(E.differentiate(E.differentiate(e, 1), 2), pts, 2)
    d21 = E.evaluate_array(E.differentiate(E.differentiate(e, 2), 1), pts, 2)
    assert np.max(np.abs(d12 - d21)) <= 1e-9


@pytest.mark.parametrize("op", ["^", "*", "_|", "|_", "."])
def test_leibniz_per_product(op):
    X = P("x1*x2*b1 + sin(x3)*(b2^b3) + x3", 3)
    Y = P("cos(x1)*b2 + x2*x3*(b1^b2) + exp(x1)*(b1^b2^b3)", 3)
    pts = np.random.default_rng(7).uniform(-1, 1, (40, 3))
    for mu in (1, 2, 3):
        lhs = E.differentiate(E.BinOp(op, X, Y), mu)
        rhs = E.add(E.binop(op, E.differentiate(X, mu), Y), E.binop(op, X, E.differentiate(Y, mu)))
        diff = E.evaluate_array(lhs, pts, 3) - E.evaluate_array(rhs, pts, 3)
        assert np.max(np.abs(diff)) <= 1e-12


# -- smart constructors, grades, rendering ---------------------------------------------------

def test_constant_folding():
    assert E.add(E.num(2), E.num(3)) == E.num(5)
    assert E.mul(E.ZERO, E.Coord(1)) == E.ZERO
    assert E.mul(E.ONE, E.Basis(1)) == E.Basis(1)
    assert E.binop("^", E.Basis(2), E.Basis(2)) == E.ZERO
    assert E.binop("_|", E.Basis(2), E.Basis(2)) == E.ONE
    # the scalar product with 1 is not an identity for non-scalars
    assert E.binop(".", E.ONE, E.Basis(1)) != E.Basis(1)


def test_possible_grades():
    assert E.possible_grades(P("x1*b1 + x2*b2"), 2) == {1}
    assert E.possible_grades(P("b1^b2"), 2) == {2}
    assert E.possible_grades(P("b1 _| (b1^b2)"), 2) == {1}
    assert E.possible_grades(P("(b1^b2) . (b1^b2)"), 2) == {0}
    assert E.possible_grades(P("sin(x1) + b1"), 2) == {0, 1}


def test_substitute():
    e = P("x1*b1 + x2")
    s = E.substitute(e, {1: P("2*x2"), 2: E.num(1.0)})
    assert E.evaluate(s, (9.0, 0.5), 2) == Multivector(2, [1.0, 1.0, 0, 0])


def test_render_and_sexpr():
    e = P("x1 - (x2 - b1)")
    assert E.render(e) == "x1 - (x2 - b1)"
    assert E.sexpr(P("-x1")) == "(neg x1)"
    assert E.sexpr(P("x1*b1 + x2*b2")) == "(+ (* x1 b1) (* x2 b2))"
    assert parse_expression(E.render(E.num(-2.5)), 1) == E.Neg(E.num(2.5))
