import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mvfields.algebra import (
    Multivector,
    basis_vector,
    blade_name,
    format_multivector,
    geometric_product,
    grade_involution,
    grade_project,
    left_contraction,
    product,
    reciprocal_basis,
    reorder_sign,
    reverse,
    right_contraction,
    scalar_product,
    wedge,
)
from mvfields.errors import DimensionError, GradeError


def b(n, *idx, coef=1.0):
    return Multivector.blade(n, list(idx), coef)


def mv_strategy(n):
    coeffs = arrays(np.float64, 1 << n, elements=st.floats(-10, 10, allow_nan=False))
    return coeffs.map(lambda c: Multivector(n, c))


def vec_strategy(n):
    coeffs = arrays(np.float64, n, elements=st.floats(-10, 10, allow_nan=False))
    return coeffs.map(Multivector.vector)


def close(x, y, tol=1e-9):
    return np.allclose(x.coefficients, y.coefficients, atol=tol, rtol=0)


# -- worked examples ------------------------------------------------------------

def test_wedge_examples():
    assert wedge(b(2, 1), b(2, 2)) == b(2, 1, 2)
    assert wedge(b(2, 1), b(2, 1)) == Multivector.scalar(2, 0.0)
    two_b1_plus_b2 = 2 * b(2, 1) + b(2, 2)
    assert wedge(two_b1_plus_b2, b(2, 2)) == b(2, 1, 2, coef=2.0)


def test_wedge_reorder_sign():
    assert wedge(b(3, 2), b(3, 1)) == b(3, 1, 2, coef=-1.0)
    assert wedge(b(3, 3), b(3, 1, 2)) == b(3, 1, 2, 3)
    assert reorder_sign(0b10, 0b01) == -1


def test_scalar_product_examples():
    for mu in range(1, 4):
        for nu in range(1, 4):
            assert scalar_product(b(3, mu), b(3, nu)) == (1.0 if mu == nu else 0.0)
    assert scalar_product(b(2, 1, 2), b(2, 1, 2)) == 1.0
    assert scalar_product(b(2, 1), b(2, 1, 2)) == 0.0


def test_left_contraction_examples():
    assert left_contraction(b(2, 1), b(2, 1, 2)) == b(2, 2)
    x = Multivector(2, [1.0, 2.0, 3.0, 4.0])
    assert left_contraction(Multivector.scalar(2, 2.5), x) == 2.5 * x
    assert left_contraction(b(2, 2), b(2, 1)) == Multivector.scalar(2, 0.0)


def test_vector_into_bivector_expansion():
    # a _| (b ^ c) = (a.b) c - (a.c) b
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, bb, c = (Multivector.vector(rng.standard_normal(3)) for _ in range(3))
        lhs = left_contraction(a, wedge(bb, c))
        rhs = scalar_product(a, bb) * c - scalar_product(a, c) * bb
        assert close(lhs, rhs, 1e-12)


def test_right_contraction_examples():
    assert right_contraction(b(2, 1, 2), b(2, 2)) == b(2, 1)
    x = Multivector(2, [1.0, 2.0, 3.0, 4.0])
    assert right_contraction(x, Multivector.scalar(2, -2.0)) == -2.0 * x
    assert right_contraction(b(2, 1), b(2, 1, 2)) == Multivector.scalar(2, 0.0)


def test_geometric_product_examples():
    assert geometric_product(b(2, 1), b(2, 1)) == Multivector.scalar(2, 1.0)
    assert geometric_product(b(2, 1), b(2, 2)) == b(2, 1, 2)
    assert geometric_product(b(2, 1, 2), b(2, 1, 2)) == Multivector.scalar(2, -1.0)


def test_grade_project_examples():
    x = Multivector.scalar(3, 1.0) + b(3, 1) + b(3, 1, 2)
    assert grade_project(x, 1) == b(3, 1)
    assert grade_project(b(3, 1, 2), 0) == Multivector.scalar(3, 0.0)
    with pytest.raises(GradeError):
        grade_project(x, 4)
    with pytest.raises(GradeError):
        grade_project(x, -1)


def test_reverse_examples():
    assert reverse(b(3, 1)) == b(3, 1)
    assert reverse(b(3, 1, 2)) == -b(3, 1, 2)
    assert reverse(b(3, 1, 2, 3)) == -b(3, 1, 2, 3)


def test_reciprocal_basis():
    assert reciprocal_basis(3, 1) == b(3, 1)
    gram = np.array([[scalar_product(reciprocal_basis(3, mu), basis_vector(3, nu))
                      for nu in range(1, 4)] for mu in range(1, 4)])
    assert np.array_equal(gram, np.eye(3))
    assert np.linalg.matrix_rank(gram) == 3
    with pytest.raises(GradeError):
        reciprocal_basis(3, 4)


def test_grade_involution_signs():
    assert grade_involution(b(3, 1)) == -b(3, 1)
    assert grade_involution(b(3, 1, 2)) == b(3, 1, 2)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        wedge(b(2, 1), b(3, 1))
    with pytest.raises(DimensionError):
        scalar_product(b(2, 1), b(3, 1))


def test_bad_dimension_rejected():
    with pytest.raises(DimensionError):
        Multivector(9, np.zeros(512))
    with pytest.raises(DimensionError):
        Multivector(2, np.zeros(3))


def test_product_dispatch():
    x, y = b(3, 1), b(3, 1, 2)
    assert product("left", x, y) == left_contraction(x, y)
    assert product("scalar", x, x) == Multivector.scalar(3, 1.0)
    with pytest.raises(ValueError):
        product("cross", x, y)


def test_text_form():
    x = Multivector.scalar(3, 1.0) + b(3, 1, 2, coef=2.0) - b(3, 3, coef=3.0)
    assert format_multivector(x) == "1 - 3*b3 + 2*b1^b2"
    assert format_multivector(Multivector.scalar(2, 0.0)) == "0"
    assert blade_name(0b101) == "b1^b3"


def test_text_form_round_trips_through_parser():
    from mvfields.expr import evaluate
    from mvfields.parser import parse_expression

    rng = np.random.default_rng(5)
    for _ in range(20):
        x = Multivector(3, np.round(rng.standard_normal(8), 3))
        back = evaluate(parse_expression(format_multivector(x), 3), (0.0, 0.0, 0.0), 3)
        assert back == x


def test_multivectors_are_immutable():
    x = b(2, 1)
    with pytest.raises(ValueError):
        x.coefficients[0] = 5.0
    with pytest.raises(AttributeError):
        x.n = 3


# -- properties ---------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(mv_strategy(n), mv_strategy(n), mv_strategy(n))))
def test_associativity(xyz):
    x, y, z = xyz
    scale = 1 + np.abs(x.coefficients).sum() * np.abs(y.coefficients).sum() * np.abs(z.coefficients).sum()
    assert close(geometric_product(geometric_product(x, y), z), geometric_product(x, geometric_product(y, z)), 1e-12 * scale)
    assert close(wedge(wedge(x, y), z), wedge(x, wedge(y, z)), 1e-12 * scale)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(vec_strategy(n), vec_strategy(n))))
def test_vector_wedge_anticommutes(ab):
    a, c = ab
    assert close(wedge(a, c), -wedge(c, a), 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(vec_strategy(n), mv_strategy(n))))
def test_fundamental_decomposition(ax):
    a, x = ax
    scale = 1 + np.abs(a.coefficients).sum() * np.abs(x.coefficients).sum()
    assert close(geometric_product(a, x), left_contraction(a, x) + wedge(a, x), 1e-12 * scale)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(vec_strategy(n), mv_strategy(n), mv_strategy(n))))
def test_contraction_is_a_graded_derivation(axy):
    a, x, y = axy
    lhs = left_contraction(a, wedge(x, y))
    rhs = wedge(left_contraction(a, x), y) + wedge(grade_involution(x), left_contraction(a, y))
    scale = 1 + np.abs(a.coefficients).sum() * np.abs(x.coefficients).sum() * np.abs(y.coefficients).sum()
    assert close(lhs, rhs, 1e-12 * scale)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(mv_strategy(n), mv_strategy(n))))
def test_reverse_laws(xy):
    x, y = xy
    assert reverse(reverse(x)) == x
    scale = 1 + np.abs(x.coefficients).sum() * np.abs(y.coefficients).sum()
    assert close(reverse(geometric_product(x, y)), geometric_product(reverse(y), reverse(x)), 1e-12 * scale)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: mv_strategy(n)))
def test_grade_partition_and_idempotence(x):
    total = Multivector.scalar(x.n, 0.0)
    for k in range(x.n + 1):
        p = grade_project(x, k)
        assert grade_project(p, k) == p
        total = total + p
    assert total == x


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(*(vec_strategy(n) for _ in range(4)))))
def test_scalar_product_determinant_law(vs):
    a1, a2, b1, b2 = vs
    gram = np.array([[scalar_product(a, c) for c in (b1, b2)] for a in (a1, a2)])
    with np.errstate(all="ignore"):  # LAPACK warns on exactly singular Gram matrices
        det = np.linalg.det(gram)
    scale = 1 + np.prod([np.abs(v.coefficients).sum() for v in vs])
    assert abs(scalar_product(wedge(a1, a2), wedge(b1, b2)) - det) <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(mv_strategy(n), mv_strategy(n))))
def test_scalar_product_is_symmetric_and_reverse_based(xy):
    x, y = xy
    assert scalar_product(x, y) == pytest.approx(scalar_product(y, x), abs=1e-9)
    via_reverse = grade_project(geometric_product(reverse(x), y), 0).coefficients[0]
    assert scalar_product(x, y) == pytest.approx(via_reverse, abs=1e-9)


def test_duality_forms_that_hold():
    # (A^B).C = B.(A _| C) = A.(C |_ B) with grade(C) = grade(A) + grade(B)
    rng = np.random.default_rng(11)
    for n in (2, 3, 4):
        for _ in range(50):
            r = int(rng.integers(0, n + 1))
            s = int(rng.integers(0, n - r + 1))
            A = grade_project(Multivector(n, rng.standard_normal(1 << n)), r)
            B = grade_project(Multivector(n, rng.standard_normal(1 << n)), s)
            C = grade_project(Multivector(n, rng.standard_normal(1 << n)), r + s)
            lhs = scalar_product(wedge(A, B), C)
            assert lhs == pytest.approx(scalar_product(B, left_contraction(A, C)), abs=1e-10)
            assert lhs == pytest.approx(scalar_product(A, right_contraction(C, B)), abs=1e-10)


def test_duality_with_contraction_on_the_other_factor_fails():
    # A = b1, B = b2, C = b1^b2: (A^B).C = 1 while A.(B _| C) = -1
    A, B, C = b(2, 1), b(2, 2), b(2, 1, 2)
    assert scalar_product(wedge(A, B), C) == 1.0
    assert scalar_product(A, left_contraction(B, C)) == -1.0
