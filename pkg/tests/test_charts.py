import math

import numpy as np
import pytest

from mvfields.algebra import Multivector
from mvfields.calculus import dod
from mvfields.charts import (
    CanonicalChart,
    Chart,
    check_chain_rule,
    check_chain_rule_corollary,
    dod_chart,
    reciprocity_residuals,
)
from mvfields.errors import DimensionError, DomainError, SingularJacobianError
from mvfields.extensor import Extensor
from mvfields.fields import MultivectorField
from mvfields.parser import parse_expression

CANON = ((-2.0, 2.0), (-2.0, 2.0))
POLAR_BOX = ((0.5, 2.0), (-3.0, 3.0))


def polar(domain=POLAR_BOX) -> Chart:
    P = lambda s: parse_expression(s, 2)
    return Chart("polar", 2,
                 [P("sqrt(x1*x1 + x2*x2)"), P("atan2(x2, x1)")],
                 [P("x1*cos(x2)"), P("x1*sin(x2)")],
                 domain, CANON)


def canon(text: str) -> MultivectorField:
    return MultivectorField.parse(text, 2, domain=CANON)


def chart_points(chart, count=50, seed=0):
    return chart.sample(count, np.random.default_rng(seed))


def test_varphi_example():
    x = polar().varphi(Multivector.vector([1.0, 1.0]))
    assert x.is_close(Multivector.vector([math.sqrt(2), math.pi / 4]), atol=1e-15)
    back = polar().varphi_inverse(x)
    assert back.is_close(Multivector.vector([1.0, 1.0]), atol=1e-15)


def test_roundtrip():
    fwd, inv = polar().roundtrip_residuals(chart_points(polar()))
    assert fwd.max() <= 1e-12 and inv.max() <= 1e-12


def test_canonical_chart_position():
    c = CanonicalChart(3, ((-5.0, 5.0),) * 3)
    assert c.position((1, 2, 3)) == Multivector.vector([1, 2, 3])
    assert c.as_chart().jacobian().at((0.1, 0.2, 0.3)) == Extensor.identity(3)


def test_identity_chart_examples():
    ident = Chart.identity(2, CANON)
    basis = [Multivector.blade(2, [mu]) for mu in (1, 2)]
    p = chart_points(ident)
    for frame in (ident.covariant_frame(), ident.contravariant_frame()):
        for f, bv in zip(frame, basis):
            assert np.all(f.evaluate_many(p) == bv.coefficients)
    assert ident.jacobian().at((0.3, -0.4)) == Extensor.identity(2)
    assert ident.jacobian_inverse().at((0.3, -0.4)) == Extensor.identity(2)
    X = canon("x1*x2*b1 + sin(x2)*(b1^b2)")
    a = Multivector.vector([0.5, -1.5])
    got = dod_chart(ident, a, ident.pull(X)).evaluate_many(p)
    assert np.array_equal(got, dod(a, X).evaluate_many(p))
    r = check_chain_rule(ident, X, a)
    assert r.passed and r.max_residual == 0.0


def test_dod_in_polar_coordinates():
    c = polar()
    X = c.field("x1*b1")
    D = dod_chart(c, [1.0, 0.0], X)
    assert D.evaluate((1.2, 0.7)) == Multivector.blade(2, [1])
    assert dod_chart(c, [0.3, 1.0], c.field("b1^b2 + 4")).evaluate((1.0, 0.0)).max_abs() == 0.0
    with pytest.raises(DimensionError):
        dod_chart(c, [1.0, 0.0], canon("x1*b1"))


def test_polar_frames_at_a_point():
    c = polar()
    p = (2.0, math.pi / 2)
    e1, e2 = (f.evaluate(p) for f in c.covariant_frame())
    assert e1.is_close(Multivector.vector([0.0, 1.0]), atol=1e-15)
    assert e2.is_close(Multivector.vector([-2.0, 0.0]), atol=1e-15)
    f1, f2 = (f.evaluate(p) for f in c.contravariant_frame())
    assert f1.is_close(Multivector.vector([0.0, 1.0]), atol=1e-15)
    assert f2.is_close(Multivector.vector([-0.5, 0.0]), atol=1e-15)


def test_reciprocity():
    assert reciprocity_residuals(polar(), chart_points(polar())).max() <= 1e-12


def test_jacobian_matches_covariant_frame():
    c = polar()
    p = chart_points(c)
    tabs = c.jacobian().tables(p)
    for mu, f in enumerate(c.covariant_frame()):
        col = f.evaluate_many(p)[:, [1, 2]]
        assert np.max(np.abs(tabs[:, :, mu] - col)) <= 1e-15


def test_jacobian_column_at_a_point():
    J = polar().jacobian().at((2.0, math.pi / 2))
    assert J(Multivector.blade(2, [1])).is_close(Multivector.vector([0.0, 1.0]), atol=1e-15)


def test_jacobian_inverse_is_an_inverse():
    c = polar()
    p = chart_points(c)
    prod = np.einsum("kij,kjl->kil", c.jacobian().tables(p), c.jacobian_inverse(p).tables(p))
    assert np.max(np.abs(prod - np.eye(2))) <= 1e-12


def test_jacobian_star_is_adjoint_of_inverse():
    c = polar()
    p = chart_points(c)
    assert np.array_equal(c.jacobian_star().tables(p), np.transpose(c.jacobian_inverse().tables(p), (0, 2, 1)))


def test_singular_locus():
    c = polar(domain=((0.0, 2.0), (-3.0, 3.0)))
    with pytest.raises(SingularJacobianError) as info:
        c.check_nonsingular([(0.0, 1.0)])
    assert info.value.point == (0.0, 1.0)
    with pytest.raises(SingularJacobianError):
        c.jacobian_inverse(check_points=[(1.0, 0.0), (0.0, 0.5)])


def test_domain_checked_on_chart_side():
    with pytest.raises(DomainError):
        polar().to_canonical([(0.1, 0.0)])
    with pytest.raises(DomainError):
        polar().to_chart([(3.0, 0.0)])


def test_pull_then_push_is_identity():
    c = polar()
    X = canon("x1*x2*b1 + x2*(b1^b2)")
    back = c.push(c.pull(X))
    xo = c.to_canonical(chart_points(c))
    assert np.max(np.abs(back.evaluate_many(xo) - X.evaluate_many(xo))) <= 1e-12


def test_chain_rule_polar_position_field():
    X = MultivectorField.position(2, domain=CANON)
    r = check_chain_rule(polar(), X, [1.0, 0.0], count=100)
    assert r.passed and r.points == 100 and r.max_residual <= 1e-8


@pytest.mark.parametrize("mu", [1, 2])
def test_chain_rule_corollary(mu):
    X = canon("x1*x2 + sin(x1)*b2 + x2*x2*(b1^b2)")
    assert check_chain_rule_corollary(polar(), X, mu, count=100).passed


def test_chain_rule_along_a_chart_vector_field():
    c = polar()
    a = c.field("x2*b1 + x1*b2")
    X = canon("exp(x1)*b1 + x1*x2*(b1^b2)")
    assert check_chain_rule(c, X, a, seed=5).passed


def test_chain_rule_needs_canonical_field():
    with pytest.raises(DimensionError):
        check_chain_rule(polar(), polar().field("x1*b1"), [1.0, 0.0])
