"""
Charts, frames and the chain rule
=================================

A polar chart on the plane: its covariant and contravariant frames, the
Jacobian field, and the chain rule relating derivatives in the two charts.
"""

# %%
import math

import numpy as np

from mvfields import Chart, Multivector, MultivectorField, check_chain_rule, parse_expression

P = lambda s: parse_expression(s, 2)
polar = Chart("polar", 2,
              forward=[P("sqrt(x1*x1 + x2*x2)"), P("atan2(x2, x1)")],
              inverse=[P("x1*cos(x2)"), P("x1*sin(x2)")],
              domain=((0.5, 2.0), (-3.0, 3.0)),
              canonical_domain=((-2.0, 2.0), (-2.0, 2.0)))
print("varphi(b1 + b2) =", polar.varphi(Multivector.vector([1.0, 1.0])))

# %%
# Frames at (r, theta) = (2, pi/2).
pt = (2.0, math.pi / 2)
for k, f in enumerate(polar.covariant_frame(), start=1):
    print(f"e{k}  = {f.render():32s} -> {f.evaluate(pt)}")
for k, f in enumerate(polar.contravariant_frame(), start=1):
    # built from derivatives of the forward map, so the expressions are long
    print(f"e^{k} = {'...':32s} -> {f.evaluate(pt)}")

# %%
# The Jacobian columns are the covariant frame vectors.
J = polar.jacobian()
print("J matrix:")
for row in J.render_matrix():
    print("   ", row)
print("J at pt:\n", J.at(pt).matrix().round(12))

# %%
# Chain rule: J(a).d_o X = a.d X for a canonical field X pulled into the chart.
X = MultivectorField.parse("x1*x2*b1 + exp(x1)*(b1^b2)", 2, domain=((-2.0, 2.0), (-2.0, 2.0)))
report = check_chain_rule(polar, X, [1.0, 0.5], count=100)
print(report.line())

# %%
# At r = 0 the chart degenerates and the Jacobian is singular.
print("condition numbers near the origin:", polar.condition_numbers(np.array([[1e-3, 0.0], [1e-6, 0.0]])))
