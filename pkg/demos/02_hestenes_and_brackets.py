"""
Brackets and Hestenes derivatives
=================================

Lie brackets of vector fields, then curl, divergence and gradient, and
how they behave under a change of reciprocal frame.
"""

# %%
import numpy as np

from mvfields import MultivectorField, curl, divergence, frame_hestenes, gradient, lie_bracket

box = ((-1.0, 1.0), (-1.0, 1.0))
a = MultivectorField.parse("x2*b1", 2, domain=box)
c = MultivectorField.parse("x1*b2", 2, domain=box)
print("[x2 b1, x1 b2] =", lie_bracket(a, c).render())

# %%
# For the position field the curl vanishes and the divergence counts dimensions.
pos = MultivectorField.position(3, domain=((-1.0, 1.0),) * 3)
p = (0.2, -0.3, 0.7)
print("curl pos =", curl(pos).evaluate(p))
print("div pos  =", divergence(pos).evaluate(p))
print("grad pos =", gradient(pos).evaluate(p))

# %%
# The gradient splits into divergence plus curl for any field.
X = MultivectorField.parse("x1*x2*b1 + cos(x2)*(b1^b2) + x1", 2, domain=box)
pts = np.random.default_rng(1).uniform(-1, 1, (200, 2))
split = (divergence(X) + curl(X)).evaluate_many(pts)
print("max |grad - (div + curl)| =", np.abs(gradient(X).evaluate_many(pts) - split).max())

# %%
# Any reciprocal frame gives the same operator; here a frame rotating with x1.
e1 = MultivectorField.parse("cos(x1)*b1 + sin(x1)*b2", 2, domain=box)
e2 = MultivectorField.parse("-sin(x1)*b1 + cos(x1)*b2", 2, domain=box)
rotated = frame_hestenes("gradient", X, [e1, e2], [e1, e2])
print("max |rotated - fiducial| =", np.abs(rotated.evaluate_many(pts) - gradient(X).evaluate_many(pts)).max())
