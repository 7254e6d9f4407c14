"""
Multivectors and fields
=======================

A tour of the exterior algebra over the canonical space and of fields
written in the expression language.
"""

# %%
# Blades are bitmasks; every product is a signed xor over the 2^n basis.
import numpy as np

from mvfields import Multivector, geometric_product, left_contraction, scalar_product, wedge

b1, b2, b3 = (Multivector.blade(3, [k]) for k in (1, 2, 3))
print("b1^b2        =", wedge(b1, b2))
print("b2^b1        =", wedge(b2, b1))
print("b1 _| b1^b2  =", left_contraction(b1, wedge(b1, b2)))
print("(b1b2)(b1b2) =", geometric_product(wedge(b1, b2), wedge(b1, b2)))

# %%
# The scalar product of two 2-blades is the Gram determinant of their factors.
rng = np.random.default_rng(0)
a1, a2, c1, c2 = (Multivector.vector(rng.standard_normal(3)) for _ in range(4))
gram = np.array([[scalar_product(x, y) for y in (c1, c2)] for x in (a1, a2)])
print("(a1^a2).(c1^c2) =", scalar_product(wedge(a1, a2), wedge(c1, c2)))
print("det gram        =", np.linalg.det(gram))

# %%
# Fields are expression trees over coordinates x1..xn and blades b1..bn.
from mvfields import MultivectorField, dod

X = MultivectorField.parse("x1*x1*(b1^b2) + sin(x2)*b3", 3, domain=((-1, 1),) * 3)
print("X          =", X.render())
print("X(0.5,1,0) =", X.evaluate((0.5, 1.0, 0.0)))

# %%
# The directional derivative is symbolic; a central difference agrees with it.
D = dod([1.0, 0.0, 0.0], X)
print("b1.dX      =", D.render())
pt = (0.5, 1.0, 0.0)
print("symbolic   =", D.evaluate(pt))
print("fd         =", X.fd_partial(1, pt))
