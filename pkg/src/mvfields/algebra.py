"""Euclidean Clifford algebra over the canonical space of a chart.

Multivectors are dense: a coefficient per basis blade, blades indexed by a
bit mask (bit ``mu - 1`` set means ``b_mu`` is a factor, mask 0 is the unit
scalar).  The fiducial basis is orthonormal, so the reciprocal basis
coincides with it.

Product conventions (all verified by the test suite):

* ``scalar_product(X, Y) = <reverse(X) Y>_0``; on same-grade blades this is
  the determinant of pairwise vector dot products.
* ``left_contraction(A, B) = <reverse(A) B>_{s-r}`` for grades ``r <= s``,
  zero otherwise.  For a vector this gives ``a _| (b^c) = (a.b)c - (a.c)b``.
* ``right_contraction(A, B) = <A reverse(B)>_{r-s}`` for ``r >= s``, which
  is ``reverse(reverse(B) _| reverse(A))``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import DimensionError, GradeError

MAX_DIM = 8

PRODUCTS = ("wedge", "geometric", "left", "right", "scalar")


def _popcount(x: int) -> int:
    return bin(x).count("1")


def reorder_sign(a: int, b: int) -> int:
    """Sign picked up when the factors of blade ``a`` followed by blade ``b``
    are sorted into increasing order (squared factors contract to +1)."""
    swaps = 0
    a >>= 1
    while a:
        swaps += _popcount(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


def _check_dim(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_DIM:
        raise DimensionError(f"dimension must be an integer in 1..{MAX_DIM}, got {n!r}")


@lru_cache(maxsize=None)
def grades_of(n: int) -> np.ndarray:
    """Grade of every blade mask for dimension ``n``."""
    g = np.array([_popcount(m) for m in range(1 << n)], dtype=np.int64)
    g.flags.writeable = False
    return g


@lru_cache(maxsize=None)
def reverse_signs(n: int) -> np.ndarray:
    g = grades_of(n)
    s = np.where((g * (g - 1) // 2) % 2 == 0, 1.0, -1.0)
    s.flags.writeable = False
    return s


@lru_cache(maxsize=None)
def involution_signs(n: int) -> np.ndarray:
    s = np.where(grades_of(n) % 2 == 0, 1.0, -1.0)
    s.flags.writeable = False
    return s


@lru_cache(maxsize=None)
def sign_table(n: int, kind: str) -> np.ndarray:
    """``table[a, b]`` is the coefficient of blade ``a ^ b`` (xor) in the
    ``kind`` product of blades ``a`` and ``b``; zero when the product vanishes.

    Every product of two blades lands on the symmetric difference of the
    masks, so one sign table per product describes it completely.
    """
    _check_dim(n)
    if kind not in PRODUCTS:
        raise ValueError(f"unknown product {kind!r}")
    size = 1 << n
    rev = reverse_signs(n)
    table = np.zeros((size, size))
    for a in range(size):
        for b in range(size):
            s = reorder_sign(a, b)
            if kind == "geometric":
                table[a, b] = s
            elif kind == "wedge":
                if a & b == 0:
                    table[a, b] = s
            elif kind == "left":
                if a & b == a:
                    table[a, b] = rev[a] * s
            elif kind == "right":
                if a & b == b:
                    table[a, b] = s * rev[b]
            elif a == b:
                table[a, b] = rev[a] * s
    table.flags.writeable = False
    return table


@lru_cache(maxsize=None)
def _xor_perms(n: int) -> np.ndarray:
    size = 1 << n
    idx = np.arange(size)
    return idx[:, None] ^ idx[None, :]


def product_arrays(kind: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Apply product ``kind`` row-wise to coefficient arrays of shape ``(..., 2**n)``."""
    size = a.shape[-1]
    if b.shape[-1] != size:
        raise DimensionError(f"dimension mismatch: {size} vs {b.shape[-1]} coefficients")
    n = size.bit_length() - 1
    table = sign_table(n, kind)
    perms = _xor_perms(n)
    a, b = np.broadcast_arrays(a, b)
    out = np.zeros(a.shape, dtype=np.result_type(a, b, float))
    active = np.flatnonzero(np.any(a != 0, axis=tuple(range(a.ndim - 1))))
    for i in active:
        row = table[i]
        if not row.any():
            continue
        out[..., perms[i]] += a[..., i, None] * (row * b)
    return out


class Multivector:
    """An immutable element of the exterior algebra over ``n`` directions."""

    __slots__ = ("_c", "n")

    def __init__(self, n: int, coefficients: Iterable[float] | np.ndarray | None = None):
        _check_dim(n)
        size = 1 << n
        if coefficients is None:
            c = np.zeros(size)
        else:
            c = np.array(coefficients, dtype=float)
            if c.shape != (size,):
                raise DimensionError(
                    f"expected {size} coefficients for n={n}, got shape {c.shape}"
                )
        c.flags.writeable = False
        object.__setattr__(self, "_c", c)
        object.__setattr__(self, "n", int(n))

    def __setattr__(self, name, value):
        raise AttributeError(f"Multivector is immutable; cannot set {name!r}")

    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    # -- construction helpers -------------------------------------------------
    @classmethod
    def scalar(cls, n: int, value: float = 1.0) -> Multivector:
        c = np.zeros(1 << n)
        c[0] = value
        return cls(n, c)

    @classmethod
    def blade(cls, n: int, indices: Iterable[int], coefficient: float = 1.0) -> Multivector:
        """The blade ``coefficient * b_i1 ^ b_i2 ^ ...`` (1-based indices, any order)."""
        mask, sign = 0, 1
        for i in indices:
            if not 1 <= i <= n:
                raise GradeError(f"basis index {i} outside 1..{n}")
            bit = 1 << (i - 1)
            if mask & bit:
                return cls(n)
            sign *= reorder_sign(mask, bit)
            mask |= bit
        c = np.zeros(1 << n)
        c[mask] = sign * coefficient
        return cls(n, c)

    @classmethod
    def vector(cls, components: Iterable[float]) -> Multivector:
        comps = [float(v) for v in components]
        n = len(comps)
        _check_dim(n)
        c = np.zeros(1 << n)
        for mu, v in enumerate(comps):
            c[1 << mu] = v
        return cls(n, c)

    # -- queries --------------------------------------------------------------
    def grade_parts(self) -> set[int]:
        """Grades carrying a nonzero coefficient."""
        return {int(g) for g in np.unique(grades_of(self.n)[self._c != 0])}

    def vector_components(self) -> np.ndarray:
        return np.array([self._c[1 << mu] for mu in range(self.n)])

    def is_close(self, other: Multivector, atol: float = 0.0, rtol: float = 0.0) -> bool:
        _same_dim(self, other)
        return bool(np.allclose(self._c, other._c, atol=atol, rtol=rtol))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._c)))

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Multivector.scalar(self.n, other)
        if not isinstance(other, Multivector):
            return NotImplemented
        _same_dim(self, other)
        return Multivector(self.n, self._c + other._c)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Multivector.scalar(self.n, other)
        if not isinstance(other, Multivector):
            return NotImplemented
        _same_dim(self, other)
        return Multivector(self.n, self._c - other._c)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector(self.n, -self._c)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Multivector(self.n, self._c * float(other))
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Multivector(self.n, self._c * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Multivector(self.n, self._c / float(other))
        return NotImplemented

    def __xor__(self, other):
        if isinstance(other, Multivector):
            return wedge(self, other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash((self.n, self._c.tobytes()))

    def __repr__(self):
        return f"Multivector({self.n}, '{format_multivector(self)}')"

    def __str__(self):
        return format_multivector(self)


def _same_dim(x: Multivector, y: Multivector) -> None:
    if x.n != y.n:
        raise DimensionError(f"dimension mismatch: n={x.n} vs n={y.n}")


def _binary(kind: str, x: Multivector, y: Multivector) -> Multivector:
    _same_dim(x, y)
    return Multivector(x.n, product_arrays(kind, x.coefficients, y.coefficients))


def wedge(x: Multivector, y: Multivector) -> Multivector:
    return _binary("wedge", x, y)


def geometric_product(x: Multivector, y: Multivector) -> Multivector:
    return _binary("geometric", x, y)


def left_contraction(x: Multivector, y: Multivector) -> Multivector:
    return _binary("left", x, y)


def right_contraction(x: Multivector, y: Multivector) -> Multivector:
    return _binary("right", x, y)


def scalar_product(x: Multivector, y: Multivector) -> float:
    _same_dim(x, y)
    # Blades are orthonormal under the b-scalar product.
    return float(np.dot(x.coefficients, y.coefficients))


def product(kind: str, x: Multivector, y: Multivector) -> Multivector:
    """Dispatch by name; ``scalar`` returns a grade-0 multivector."""
    if kind == "scalar":
        return Multivector.scalar(x.n, scalar_product(x, y))
    return _binary(kind, x, y)


def grade_project(x: Multivector, k: int) -> Multivector:
    if not 0 <= k <= x.n:
        raise GradeError(f"grade {k} outside 0..{x.n}")
    return Multivector(x.n, np.where(grades_of(x.n) == k, x.coefficients, 0.0))


def reverse(x: Multivector) -> Multivector:
    return Multivector(x.n, x.coefficients * reverse_signs(x.n))


def grade_involution(x: Multivector) -> Multivector:
    return Multivector(x.n, x.coefficients * involution_signs(x.n))


def basis_vector(n: int, mu: int) -> Multivector:
    if not 1 <= mu <= n:
        raise GradeError(f"basis index {mu} outside 1..{n}")
    return Multivector.blade(n, [mu])


def reciprocal_basis(n: int, mu: int) -> Multivector:
    """``b^mu``; for the orthonormal fiducial basis this is ``b_mu`` itself."""
    return basis_vector(n, mu)


def blade_name(mask: int) -> str:
    """``b1^b3`` style name of a blade mask; ``1`` for the scalar blade."""
    if mask == 0:
        return "1"
    parts, mu = [], 1
    while mask:
        if mask & 1:
            parts.append(f"b{mu}")
        mask >>= 1
        mu += 1
    return "^".join(parts)


def format_number(v: float) -> str:
    """Shortest round-tripping decimal, with ``.0`` dropped from integers."""
    text = repr(float(v) + 0.0)
    return text[:-2] if text.endswith(".0") else text


def format_multivector(x: Multivector) -> str:
    """Text form ``1 + 2*b1^b2 - 3*b3``; blades in increasing mask order."""
    terms = []
    for mask in sorted(range(1 << x.n), key=lambda m: (_popcount(m), m)):
        c = float(x.coefficients[mask])
        if c == 0:
            continue
        body = format_number(abs(c)) if mask == 0 else f"{format_number(abs(c))}*{blade_name(mask)}"
        if not terms:
            terms.append(("-" if c < 0 else "") + body)
        else:
            terms.append(("- " if c < 0 else "+ ") + body)
    return " ".join(terms) if terms else "0"
