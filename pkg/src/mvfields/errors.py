"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MvfError(Exception):
    """Base class for all errors raised by :mod:`mvfields`."""


class DimensionError(MvfError, ValueError):
    """Operands live over canonical spaces of different dimension."""


class GradeError(MvfError, ValueError):
    """A grade or basis index is outside ``0..n`` (or ``1..n``)."""


class DomainError(MvfError, ValueError):
    """A point lies outside a declared domain, or a scalar function is undefined there."""


class EvaluationError(MvfError, ValueError):
    """An expression cannot be evaluated, e.g. a scalar function got a non-scalar operand."""


class SignatureError(MvfError, ValueError):
    """An extensor slot received a multivector outside its declared grades."""


class FrameError(MvfError, ValueError):
    """A frame/coframe pair is not reciprocal at some sampled point."""

    def __init__(self, message: str, residual: float, point):
        super().__init__(message)
        self.residual = residual
        self.point = point


class SingularJacobianError(MvfError, ValueError):
    """The Jacobian matrix is (numerically) singular at a queried point."""

    def __init__(self, message: str, condition: float, point):
        super().__init__(message)
        self.condition = condition
        self.point = point
