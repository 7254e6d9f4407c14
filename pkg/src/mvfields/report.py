"""Machine-readable results of identity checks."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CheckReport:
    identity: str
    anchor: str
    points: int
    seed: int | None
    max_residual: float
    worst_point: tuple[float, ...] | None
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "anchor": self.anchor,
            "points": self.points,
            "seed": self.seed,
            # strict JSON has no infinity; a non-finite residual is written as null
            "max_residual": self.max_residual if np.isfinite(self.max_residual) else None,
            "worst_point": None if self.worst_point is None else list(self.worst_point),
            "tol": self.tol,
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.identity}: max residual {self.max_residual:.3e} (tol {self.tol:.0e}, {self.points} points)"


def residuals(lhs: np.ndarray, rhs: np.ndarray, scale: np.ndarray | None = None) -> np.ndarray:
    """Per-row max-abs difference, optionally divided by a per-row scale."""
    lhs = np.atleast_2d(lhs)
    rhs = np.atleast_2d(rhs)
    diff = np.max(np.abs(lhs - rhs), axis=1)
    if scale is not None:
        diff = diff / np.maximum(scale, np.finfo(float).tiny)
    return np.where(np.isnan(diff), np.inf, diff)


def make_report(identity: str, anchor: str, res: np.ndarray, points: np.ndarray | None,
                tol: float, seed: int | None) -> CheckReport:
    res = np.asarray(res, dtype=float)
    if res.size == 0:
        return CheckReport(identity, anchor, 0, seed, 0.0, None, tol, True)
    worst = int(np.argmax(res))
    worst_point = None
    if points is not None:
        worst_point = tuple(float(v) for v in np.atleast_2d(points)[worst])
    max_res = float(res[worst])
    return CheckReport(identity, anchor, int(res.size), seed, max_res, worst_point, tol,
                       bool(max_res <= tol))


def compare(identity: str, anchor: str, lhs: np.ndarray, rhs: np.ndarray,
            points: np.ndarray | None, tol: float, seed: int | None,
            scale: np.ndarray | None = None) -> CheckReport:
    return make_report(identity, anchor, residuals(lhs, rhs, scale), points, tol, seed)
