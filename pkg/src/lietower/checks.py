"""Residual reports and seeded sampling shared by every verifier."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CheckReport:
    """Per-sample residuals of a numerical identity check.

    ``points`` has one row per sample; ``residuals[k]`` is the sup-norm
    residual at ``points[k]``. The check passes iff the largest residual is
    at most ``tol``.
    """

    name: str
    points: np.ndarray
    residuals: np.ndarray
    tol: float
    extra: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        if len(self.residuals) == 0:
            return 0.0
        return float(np.max(self.residuals))

    @property
    def passed(self) -> bool:
        return bool(np.all(np.isfinite(self.residuals))) and self.max_residual <= self.tol

    def worst(self, k: int = 5) -> list[tuple[list[float], float]]:
        order = np.argsort(-np.nan_to_num(self.residuals, nan=np.inf), kind="stable")[:k]
        return [(self.points[i].tolist(), float(self.residuals[i])) for i in order]

    def __bool__(self):
        return self.passed

    def __str__(self):
        verdict = "pass" if self.passed else "FAIL"
        return f"{self.name}: {verdict} (max residual {self.max_residual:.3e}, tol {self.tol:g})"


def merge_reports(name: str, reports: list[CheckReport], tol: float | None = None) -> CheckReport:
    """Combine reports over the same sample points by taking the worst residual."""
    if not reports:
        raise ValueError("nothing to merge")
    points = reports[0].points
    stacked = np.vstack([r.residuals for r in reports])
    return CheckReport(name, points, stacked.max(axis=0),
                       reports[0].tol if tol is None else tol,
                       {"parts": {r.name: r.max_residual for r in reports}})


def sample_box(dim: int, count: int, low: float = -1.0, high: float = 1.0,
               seed: int = 0) -> np.ndarray:
    """``count`` uniform points in ``[low, high]^dim`` from a seeded generator."""
    if count < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=(count, dim))


def sup_norm(values: np.ndarray) -> np.ndarray:
    """Row-wise sup norm of a (samples, components) array."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        return np.abs(values)
    if values.shape[1] == 0:
        return np.zeros(values.shape[0])
    return np.max(np.abs(values), axis=1)


@dataclass(frozen=True)
class Sampling:
    """Seeded uniform sampling box, reused across levels and checks."""

    count: int = 100
    low: float = -1.0
    high: float = 1.0
    seed: int = 0

    def points(self, dim: int, salt: int = 0) -> np.ndarray:
        return sample_box(dim, self.count, self.low, self.high, self.seed + 7919 * salt)


def random_polynomial(names, rng: np.random.Generator, degree: int = 2, terms: int = 3):
    """Sparse polynomial with small nonzero integer coefficients."""
    from .expr import Const, Var, mul, sum_exprs

    names = list(names)
    out = []
    for _ in range(terms):
        coef = float(rng.choice([-3, -2, -1, 1, 2, 3]))
        d = int(rng.integers(0, degree + 1))
        mono = Const(coef)
        for v in rng.choice(len(names), size=d, replace=True):
            mono = mul(mono, Var(names[int(v)]))
        out.append(mono)
    return sum_exprs(out)
