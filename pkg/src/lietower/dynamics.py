"""Semisprays on algebroids, admissible curves and their tower versions.

A semispray on ``E = M x R^m`` is the total-space field
``S(x, e) = (rho(x) e, xi(x, e))``; only the acceleration ``xi`` is free,
so the projection conditions hold by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .algebroid import Algebroid
from .checks import CheckReport, Sampling, sample_box, sup_norm
from .expr import Const, Expr, mul, sum_exprs, var
from .fields import Chart, FlowError, SmoothMap, VectorField, _as_exprs, f_related, rk4

__all__ = [
    "Semispray", "DiscreteCurve", "LimitSemispray", "make_semispray", "integrate",
    "integrate_field", "admissibility_residual", "tower_semispray", "homogeneity_check",
    "total_chart",
]


def total_chart(A: Algebroid, prefix: str = "e") -> Chart:
    """Chart (x_1..x_n, e1..em) on the total space."""
    fiber = tuple(f"{prefix}{k + 1}" for k in range(A.fiber_dim))
    clash = set(fiber) & set(A.chart.names)
    if clash:
        raise ValueError(f"fiber coordinate names {sorted(clash)} clash with the base chart")
    return Chart(A.chart.names + fiber)


@dataclass(frozen=True, eq=False)
class Semispray:
    algebroid: Algebroid
    xi: tuple[Expr, ...]
    chart: Chart

    @property
    def fiber_names(self) -> tuple[str, ...]:
        return self.chart.names[self.algebroid.base_dim:]

    @cached_property
    def field(self) -> VectorField:
        A = self.algebroid
        e = [var(n) for n in self.fiber_names]
        base = [sum_exprs(mul(A.anchor[i][k], e[k]) for k in range(A.fiber_dim))
                for i in range(A.base_dim)]
        return VectorField(self.chart, tuple(base) + self.xi)

    def __call__(self, points) -> np.ndarray:
        return self.field(points)


def make_semispray(A: Algebroid, xi: Sequence, fiber_prefix: str = "e") -> Semispray:
    """Semispray with acceleration ``xi`` over (x, e); strings are parsed."""
    chart = total_chart(A, fiber_prefix)
    if len(xi) != A.fiber_dim:
        raise ValueError(f"{len(xi)} acceleration components for fiber dimension {A.fiber_dim}")
    return Semispray(A, _as_exprs(chart, xi, "acceleration"), chart)


@dataclass(frozen=True)
class DiscreteCurve:
    """Samples (t, m(t), e(t)) of a curve in the total space."""

    t: np.ndarray
    base: np.ndarray
    fiber: np.ndarray
    step: float

    def __post_init__(self):
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("curve times must be strictly increasing")

    def __len__(self):
        return len(self.t)

    def to_table(self) -> np.ndarray:
        """Rows (t, base coords.., fiber coords..)."""
        return np.column_stack([self.t, self.base, self.fiber])

    @property
    def end(self) -> tuple[np.ndarray, np.ndarray]:
        return self.base[-1], self.fiber[-1]


def integrate_field(X: VectorField, base_dim: int, x0, e0, t_end: float, step: float) -> DiscreteCurve:
    """RK4 curve of a total-space field split into base and fiber parts."""
    y0 = np.concatenate([np.atleast_1d(np.asarray(x0, dtype=float)),
                         np.atleast_1d(np.asarray(e0, dtype=float))])
    if len(y0) != X.chart.dim:
        raise ValueError(f"initial state of size {len(y0)} for a {X.chart.dim}-dimensional total space")
    ts, ys = rk4(X._compiled, y0, t_end, step)
    return DiscreteCurve(ts, ys[:, :base_dim], ys[:, base_dim:], float(step))


def integrate(S: Semispray, x0, e0, t_end: float, step: float) -> DiscreteCurve:
    """Integral curve of S from (x0, e0); a non-finite state raises FlowError."""
    return integrate_field(S.field, S.algebroid.base_dim, x0, e0, t_end, step)


def admissibility_residual(A: Algebroid, c: DiscreteCurve, tol: float | None = None) -> CheckReport:
    """Central-difference m' against rho(m) e at interior nodes.

    The default tolerance is ``10 * step**2``, the order of the differencing
    error on smooth data.
    """
    if len(c) < 3:
        raise ValueError("admissibility needs at least 3 curve nodes")
    dm = (c.base[2:] - c.base[:-2]) / (c.t[2:] - c.t[:-2])[:, None]
    mid = c.base[1:-1]
    rho = A.anchor_at(mid)
    pushed = np.einsum("kij,kj->ki", rho, c.fiber[1:-1])
    tol = 10.0 * c.step ** 2 if tol is None else tol
    return CheckReport("admissibility", np.column_stack([c.t[1:-1], mid]), sup_norm(dm - pushed), tol)


def homogeneity_check(S: Semispray, lambdas: Sequence[float], samples, tol: float = 1e-9) -> CheckReport:
    """S(x, lam e) against lam * Th_lam(S(x, e)) with h_lam(x, e) = (x, lam e).

    Th_lam scales the fiber-direction components by lam, so the fiber part
    of the right side is lam^2 xi(x, e).
    """
    pts = S.chart.point(np.atleast_2d(samples))
    n = S.algebroid.base_dim
    base = S(pts)
    res = np.zeros(len(pts))
    for lam in lambdas:
        if lam == 0:
            raise ValueError("homothety factor must be nonzero")
        scaled = pts.copy()
        scaled[:, n:] *= lam
        rhs = base.copy()
        rhs[:, :n] *= lam
        rhs[:, n:] *= lam * lam
        res = np.maximum(res, sup_norm(S(scaled) - rhs))
    return CheckReport("homogeneity", pts, res, tol, {"lambdas": [float(v) for v in lambdas]})


# ---------------------------------------------------------------------------
# towers


class SprayCompatibilityError(ValueError):
    def __init__(self, lower, upper, report: CheckReport):
        self.lower, self.upper, self.report = lower, upper, report
        super().__init__(f"sprays are not compatible between levels {lower} and {upper} "
                         f"(max residual {report.max_residual:.3e}, tol {report.tol:g})")


def _total_map(T, a: int, b: int, sa: Semispray, sb: Semispray) -> SmoothMap:
    """F(x, e) = (delta_i^j x, f_i^j(x) e) between total spaces."""
    i, j = T.labels[a], T.labels[b]
    delta = T.system.composite(i, j)
    M = T.morphism(i, j)
    e = [var(n) for n in sb.fiber_names]
    fib = [sum_exprs(mul(M[r][c], e[c]) for c in range(len(e))) for r in range(len(M))]
    return SmoothMap(sb.chart, sa.chart, tuple(delta.components) + tuple(fib))


@dataclass(frozen=True, eq=False)
class LimitSemispray:
    tower: object
    sprays: tuple
    report: dict
    maps: dict

    @property
    def max_residual(self) -> float:
        return max((r.max_residual for r in self.report.values()), default=0.0)

    def initial_thread(self, x_top, e_top) -> list[np.ndarray]:
        """Push a top-level total-space point down to every level."""
        top = len(self.sprays) - 1
        y = np.concatenate([np.asarray(x_top, dtype=float), np.asarray(e_top, dtype=float)])
        return [self.maps[(a, top)](y) if a < top else y for a in range(top + 1)]

    def integrate(self, x_top, e_top, t_end: float, step: float) -> list[DiscreteCurve]:
        """Levelwise integral curves from a coherent initial condition."""
        curves = []
        for S, y0 in zip(self.sprays, self.initial_thread(x_top, e_top)):
            n = S.algebroid.base_dim
            curves.append(integrate(S, y0[:n], y0[n:], t_end, step))
        return curves

    def coherence_residual(self, curves: Sequence[DiscreteCurve]) -> float:
        """max over saved nodes and level pairs of |F_i^j(gamma_j) - gamma_i|."""
        worst = 0.0
        for (a, b), F in self.maps.items():
            ya = np.column_stack([curves[a].base, curves[a].fiber])
            yb = np.column_stack([curves[b].base, curves[b].fiber])
            worst = max(worst, float(np.max(np.abs(F(yb) - ya))))
        return worst


def tower_semispray(T, sprays: Sequence[Semispray], samples: int | Sampling = 100,
                    tol: float = 1e-9) -> LimitSemispray:
    """Accept per-level sprays iff TF_i^j o S_j = S_i o F_i^j at samples."""
    sampling = samples if isinstance(samples, Sampling) else Sampling(count=int(samples))
    sprays = tuple(sprays)
    if len(sprays) != len(T.algebroids):
        raise ValueError(f"{len(sprays)} sprays for {len(T.algebroids)} levels")
    for S, A in zip(sprays, T.algebroids):
        if S.algebroid is not A:
            raise ValueError("spray belongs to a different algebroid")
    reports, maps = {}, {}
    for a, b in combinations(range(len(sprays)), 2):
        F = _total_map(T, a, b, sprays[a], sprays[b])
        pts = sampling.points(sprays[b].chart.dim, salt=b)
        rep = f_related(F, sprays[b].field, sprays[a].field, pts, tol, name="spray compatibility")
        if not rep.passed:
            raise SprayCompatibilityError(T.labels[a], T.labels[b], rep)
        reports[(T.labels[a], T.labels[b])] = rep
        maps[(a, b)] = F
    return LimitSemispray(T, sprays, reports, maps)


__all__.append("SprayCompatibilityError")
