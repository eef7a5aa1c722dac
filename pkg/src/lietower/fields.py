"""Charts, vector fields and smooth maps; Lie bracket, f-relatedness, flows."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .checks import CheckReport, sup_norm
from .expr import (ZERO, Expr, Var, as_expr, compile_exprs,
                   diff, free_variables, mul, parse, sub, substitute, sum_exprs)

__all__ = [
    "Chart", "VectorField", "SmoothMap", "lie_bracket", "jacobian",
    "f_related", "flow", "FlowError", "coordinate_field", "zero_field",
]


@dataclass(frozen=True)
class Chart:
    """A single global coordinate chart on R^n."""

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) < 1:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate coordinate names in {self.names}")

    @classmethod
    def euclidean(cls, n: int, prefix: str = "x") -> "Chart":
        return cls(tuple(f"{prefix}{k + 1}" for k in range(n)))

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def coords(self) -> tuple[Var, ...]:
        return tuple(Var(n) for n in self.names)

    def parse(self, text: str) -> Expr:
        return parse(text, self.names)

    def check_expr(self, e: Expr, what: str = "expression") -> Expr:
        extra = free_variables(e) - set(self.names)
        if extra:
            raise ValueError(f"{what} uses {sorted(extra)} outside chart {self.names}")
        return e

    def point(self, values) -> np.ndarray:
        p = np.asarray(values, dtype=float)
        if p.shape[-1] != self.dim:
            raise ValueError(f"point of dimension {p.shape[-1]} on a {self.dim}-dimensional chart")
        return p


def _as_exprs(chart: Chart, components, what: str) -> tuple[Expr, ...]:
    out = []
    for c in components:
        e = chart.parse(c) if isinstance(c, str) else as_expr(c)
        out.append(chart.check_expr(e, what))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class VectorField:
    chart: Chart
    components: tuple[Expr, ...]

    def __post_init__(self):
        comps = _as_exprs(self.chart, self.components, "vector field component")
        if len(comps) != self.chart.dim:
            raise ValueError(f"{len(comps)} components on a {self.chart.dim}-dimensional chart")
        object.__setattr__(self, "components", comps)

    @cached_property
    def _compiled(self):
        return compile_exprs(self.components, self.chart.names)

    def __call__(self, points) -> np.ndarray:
        return self._compiled(self.chart.point(points))

    def apply(self, f: Expr) -> Expr:
        """Directional derivative X(f) = sum_i X^i d_i f."""
        return sum_exprs(mul(c, diff(f, n)) for c, n in zip(self.components, self.chart.names))

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_chart(self.chart, other.chart)
        return VectorField(self.chart, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        _same_chart(self.chart, other.chart)
        return VectorField(self.chart, tuple(sub(a, b) for a, b in zip(self.components, other.components)))

    def scale(self, g) -> "VectorField":
        g = as_expr(g)
        return VectorField(self.chart, tuple(mul(g, c) for c in self.components))

    def __repr__(self):
        return f"VectorField({self.chart.names}, [{', '.join(map(str, self.components))}])"


def coordinate_field(chart: Chart, k: int) -> VectorField:
    return VectorField(chart, tuple(1.0 if i == k else 0.0 for i in range(chart.dim)))


def zero_field(chart: Chart) -> VectorField:
    return VectorField(chart, (ZERO,) * chart.dim)


@dataclass(frozen=True, eq=False)
class SmoothMap:
    """F: source -> target given by target-many expressions in source coordinates."""

    source: Chart
    target: Chart
    components: tuple[Expr, ...]

    def __post_init__(self):
        comps = _as_exprs(self.source, self.components, "map component")
        if len(comps) != self.target.dim:
            raise ValueError(f"{len(comps)} components for a {self.target.dim}-dimensional target")
        object.__setattr__(self, "components", comps)

    @classmethod
    def identity(cls, chart: Chart) -> "SmoothMap":
        return cls(chart, chart, chart.coords)

    @classmethod
    def projection(cls, source: Chart, target: Chart) -> "SmoothMap":
        """Keep the coordinates of ``target`` (which must be named in ``source``)."""
        missing = set(target.names) - set(source.names)
        if missing:
            raise ValueError(f"projection target coordinates {sorted(missing)} not in source")
        return cls(source, target, target.coords)

    @cached_property
    def _compiled(self):
        return compile_exprs(self.components, self.source.names)

    def __call__(self, points) -> np.ndarray:
        return self._compiled(self.source.point(points))

    def pull(self, e: Expr) -> Expr:
        """e o F for an expression over target coordinates."""
        return substitute(e, dict(zip(self.target.names, self.components)))

    def compose(self, inner: "SmoothMap") -> "SmoothMap":
        """self o inner."""
        _same_chart(inner.target, self.source)
        return SmoothMap(inner.source, self.target, tuple(inner.pull(c) for c in self.components))

    @cached_property
    def jacobian_exprs(self) -> tuple[tuple[Expr, ...], ...]:
        return tuple(tuple(diff(c, n) for n in self.source.names) for c in self.components)

    @cached_property
    def _compiled_jacobian(self):
        flat = [e for row in self.jacobian_exprs for e in row]
        return compile_exprs(flat, self.source.names)

    def jacobian(self, points) -> np.ndarray:
        p = self.source.point(points)
        vals = self._compiled_jacobian(p)
        return vals.reshape(p.shape[:-1] + (self.target.dim, self.source.dim))


def _same_chart(a: Chart, b: Chart):
    if a != b:
        raise ValueError(f"chart mismatch: {a.names} vs {b.names}")


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^k = sum_i (X^i d_i Y^k - Y^i d_i X^k)."""
    _same_chart(X.chart, Y.chart)
    return VectorField(X.chart, tuple(sub(X.apply(yk), Y.apply(xk))
                                      for xk, yk in zip(X.components, Y.components)))


def jacobian(F: SmoothMap, p) -> np.ndarray:
    """Tangent map of F at p as a (target dim x source dim) matrix."""
    return F.jacobian(p)


def f_related(F: SmoothMap, X: VectorField, Y: VectorField, samples, tol: float = 1e-9,
              name: str = "f_related") -> CheckReport:
    """Check TF o X = Y o F at sample points of the source chart."""
    _same_chart(F.source, X.chart)
    _same_chart(F.target, Y.chart)
    pts = F.source.point(np.atleast_2d(samples))
    pushed = np.einsum("kij,kj->ki", F.jacobian(pts), X(pts))
    res = sup_norm(pushed - Y(F(pts)))
    return CheckReport(name, pts, res, tol)


class FlowError(RuntimeError):
    """Non-finite state mid-trajectory; carries the partial curve."""

    def __init__(self, message: str, curve: list, t: float):
        self.curve = curve
        self.t = t
        super().__init__(f"{message} at t={t!r}")


def _time_grid(t_end: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("step must be positive")
    n = max(1, int(round(abs(t_end) / step)))
    return np.linspace(0.0, t_end, n + 1)


def rk4(rhs, y0: np.ndarray, t_end: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Classical fixed-step RK4 for autonomous y' = rhs(y).

    The step is adjusted so that an integer number of equal steps lands
    exactly on ``t_end``. Returns the time grid and the states.
    """
    ts = _time_grid(t_end, step)
    ys = np.empty((len(ts), len(y0)))
    y = np.asarray(y0, dtype=float).copy()
    ys[0] = y
    for k in range(1, len(ts)):
        h = ts[k] - ts[k - 1]
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise FlowError("non-finite state", list(zip(ts[:k], ys[:k])), float(ts[k]))
        ys[k] = y
    return ts, ys


def flow(X: VectorField, p0, t_end: float, step: float) -> list[tuple[float, np.ndarray]]:
    """RK4 trajectory of x' = X(x) from p0; list of (t, point)."""
    ts, ys = rk4(X._compiled, X.chart.point(p0), t_end, step)
    return [(float(t), y) for t, y in zip(ts, ys)]
