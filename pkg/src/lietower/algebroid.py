"""Anchored bundles over a chart and sampled checks of the algebroid axioms.

Bundles are trivialised, ``E = chart x R^m``, so a section is ``m`` component
expressions and the anchor is an ``n x m`` matrix of expressions acting as
``rho(x) . e``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .checks import CheckReport, sup_norm
from .expr import ZERO, Expr, as_expr, compile_exprs, mul, sub, sum_exprs, add
from .fields import Chart, SmoothMap, VectorField, _as_exprs, lie_bracket

__all__ = [
    "Algebroid", "Section", "StructureFunctions", "anchor_apply", "structure_algebroid",
    "structure_bracket", "tangent_algebroid", "zero_anchor_algebroid",
    "verify_anchor_homomorphism", "verify_leibniz", "verify_morphism", "tangent_map",
    "Matrix", "as_matrix", "eval_matrix",
]

Matrix = tuple[tuple[Expr, ...], ...]
BracketRule = Callable[["Algebroid", "Section", "Section"], Sequence[Expr]]


def as_matrix(chart: Chart, rows, shape: tuple[int, int], what: str = "matrix") -> Matrix:
    rows = [list(r) for r in rows]
    if len(rows) != shape[0] or any(len(r) != shape[1] for r in rows):
        got = (len(rows), len(rows[0]) if rows else 0)
        raise ValueError(f"{what} has shape {got}, expected {shape}")
    return tuple(_as_exprs(chart, r, what) for r in rows)


def eval_matrix(mat: Matrix, chart: Chart, points: np.ndarray) -> np.ndarray:
    """Evaluate an expression matrix at points -> array (k, rows, cols)."""
    rows, cols = len(mat), len(mat[0]) if mat else 0
    pts = np.atleast_2d(points)
    if rows * cols == 0:
        return np.zeros((len(pts), rows, cols))
    fn = compile_exprs([e for r in mat for e in r], chart.names)
    return fn(pts).reshape(len(pts), rows, cols)


class Algebroid:
    """A Lie algebroid candidate: anchor matrix plus a bracket rule on sections.

    The axioms are not assumed; use :func:`verify_anchor_homomorphism`,
    :func:`verify_leibniz` and :func:`lietower.constructions.jacobi_residual`.
    """

    def __init__(self, chart: Chart, fiber_dim: int, anchor, bracket_rule: BracketRule,
                 name: str = "algebroid"):
        if fiber_dim < 0:
            raise ValueError("fiber dimension must be non-negative")
        self.chart = chart
        self.fiber_dim = fiber_dim
        self.anchor: Matrix = as_matrix(chart, anchor, (chart.dim, fiber_dim), "anchor")
        self._rule = bracket_rule
        self.name = name

    def __repr__(self):
        return f"<Algebroid {self.name}: base {self.chart.names}, fiber {self.fiber_dim}>"

    @property
    def base_dim(self) -> int:
        return self.chart.dim

    def section(self, components) -> "Section":
        return Section(self, tuple(components))

    def zero_section(self) -> "Section":
        return Section(self, (ZERO,) * self.fiber_dim)

    @cached_property
    def frame(self) -> tuple["Section", ...]:
        m = self.fiber_dim
        return tuple(Section(self, tuple(1.0 if i == k else 0.0 for i in range(m))) for k in range(m))

    def bracket(self, s1: "Section", s2: "Section") -> "Section":
        _check_owner(self, s1, s2)
        return Section(self, tuple(self._rule(self, s1, s2)))

    @cached_property
    def _frame_brackets(self) -> dict:
        return {}

    def frame_bracket(self, a: int, b: int) -> "Section":
        """[e_a, e_b] for the standard constant frame, cached."""
        key = (a, b)
        cache = self._frame_brackets
        if key not in cache:
            cache[key] = self.bracket(self.frame[a], self.frame[b])
        return cache[key]

    def anchor_apply(self, s: "Section") -> VectorField:
        return anchor_apply(self, s)

    def anchor_at(self, points) -> np.ndarray:
        return eval_matrix(self.anchor, self.chart, points)


def _check_owner(A: Algebroid, *sections: "Section"):
    for s in sections:
        if s.algebroid is not A:
            raise ValueError(f"section belongs to {s.algebroid!r}, not {A!r}")


@dataclass(frozen=True, eq=False)
class Section:
    algebroid: Algebroid
    components: tuple[Expr, ...]

    def __post_init__(self):
        A = self.algebroid
        comps = _as_exprs(A.chart, self.components, "section component")
        if len(comps) != A.fiber_dim:
            raise ValueError(f"{len(comps)} components for fiber dimension {A.fiber_dim}")
        object.__setattr__(self, "components", comps)

    @cached_property
    def _compiled(self):
        return compile_exprs(self.components, self.algebroid.chart.names)

    def __call__(self, points) -> np.ndarray:
        return self._compiled(self.algebroid.chart.point(points))

    def scale(self, g) -> "Section":
        g = as_expr(g)
        return Section(self.algebroid, tuple(mul(g, c) for c in self.components))

    def __add__(self, other: "Section") -> "Section":
        return Section(self.algebroid, tuple(add(a, b) for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "Section") -> "Section":
        return Section(self.algebroid, tuple(sub(a, b) for a, b in zip(self.components, other.components)))

    def __repr__(self):
        return f"Section([{', '.join(map(str, self.components))}])"


def anchor_apply(A: Algebroid, s: Section) -> VectorField:
    """rho o s: component k is sum_j rho^k_j s^j."""
    _check_owner(A, s)
    return VectorField(A.chart, tuple(sum_exprs(mul(r, c) for r, c in zip(row, s.components))
                                      for row in A.anchor))


class StructureFunctions:
    """Coefficients C^k_ij(x), antisymmetric in (i, j), with 0-based indices."""

    def __init__(self, m: int, entries: dict | None = None, chart: Chart | None = None):
        self.m = m
        self._c: dict[tuple[int, int, int], Expr] = {}
        for (k, i, j), value in (entries or {}).items():
            if not all(0 <= t < m for t in (k, i, j)):
                raise ValueError(f"structure index {(k, i, j)} out of range for m={m}")
            e = chart.parse(value) if (chart is not None and isinstance(value, str)) else as_expr(value)
            if chart is not None:
                chart.check_expr(e, "structure function")
            self._c[(k, i, j)] = e

    @classmethod
    def antisymmetric(cls, m: int, upper: dict, chart: Chart | None = None) -> "StructureFunctions":
        """Build from entries C^k_ij with i < j; the (j, i) entries are filled by antisymmetry."""
        full = {}
        for (k, i, j), v in upper.items():
            if i == j:
                raise ValueError("diagonal structure entries must vanish")
            e = chart.parse(v) if (chart is not None and isinstance(v, str)) else as_expr(v)
            full[(k, i, j)] = e
            full[(k, j, i)] = -e
        return cls(m, full, chart)

    @classmethod
    def zero(cls, m: int) -> "StructureFunctions":
        return cls(m, {})

    def __call__(self, k: int, i: int, j: int) -> Expr:
        return self._c.get((k, i, j), ZERO)

    def items(self):
        return self._c.items()

    def antisymmetry_report(self, chart: Chart, samples, tol: float = 1e-12) -> CheckReport:
        pts = np.atleast_2d(samples)
        exprs = [add(self(k, i, j), self(k, j, i))
                 for k, i, j in product(range(self.m), repeat=3)]
        vals = compile_exprs(exprs, chart.names)(pts) if exprs else np.zeros((len(pts), 0))
        return CheckReport("structure antisymmetry", pts, sup_norm(vals), tol)


def structure_bracket(C: StructureFunctions) -> BracketRule:
    """[s1,s2]^k = sum_ij s1^i s2^j C^k_ij + rho(s1)(s2^k) - rho(s2)(s1^k)."""
    def rule(A: Algebroid, s1: Section, s2: Section):
        X1, X2 = anchor_apply(A, s1), anchor_apply(A, s2)
        out = []
        for k in range(A.fiber_dim):
            terms = [mul(mul(s1.components[i], s2.components[j]), c)
                     for (kk, i, j), c in C.items() if kk == k]
            algebraic = sum_exprs(terms)
            out.append(add(algebraic, sub(X1.apply(s2.components[k]), X2.apply(s1.components[k]))))
        return out
    return rule


def structure_algebroid(chart: Chart, m: int, anchor, C: StructureFunctions,
                        name: str = "structure") -> Algebroid:
    if C.m != m:
        raise ValueError(f"structure functions for m={C.m}, fiber dimension {m}")
    return Algebroid(chart, m, anchor, structure_bracket(C), name=name)


def _identity(n: int):
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def _tangent_rule(A: Algebroid, s1: Section, s2: Section):
    return lie_bracket(VectorField(A.chart, s1.components), VectorField(A.chart, s2.components)).components


def tangent_algebroid(chart: Chart) -> Algebroid:
    """E = TM, rho = Id, bracket = Lie bracket of vector fields."""
    return Algebroid(chart, chart.dim, _identity(chart.dim), _tangent_rule, name="tangent")


def zero_anchor_algebroid(chart: Chart, m: int, C: StructureFunctions | None = None) -> Algebroid:
    """Bundle of Lie algebras: rho = 0, bracket pointwise from C (abelian by default)."""
    C = C or StructureFunctions.zero(m)
    zero = [[0.0] * m for _ in range(chart.dim)]
    return structure_algebroid(chart, m, zero, C, name="zero-anchor")


# ---------------------------------------------------------------------------
# Axiom checks


def _field_residual(lhs: VectorField | Section, rhs: VectorField | Section, pts) -> np.ndarray:
    return sup_norm(lhs(pts) - rhs(pts))


def verify_anchor_homomorphism(A: Algebroid, s1: Section, s2: Section, samples,
                               tol: float = 1e-9) -> CheckReport:
    """rho o [s1, s2]_E == [rho o s1, rho o s2] at the samples."""
    pts = A.chart.point(np.atleast_2d(samples))
    lhs = anchor_apply(A, A.bracket(s1, s2))
    rhs = lie_bracket(anchor_apply(A, s1), anchor_apply(A, s2))
    return CheckReport("anchor homomorphism", pts, _field_residual(lhs, rhs, pts), tol)


def verify_leibniz(A: Algebroid, s1: Section, s2: Section, g, samples,
                   tol: float = 1e-9) -> CheckReport:
    """[s1, g s2]_E == g [s1, s2]_E + (rho(s1) g) s2 at the samples."""
    g = A.chart.parse(g) if isinstance(g, str) else as_expr(g)
    pts = A.chart.point(np.atleast_2d(samples))
    lhs = A.bracket(s1, s2.scale(g))
    rhs = A.bracket(s1, s2).scale(g) + s2.scale(anchor_apply(A, s1).apply(g))
    return CheckReport("leibniz", pts, _field_residual(lhs, rhs, pts), tol)


def tangent_map(f: SmoothMap) -> Matrix:
    """Tf as a fibrewise-linear map field TM -> TM' (rows: target, cols: source)."""
    return f.jacobian_exprs


def verify_morphism(psi, f: SmoothMap, A: Algebroid, A2: Algebroid, forms, samples,
                    tol: float = 1e-9) -> CheckReport:
    """d_rho o psi^* == psi^* o d_rho' on the supplied 0- and 1-forms of ``A2``.

    ``psi`` is an ``m' x m`` matrix over the base coordinates of ``A``
    covering ``f``. Residuals compare all components of the two forms.
    """
    from .calculus import AlgebroidForm, exterior_derivative, pullback

    if f.source != A.chart or f.target != A2.chart:
        raise ValueError("base map does not match the algebroid charts")
    psi = as_matrix(A.chart, psi, (A2.fiber_dim, A.fiber_dim), "bundle map")
    pts = A.chart.point(np.atleast_2d(samples))
    parts = []
    for omega in forms:
        if not isinstance(omega, AlgebroidForm):
            omega = AlgebroidForm.scalar(A2, omega)
        lhs = exterior_derivative(A, pullback(psi, f, omega, A))
        rhs = pullback(psi, f, exterior_derivative(A2, omega), A)
        parts.append(sup_norm(lhs.evaluate(pts) - rhs.evaluate(pts)))
    res = np.max(np.vstack(parts), axis=0) if parts else np.zeros(len(pts))
    return CheckReport("morphism", pts, res, tol)
