"""Concrete algebroids: Nijenhuis, involutive distributions, Poisson cotangent, actions.

Hypotheses such as involutivity or the realisation of a Lie algebra are
checked at construction time on sample points, not trusted.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .algebroid import (Algebroid, Matrix, Section, StructureFunctions, as_matrix,
                        eval_matrix, structure_bracket, structure_algebroid)
from .checks import CheckReport, merge_reports, sample_box, sup_norm
from .expr import ZERO, Const, Expr, add, diff, mul, power, simplify, sub, sum_exprs, var
from .fields import Chart, VectorField, lie_bracket

__all__ = [
    "ConstructionError", "NijenhuisTensor", "PoissonTensor", "nijenhuis_algebroid",
    "nijenhuis_torsion", "harmonic_oscillator_N", "harmonic_oscillator_chart",
    "distribution_algebroid", "poisson_cotangent_algebroid", "action_algebroid",
    "jacobi_residual", "lie_derivative_1form", "canonical_poisson",
]

DEFAULT_VALIDATION_SAMPLES = 50


class ConstructionError(ValueError):
    """A construction's hypothesis failed; ``report`` holds the evidence."""

    def __init__(self, message: str, report: CheckReport):
        self.report = report
        super().__init__(f"{message} (max residual {report.max_residual:.3e})")


def _validation_points(chart: Chart, samples):
    if samples is None:
        return sample_box(chart.dim, DEFAULT_VALIDATION_SAMPLES, seed=0)
    return chart.point(np.atleast_2d(samples))


def _mat_vec(M: Matrix, v: Sequence[Expr]) -> tuple[Expr, ...]:
    return tuple(sum_exprs(mul(a, b) for a, b in zip(row, v)) for row in M)


@dataclass(frozen=True, eq=False)
class NijenhuisTensor:
    """A (1,1)-tensor field N, stored as an n x n matrix acting on vector components."""

    chart: Chart
    matrix: Matrix

    def __post_init__(self):
        n = self.chart.dim
        object.__setattr__(self, "matrix", as_matrix(self.chart, self.matrix, (n, n), "(1,1)-tensor"))

    def apply(self, X: VectorField) -> VectorField:
        return VectorField(self.chart, _mat_vec(self.matrix, X.components))

    def at(self, points) -> np.ndarray:
        return eval_matrix(self.matrix, self.chart, points)


@dataclass(frozen=True, eq=False)
class PoissonTensor:
    """Antisymmetric bivector P^{ij}; antisymmetry is checked on construction."""

    chart: Chart
    matrix: Matrix
    tol: float = 1e-12

    def __post_init__(self):
        n = self.chart.dim
        M = as_matrix(self.chart, self.matrix, (n, n), "bivector")
        object.__setattr__(self, "matrix", M)
        sym = [simplify(add(M[i][j], M[j][i])) for i in range(n) for j in range(i, n)]
        if any(e is not ZERO for e in sym):
            pts = sample_box(n, DEFAULT_VALIDATION_SAMPLES, seed=0)
            vals = eval_matrix(tuple((e,) for e in sym), self.chart, pts)[:, :, 0]
            report = CheckReport("bivector antisymmetry", pts, sup_norm(vals), self.tol)
            if not report.passed:
                raise ConstructionError("P + P^T does not vanish", report)

    def at(self, points) -> np.ndarray:
        return eval_matrix(self.matrix, self.chart, points)


def canonical_poisson(n_pairs: int) -> PoissonTensor:
    """P = [[0, I], [-I, 0]] on R^{2 n_pairs} with coordinates x1.., then p1.."""
    names = [f"x{k + 1}" for k in range(2 * n_pairs)]
    chart = Chart(tuple(names))
    n = 2 * n_pairs
    M = [[0.0] * n for _ in range(n)]
    for k in range(n_pairs):
        M[k][n_pairs + k] = 1.0
        M[n_pairs + k][k] = -1.0
    return PoissonTensor(chart, M)


# ---------------------------------------------------------------------------
# Example 1: Nijenhuis tensors


def nijenhuis_torsion(N: NijenhuisTensor, X: VectorField, Y: VectorField) -> VectorField:
    """T(X,Y) = [NX,NY] - N[NX,Y] - N[X,NY] + N N [X,Y]."""
    NX, NY = N.apply(X), N.apply(Y)
    return (lie_bracket(NX, NY)
            - N.apply(lie_bracket(NX, Y))
            - N.apply(lie_bracket(X, NY))
            + N.apply(N.apply(lie_bracket(X, Y))))


def nijenhuis_algebroid(N: NijenhuisTensor) -> Algebroid:
    """E = TM with anchor N and bracket [X,Y]_N = [NX,Y] + [X,NY] - N[X,Y]."""
    chart = N.chart

    def rule(A: Algebroid, s1: Section, s2: Section):
        X, Y = VectorField(chart, s1.components), VectorField(chart, s2.components)
        out = lie_bracket(N.apply(X), Y) + lie_bracket(X, N.apply(Y)) - N.apply(lie_bracket(X, Y))
        return out.components

    return Algebroid(chart, chart.dim, N.matrix, rule, name="nijenhuis")


def harmonic_oscillator_chart(i: int) -> Chart:
    return Chart(tuple(name for k in range(1, i + 1) for name in (f"x{k}", f"y{k}")))


def harmonic_oscillator_N(i: int) -> NijenhuisTensor:
    """Recursion operator of the i-mode oscillator: block k is (x_k^2 + y_k^2) I_2."""
    if i < 1:
        raise ValueError("level must be >= 1")
    chart = harmonic_oscillator_chart(i)
    n = 2 * i
    M = [[ZERO] * n for _ in range(n)]
    for k in range(1, i + 1):
        r2 = add(power(var(f"x{k}"), 2), power(var(f"y{k}"), 2))
        M[2 * k - 2][2 * k - 2] = r2
        M[2 * k - 1][2 * k - 1] = r2
    return NijenhuisTensor(chart, M)


# ---------------------------------------------------------------------------
# Example 2: involutive distributions


def distribution_algebroid(frame: Sequence[VectorField], C: StructureFunctions,
                           samples=None, tol: float = 1e-9) -> Algebroid:
    """Distribution spanned by ``frame`` with [X_a, X_b] = sum_c C^c_ab X_c.

    The relation is checked at ``samples`` (default: 50 seeded points in
    [-1, 1]^n); a failure raises :class:`ConstructionError`.
    """
    if not frame:
        raise ValueError("empty frame")
    chart = frame[0].chart
    k = len(frame)
    if C.m != k:
        raise ValueError(f"structure functions for {C.m} generators, frame has {k}")
    pts = _validation_points(chart, samples)
    reports = []
    for a in range(k):
        for b in range(a + 1, k):
            lhs = lie_bracket(frame[a], frame[b])
            rhs = VectorField(chart, tuple(
                sum_exprs(mul(C(c, a, b), frame[c].components[r]) for c in range(k))
                for r in range(chart.dim)))
            reports.append(CheckReport(f"[X{a},X{b}]", pts, sup_norm(lhs(pts) - rhs(pts)), tol))
    if reports:
        report = merge_reports("involutivity", reports, tol)
        if not report.passed:
            raise ConstructionError("frame is not closed under the bracket with the given structure functions", report)
    anchor = [[frame[c].components[r] for c in range(k)] for r in range(chart.dim)]
    return structure_algebroid(chart, k, anchor, C, name="distribution")


# ---------------------------------------------------------------------------
# Example 3: Poisson cotangent algebroid


def lie_derivative_1form(X: VectorField, alpha: Sequence[Expr]) -> tuple[Expr, ...]:
    """Classical (L_X alpha)_i = sum_j (X^j d_j alpha_i + alpha_j d_i X^j)."""
    names = X.chart.names
    return tuple(
        add(X.apply(alpha[i]),
            sum_exprs(mul(alpha[j], diff(X.components[j], names[i])) for j in range(len(names))))
        for i in range(len(names)))


def poisson_cotangent_algebroid(P: PoissonTensor) -> Algebroid:
    """E = T*M with {a, b}_P = L_{Pb} a - L_{Pa} b + d<b, Pa>.

    In the bracket ``P a`` is the vector with components sum_j P^{ij} a_j.
    The anchor sends a covector to sum_j a_j P^{ji}, i.e. its matrix is
    P^T; with that anchor the bracket above satisfies both algebroid
    axioms and d{f,g} = {df, dg}_P for {f,g} = sum P^{ij} d_i f d_j g.
    """
    chart = P.chart
    n = chart.dim
    M = P.matrix

    def sharp(alpha):
        return VectorField(chart, _mat_vec(M, alpha))

    def rule(A: Algebroid, s1: Section, s2: Section):
        a, b = s1.components, s2.components
        Pa, Pb = sharp(a), sharp(b)
        pairing = sum_exprs(mul(b[i], Pa.components[i]) for i in range(n))
        first = lie_derivative_1form(Pb, a)
        second = lie_derivative_1form(Pa, b)
        return tuple(add(sub(first[i], second[i]), diff(pairing, chart.names[i])) for i in range(n))

    anchor = [[M[j][i] for j in range(n)] for i in range(n)]
    return Algebroid(chart, n, anchor, rule, name="poisson-cotangent")


# ---------------------------------------------------------------------------
# Example 4: Lie algebra actions


def action_algebroid(chart: Chart, generators: Sequence[VectorField], c: StructureFunctions,
                     samples=None, tol: float = 1e-9) -> Algebroid:
    """Trivial bundle M x g with anchor Psi(e_i) = generators[i].

    The generators must realise the algebra, [Psi(e_i), Psi(e_j)] =
    sum_k c^k_ij Psi(e_k), at the validation samples; structure constants
    must be numeric.
    """
    for (_, _, _), value in c.items():
        if not isinstance(value, Const):
            raise ValueError("action algebroid needs constant structure constants")
    for X in generators:
        if X.chart != chart:
            raise ValueError("generator on a different chart")
    try:
        A = distribution_algebroid(list(generators), c, samples=samples, tol=tol)
    except ConstructionError as err:
        raise ConstructionError("generators do not realise the given structure constants", err.report) from None
    A.name = "action"
    return A


# ---------------------------------------------------------------------------


def jacobi_residual(A: Algebroid, s1: Section, s2: Section, s3: Section, samples,
                    tol: float = 1e-9) -> CheckReport:
    """[[s1,s2],s3] + [[s2,s3],s1] + [[s3,s1],s2] at the samples."""
    pts = A.chart.point(np.atleast_2d(samples))
    terms = [A.bracket(A.bracket(s1, s2), s3),
             A.bracket(A.bracket(s2, s3), s1),
             A.bracket(A.bracket(s3, s1), s2)]
    total = sum(t(pts) for t in terms)
    return CheckReport("jacobi", pts, sup_norm(total), tol)
