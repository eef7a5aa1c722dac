"""Forms on algebroid sections and the operators L_s, d_rho, i_s and psi^*.

A q-form is stored by its values on the standard frame, one expression per
strictly increasing multi-index. Operators defined by their action on
arbitrary sections are applied to frame sections; bracket terms between
frame sections are kept, since they need not vanish.
"""
from __future__ import annotations

from itertools import combinations, permutations
from typing import Mapping, Sequence

import numpy as np

from .algebroid import Algebroid, Matrix, Section, _check_owner, anchor_apply, as_matrix
from .expr import ZERO, Expr, as_expr, compile_exprs, diff, mul, neg, sum_exprs
from .fields import SmoothMap

__all__ = [
    "AlgebroidForm", "MAX_DEGREE", "eval_form", "lie_derivative", "exterior_derivative",
    "interior_product", "pullback", "determinant",
]

MAX_DEGREE = 3


def _perm_sign(perm: Sequence[int]) -> int:
    sign, seen = 1, set()
    for start in range(len(perm)):
        if start in seen:
            continue
        length, k = 0, start
        while k not in seen:
            seen.add(k)
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def determinant(rows: Sequence[Sequence[Expr]]) -> Expr:
    """Symbolic determinant by permutation expansion (small sizes only)."""
    q = len(rows)
    if q == 0:
        return as_expr(1.0)
    terms = []
    for perm in permutations(range(q)):
        term = as_expr(1.0)
        for a in range(q):
            term = mul(term, rows[a][perm[a]])
        terms.append(term if _perm_sign(perm) > 0 else neg(term))
    return sum_exprs(terms)


class AlgebroidForm:
    """Alternating q-form on sections of ``algebroid``."""

    def __init__(self, algebroid: Algebroid, degree: int, components: Mapping | Sequence = ()):
        if degree < 0:
            raise ValueError("form degree must be >= 0")
        if degree > MAX_DEGREE:
            raise ValueError(f"form degree {degree} exceeds the cap {MAX_DEGREE}")
        self.algebroid = algebroid
        self.degree = degree
        chart = algebroid.chart
        self.indices: tuple[tuple[int, ...], ...] = tuple(combinations(range(algebroid.fiber_dim), degree))
        if not isinstance(components, Mapping):
            components = list(components)
            if components and len(components) != len(self.indices):
                raise ValueError(f"{len(components)} components for {len(self.indices)} multi-indices")
            components = dict(zip(self.indices, components))
        comps = {}
        for idx, value in components.items():
            idx = tuple(idx)
            if idx not in self.indices:
                raise ValueError(f"multi-index {idx} is not strictly increasing in range")
            e = chart.parse(value) if isinstance(value, str) else as_expr(value)
            comps[idx] = chart.check_expr(e, "form component")
        self.components: dict[tuple[int, ...], Expr] = {I: comps.get(I, ZERO) for I in self.indices}

    @classmethod
    def scalar(cls, A: Algebroid, f) -> "AlgebroidForm":
        return cls(A, 0, {(): f})

    @classmethod
    def basis(cls, A: Algebroid, *idx: int, coefficient=1.0) -> "AlgebroidForm":
        """coefficient * e^{i1} ^ ... ^ e^{iq} for increasing indices."""
        return cls(A, len(idx), {tuple(idx): coefficient})

    def component(self, idx: Sequence[int]) -> Expr:
        """Value on (e_i1, ..., e_iq) for any index order (alternating)."""
        idx = tuple(idx)
        if len(set(idx)) < len(idx):
            return ZERO
        order = sorted(range(len(idx)), key=lambda a: idx[a])
        value = self.components[tuple(idx[a] for a in order)]
        return value if _perm_sign(order) > 0 else neg(value)

    @property
    def scalar_value(self) -> Expr:
        if self.degree != 0:
            raise ValueError("not a 0-form")
        return self.components[()]

    def evaluate(self, points) -> np.ndarray:
        """Components at points -> array (k, number of multi-indices)."""
        pts = np.atleast_2d(points)
        return compile_exprs([self.components[I] for I in self.indices], self.algebroid.chart.names)(pts)

    def __repr__(self):
        body = ", ".join(f"{I}: {e}" for I, e in self.components.items() if e is not ZERO)
        return f"AlgebroidForm(degree={self.degree}, {{{body}}})"


def eval_form(omega: AlgebroidForm, *sections: Section) -> Expr:
    """omega(s1, ..., sq) = sum_I omega_I det(s_b^{I_a})."""
    if len(sections) != omega.degree:
        raise ValueError(f"{omega.degree}-form applied to {len(sections)} sections")
    _check_owner(omega.algebroid, *sections)
    if omega.degree == 0:
        return omega.components[()]
    terms = []
    for I, w in omega.components.items():
        if w is ZERO:
            continue
        minor = [[s.components[i] for s in sections] for i in I]
        terms.append(mul(w, determinant(minor)))
    return sum_exprs(terms)


def lie_derivative(A: Algebroid, s: Section, omega: AlgebroidForm) -> AlgebroidForm:
    """L_s omega; on functions this is the derivative along rho o s."""
    _check_owner(A, s)
    if omega.algebroid is not A:
        raise ValueError("form belongs to a different algebroid")
    X = anchor_apply(A, s)
    if omega.degree == 0:
        return AlgebroidForm.scalar(A, X.apply(omega.scalar_value))
    frame = A.frame
    comps = {}
    for I in omega.indices:
        terms = [X.apply(omega.components[I])]
        for a, i in enumerate(I):
            args = list(frame[k] for k in I)
            args[a] = A.bracket(s, frame[i])
            terms.append(neg(eval_form(omega, *args)))
        comps[I] = sum_exprs(terms)
    return AlgebroidForm(A, omega.degree, comps)


def exterior_derivative(A: Algebroid, omega: AlgebroidForm) -> AlgebroidForm:
    """d_rho omega, evaluated on frame tuples."""
    if omega.algebroid is not A:
        raise ValueError("form belongs to a different algebroid")
    q = omega.degree
    if q == 0:
        f = omega.scalar_value
        # (t_rho df)_k = sum_i rho^i_k d_i f
        df = [diff(f, n) for n in A.chart.names]
        comps = [sum_exprs(mul(A.anchor[i][k], df[i]) for i in range(A.base_dim))
                 for k in range(A.fiber_dim)]
        return AlgebroidForm(A, 1, comps)
    frame = A.frame
    comps = {}
    for I in combinations(range(A.fiber_dim), q + 1):
        terms = []
        for a, ia in enumerate(I):
            rest = I[:a] + I[a + 1:]
            Xa = anchor_apply(A, frame[ia])
            term = Xa.apply(omega.components[rest])
            terms.append(term if a % 2 == 0 else neg(term))
        for a, b in combinations(range(q + 1), 2):
            rest = [frame[k] for t, k in enumerate(I) if t not in (a, b)]
            term = eval_form(omega, A.frame_bracket(I[a], I[b]), *rest)
            terms.append(term if (a + b) % 2 == 0 else neg(term))
        comps[I] = sum_exprs(terms)
    return AlgebroidForm(A, q + 1, comps)


def interior_product(s: Section, omega: AlgebroidForm) -> AlgebroidForm:
    """(i_s omega)(s2, ..., sq) = omega(s, s2, ..., sq)."""
    if omega.degree == 0:
        raise ValueError("interior product of a 0-form")
    A = omega.algebroid
    _check_owner(A, s)
    comps = {J: eval_form(omega, s, *(A.frame[k] for k in J))
             for J in combinations(range(A.fiber_dim), omega.degree - 1)}
    return AlgebroidForm(A, omega.degree - 1, comps)


def pullback(psi: Matrix, f: SmoothMap, omega: AlgebroidForm, A: Algebroid) -> AlgebroidForm:
    """(psi^* omega')_x(s1..sq) = omega'_{f(x)}(psi s1, ..., psi sq).

    ``psi`` is ``m' x m`` over the base coordinates of ``A``.
    """
    A2 = omega.algebroid
    if len(psi) != A2.fiber_dim or any(len(r) != A.fiber_dim for r in psi):
        raise ValueError("bundle map shape does not match the algebroids")
    if f.source != A.chart or f.target != A2.chart:
        raise ValueError("base map does not match the algebroid charts")
    psi = as_matrix(A.chart, psi, (A2.fiber_dim, A.fiber_dim), "bundle map")
    q = omega.degree
    pulled = {J: f.pull(e) for J, e in omega.components.items()}
    comps = {}
    for I in combinations(range(A.fiber_dim), q):
        terms = []
        for J, w in pulled.items():
            if w is ZERO:
                continue
            minor = [[psi[j][i] for i in I] for j in J]
            terms.append(mul(w, determinant(minor)))
        comps[I] = sum_exprs(terms)
    return AlgebroidForm(A, q, comps)
