"""Jets of scalar functions u(x, y): total derivatives, prolongation, contact forms.

Jet coordinates are ``x, y, u`` followed by ``u_J`` for symmetrised
multi-indices, written with the x's first (``u_xy`` stands for both
``u_xy`` and ``u_yx``). Within an order, names run from all-x to all-y.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .checks import CheckReport, sample_box, sup_norm
from .expr import (ONE, ZERO, Expr, Var, add, as_expr, diff, free_variables, mul, neg,
                   simplify, sub, substitute, sum_exprs)
from .fields import Chart, SmoothMap, VectorField, f_related, lie_bracket

__all__ = [
    "MAX_ORDER", "JetChart", "jet_name", "jet_multi_index", "total_derivative", "PDESystem1",
    "integrability_residual", "integrability_residual_total", "system_fields",
    "involutivity_check", "prolong", "prolong_bracket_check", "cartan_contact_forms",
    "pairing", "graph_map", "contact_on_graph_residual", "jet_projective_system",
    "prolongation_relatedness",
]

MAX_ORDER = 3
_BASE = ("x", "y", "u")


def jet_name(p: int, q: int) -> str:
    """Coordinate for the derivative of u taken p times in x and q times in y."""
    if p < 0 or q < 0:
        raise ValueError("negative derivative count")
    return "u" if p + q == 0 else "u_" + "x" * p + "y" * q


def jet_multi_index(name: str) -> tuple[int, int]:
    if name == "u":
        return (0, 0)
    if not name.startswith("u_") or set(name[2:]) - {"x", "y"} or name[2:] != "".join(sorted(name[2:])):
        raise ValueError(f"{name!r} is not a jet coordinate")
    return (name[2:].count("x"), name[2:].count("y"))


@lru_cache(maxsize=None)
def JetChart(n: int) -> Chart:
    """Coordinates of the order-n jet space; 2 + (n+1)(n+2)/2 of them."""
    if n < 0:
        raise ValueError("jet order must be >= 0")
    if n > MAX_ORDER + 1:
        raise ValueError(f"jet order {n} exceeds the cap {MAX_ORDER + 1}")
    names = ["x", "y"]
    for k in range(n + 1):
        names += [jet_name(k - q, q) for q in range(k + 1)]
    return Chart(tuple(names))


def _expr_order(e: Expr) -> int:
    order = 0
    for v in free_variables(e):
        if v in ("x", "y"):
            continue
        p, q = jet_multi_index(v)
        order = max(order, p + q)
    return order


def total_derivative(e, direction: str, order: int | None = None) -> Expr:
    """D_x or D_y of an expression over the order-n jet chart.

    D_x = d_x + sum_J u_{Jx} d_{u_J}; the result lives on order n + 1.
    ``order`` defaults to the highest jet order present in ``e``.
    """
    if direction not in ("x", "y"):
        raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")
    e = JetChart(MAX_ORDER if order is None else order).parse(e) if isinstance(e, str) else as_expr(e)
    n = _expr_order(e) if order is None else order
    terms = [diff(e, direction)]
    for k in range(n + 1):
        for q in range(k + 1):
            p = k - q
            up = (p + 1, q) if direction == "x" else (p, q + 1)
            terms.append(mul(Var(jet_name(*up)), diff(e, jet_name(p, q))))
    return simplify(sum_exprs(terms))


def _total_multi(e: Expr, p: int, q: int) -> Expr:
    for _ in range(p):
        e = total_derivative(e, "x")
    for _ in range(q):
        e = total_derivative(e, "y")
    return e


@dataclass(frozen=True, eq=False)
class PDESystem1:
    """u_x = phi(x, y, u), u_y = psi(x, y, u)."""

    phi: Expr
    psi: Expr

    def __post_init__(self):
        chart = JetChart(0)
        for attr in ("phi", "psi"):
            value = getattr(self, attr)
            e = chart.parse(value) if isinstance(value, str) else as_expr(value)
            object.__setattr__(self, attr, chart.check_expr(e, attr))


def integrability_residual(S: PDESystem1) -> Expr:
    """psi_x + phi psi_u - phi_y - psi phi_u."""
    return simplify(sum_exprs([diff(S.psi, "x"), mul(S.phi, diff(S.psi, "u")),
                               neg(diff(S.phi, "y")), neg(mul(S.psi, diff(S.phi, "u")))]))


def integrability_residual_total(S: PDESystem1) -> Expr:
    """D_x psi - D_y phi with u_x, u_y replaced by phi, psi."""
    raw = sub(total_derivative(S.psi, "x", 0), total_derivative(S.phi, "y", 0))
    return simplify(substitute(raw, {"u_x": S.phi, "u_y": S.psi}))


def system_fields(S: PDESystem1) -> tuple[VectorField, VectorField]:
    """X = d_x + phi d_u and Y = d_y + psi d_u."""
    chart = JetChart(0)
    return (VectorField(chart, (ONE, ZERO, S.phi)), VectorField(chart, (ZERO, ONE, S.psi)))


def involutivity_check(S: PDESystem1, samples, tol: float = 1e-12) -> CheckReport:
    """Residual of [X, Y] at the samples.

    ``extra["agreement"]`` is the worst gap between the bracket's d_u
    component and the integrability expression, and ``extra["transverse"]``
    the largest x/y component of the bracket; both should be 0.
    """
    chart = JetChart(0)
    pts = chart.point(np.atleast_2d(samples))
    X, Y = system_fields(S)
    br = lie_bracket(X, Y)
    vals = br(pts)
    ci = SmoothMap(chart, Chart(("ci",)), (integrability_residual(S),))(pts)[:, 0]
    extra = {"agreement": float(np.max(np.abs(vals[:, 2] - ci))),
             "transverse": float(np.max(np.abs(vals[:, :2])))}
    return CheckReport("involutivity", pts, sup_norm(vals), tol, extra)


def _check_projectable(V: VectorField):
    if V.chart != JetChart(0):
        raise ValueError(f"expected a field on (x, y, u), got chart {V.chart.names}")
    a, b, _ = V.components
    if "u" in free_variables(a) or "u" in free_variables(b):
        raise ValueError("field is not projectable: its x and y components depend on u")


def prolong(V: VectorField, n: int) -> VectorField:
    """n-th prolongation of a d_x + b d_y + c d_u with a, b free of u.

    Coefficients follow the recursion phi^{J,i} = D_i phi^J - (D_i a) u_{J x}
    - (D_i b) u_{J y} starting from phi^() = c.
    """
    _check_projectable(V)
    if n < 0 or n > MAX_ORDER:
        raise ValueError(f"prolongation order must be in 0..{MAX_ORDER}")
    a, b, c = V.components
    chart = JetChart(n)
    coef = {(0, 0): c}
    Da = {"x": diff(a, "x"), "y": diff(a, "y")}
    Db = {"x": diff(b, "x"), "y": diff(b, "y")}
    for k in range(1, n + 1):
        for q in range(k + 1):
            p = k - q
            # extend from a parent index, preferring the x-direction
            if p > 0:
                parent, d = (p - 1, q), "x"
            else:
                parent, d = (p, q - 1), "y"
            pp, pq = parent
            coef[(p, q)] = simplify(sum_exprs([
                total_derivative(coef[parent], d, k - 1),
                neg(mul(Da[d], Var(jet_name(pp + 1, pq)))),
                neg(mul(Db[d], Var(jet_name(pp, pq + 1)))),
            ]))
    comps = [a, b] + [coef[jet_multi_index(name)] for name in chart.names[2:]]
    return VectorField(chart, tuple(comps))


def characteristic_coefficients(V: VectorField, n: int) -> tuple[Expr, ...]:
    """Prolongation components from D_J Q + a u_{Jx} + b u_{Jy}, Q = c - a u_x - b u_y.

    An independent route to :func:`prolong`. The expressions mention order
    n + 1 coordinates that cancel only numerically, so evaluate them on
    ``JetChart(n + 1)``; the order follows ``JetChart(n).names``.
    """
    _check_projectable(V)
    a, b, c = V.components
    Q = sum_exprs([c, neg(mul(a, Var("u_x"))), neg(mul(b, Var("u_y")))])
    comps = [a, b]
    for name in JetChart(n).names[2:]:
        p, q = jet_multi_index(name)
        comps.append(sum_exprs([_total_multi(Q, p, q),
                                mul(a, Var(jet_name(p + 1, q))),
                                mul(b, Var(jet_name(p, q + 1)))]))
    return tuple(comps)


__all__.append("characteristic_coefficients")


def prolong_bracket_check(V: VectorField, W: VectorField, n: int, samples,
                          tol: float = 1e-9) -> CheckReport:
    """pr(n)[V, W] - [pr(n) V, pr(n) W] at jet-chart samples.

    ``samples`` is an array of points or a count of seeded points in [-1, 1].
    """
    chart = JetChart(n)
    if isinstance(samples, (int, np.integer)):
        pts = sample_box(chart.dim, int(samples), seed=0)
    else:
        pts = chart.point(np.atleast_2d(samples))
    lhs = prolong(lie_bracket(V, W), n)
    rhs = lie_bracket(prolong(V, n), prolong(W, n))
    return CheckReport("prolongation bracket", pts, sup_norm(lhs(pts) - rhs(pts)), tol)


def cartan_contact_forms(n: int) -> list[tuple[str, tuple[Expr, ...]]]:
    """theta_J = du_J - u_{Jx} dx - u_{Jy} dy for |J| <= n - 1 on JetChart(n).

    Each form is returned as (u_J name, coefficient vector over the chart).
    """
    if n < 1:
        raise ValueError("contact forms need jet order >= 1")
    chart = JetChart(n)
    out = []
    for name in chart.names[2:]:
        p, q = jet_multi_index(name)
        if p + q > n - 1:
            continue
        coeffs = {"x": neg(Var(jet_name(p + 1, q))), "y": neg(Var(jet_name(p, q + 1))), name: ONE}
        out.append((name, tuple(coeffs.get(c, ZERO) for c in chart.names)))
    return out


def pairing(form: Sequence[Expr], V: VectorField) -> Expr:
    """<form, V> for a coefficient vector over V's chart."""
    if len(form) != V.chart.dim:
        raise ValueError("form and field live on different charts")
    return simplify(sum_exprs(mul(w, c) for w, c in zip(form, V.components)))


def graph_map(u, n: int) -> SmoothMap:
    """(x, y) -> j^n u(x, y) for a function u of x and y."""
    plane = Chart(("x", "y"))
    u = plane.parse(u) if isinstance(u, str) else plane.check_expr(as_expr(u), "graph function")
    chart = JetChart(n)
    comps = [Var("x"), Var("y")]
    for name in chart.names[2:]:
        p, q = jet_multi_index(name)
        e = u
        for _ in range(p):
            e = diff(e, "x")
        for _ in range(q):
            e = diff(e, "y")
        comps.append(simplify(e))
    return SmoothMap(plane, chart, tuple(comps))


def contact_on_graph_residual(u, n: int, samples, tol: float = 1e-9) -> CheckReport:
    """Contact forms pulled back along the jet graph of u; they should vanish."""
    G = graph_map(u, n)
    pts = G.source.point(np.atleast_2d(samples))
    J = G.jacobian(pts)              # (k, dim jet, 2)
    images = G(pts)
    forms = cartan_contact_forms(n)
    fn = SmoothMap(G.target, Chart(tuple(f"w{k}" for k in range(len(forms) * G.target.dim))),
                   tuple(c for _, coeffs in forms for c in coeffs))
    W = fn(images).reshape(len(pts), len(forms), G.target.dim)
    vals = np.einsum("kfi,kid->kfd", W, J).reshape(len(pts), -1)
    return CheckReport("contact on graph", pts, sup_norm(vals), tol)


def jet_projective_system(n: int):
    """Orders 0..n with truncation projections, as a projective system."""
    from .tower import ProjectiveSystem

    charts = [JetChart(k) for k in range(n + 1)]
    bonds = [SmoothMap.projection(charts[k + 1], charts[k]) for k in range(n)]
    return ProjectiveSystem(charts, bonds)


def prolongation_relatedness(V: VectorField, n: int, samples: int = 50,
                             tol: float = 1e-9) -> CheckReport:
    """pr(j) V is related to pr(i) V by every truncation j -> i, i < j <= n."""
    from .checks import merge_reports

    system = jet_projective_system(n)
    reports = []
    fields = [prolong(V, k) for k in range(n + 1)]
    top = JetChart(n)
    pts = sample_box(top.dim, samples, seed=0)
    for j in range(1, n + 1):
        pj = pts[:, :JetChart(j).dim]
        for i in range(j):
            reports.append(f_related(system.composite(i, j), fields[j], fields[i], pj, tol,
                                     name=f"truncation {j}->{i}"))
    if not reports:
        return CheckReport("prolongation relatedness", pts, np.zeros(len(pts)), tol)
    return merge_reports("prolongation relatedness", reports, tol)
