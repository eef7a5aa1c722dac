"""Tests for semisprays, admissible curves and tower sprays."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lietower.algebroid import tangent_algebroid, zero_anchor_algebroid
from lietower.checks import sample_box
from lietower.constructions import harmonic_oscillator_N, nijenhuis_algebroid
from lietower.dynamics import (DiscreteCurve, SprayCompatibilityError, admissibility_residual,
                               homogeneity_check, integrate, integrate_field, make_semispray,
                               total_chart, tower_semispray)
from lietower.fields import Chart, VectorField
from lietower.tower import identity_tower, nijenhuis_tower

from oracles import linear_flow

R1 = Chart(("x",))
R2 = Chart(("x1", "x2"))


def harmonic():
    return make_semispray(tangent_algebroid(R1), ["-x"])


def test_semispray_field_structure():
    S = harmonic()
    assert S.chart.names == ("x", "e1")
    pts = sample_box(2, 20, seed=0)
    assert np.array_equal(S(pts), np.column_stack([pts[:, 1], -pts[:, 0]]))


def test_zero_anchor_semispray_fixes_base():
    Z = zero_anchor_algebroid(R2, 2)
    S = make_semispray(Z, [0, 0])
    c = integrate(S, [0.3, -0.4], [1.0, 2.0], 1.0, 0.1)
    assert np.all(c.base == [0.3, -0.4]) and np.all(c.fiber == [1.0, 2.0])


def test_semispray_arity_and_name_clash():
    with pytest.raises(ValueError):
        make_semispray(tangent_algebroid(R2), ["0"])
    with pytest.raises(ValueError):
        total_chart(tangent_algebroid(Chart(("e1",))))


def test_harmonic_endpoint():
    c = integrate(harmonic(), [1.0], [0.0], math.pi / 2, 1e-3)
    base, fiber = c.end
    assert abs(c.t[-1] - math.pi / 2) <= 1e-15
    assert abs(base[0]) <= 1e-9 and abs(fiber[0] + 1) <= 1e-9


def test_geodesic_straight_line():
    S = make_semispray(tangent_algebroid(R2), [0, 0])
    c = integrate(S, [0, 0], [1, 2], 1.0, 0.1)
    assert np.allclose(c.end[0], [1, 2], rtol=0, atol=1e-14) and np.array_equal(c.end[1], [1, 2])


@pytest.mark.parametrize("step", [0.1, 0.02])
def test_linear_spray_matches_matrix_exponential(step):
    S = make_semispray(tangent_algebroid(R2), ["-2*x1 + 0.5*e2", "x1 - x2 - 0.1*e1"])
    M = [[0, 0, 1, 0], [0, 0, 0, 1], [-2, 0, 0, 0.5], [1, -1, -0.1, 0]]
    y0 = [0.5, -1.0, 0.2, 0.3]
    c = integrate(S, y0[:2], y0[2:], 3.0, step)
    ref = linear_flow(M, y0, 3.0)
    assert np.max(np.abs(np.concatenate(c.end) - ref)) <= 10 * step ** 4


def test_curve_table_and_times():
    c = integrate(harmonic(), [1.0], [0.0], 0.5, 0.1)
    table = c.to_table()
    assert table.shape == (6, 3) and np.allclose(table[:, 0], np.linspace(0, 0.5, 6))
    with pytest.raises(ValueError):
        DiscreteCurve(np.array([0.0, 0.0]), np.zeros((2, 1)), np.zeros((2, 1)), 0.1)


# ---------------------------------------------------------------------------
# admissibility


def test_integrated_curves_are_admissible():
    c = integrate(harmonic(), [1.0], [0.0], math.pi / 2, 1e-3)
    rep = admissibility_residual(tangent_algebroid(R1), c)
    assert rep.passed and rep.max_residual <= 1e-5 and rep.tol == pytest.approx(1e-5)


def test_hand_built_curves():
    T = tangent_algebroid(R2)
    t = np.linspace(0, 1, 11)
    base = np.column_stack([t, 0 * t])
    ok = DiscreteCurve(t, base, np.tile([1.0, 0.0], (11, 1)), 0.1)
    bad = DiscreteCurve(t, base, np.tile([2.0, 0.0], (11, 1)), 0.1)
    assert admissibility_residual(T, ok).max_residual == 0
    assert admissibility_residual(T, bad).max_residual == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        admissibility_residual(T, DiscreteCurve(t[:2], base[:2], base[:2], 0.1))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.05, 0.02, 0.01]))
def test_forward_direction_on_polynomial_sprays(seed, step):
    rng = np.random.default_rng(seed)
    A = nijenhuis_algebroid(harmonic_oscillator_N(1))
    from lietower.checks import random_polynomial
    xi = [random_polynomial(("x1", "y1", "e1", "e2"), rng, degree=2) for _ in range(2)]
    S = make_semispray(A, xi)
    x0, e0 = rng.uniform(-0.3, 0.3, 2), rng.uniform(-0.3, 0.3, 2)
    c = integrate(S, x0, e0, 0.5, step)
    assert admissibility_residual(A, c).max_residual <= 10 * step ** 2


def test_converse_counterexample():
    # base component 2e instead of rho e = e: not a semispray
    A = tangent_algebroid(R1)
    X = VectorField(total_chart(A), ("2*e1", "0"))
    c = integrate_field(X, 1, [0.0], [1.0], 1.0, 0.01)
    assert admissibility_residual(A, c).max_residual >= 0.99


# ---------------------------------------------------------------------------
# homogeneity


def test_homogeneity_examples():
    pts = sample_box(3, 50, seed=1)
    geo = make_semispray(tangent_algebroid(R2), [0, 0])
    assert homogeneity_check(geo, [2.0, -0.5, 3.0], sample_box(4, 50, seed=1)).passed
    assert not homogeneity_check(harmonic(), [2.0], sample_box(2, 50, seed=1)).passed
    quad = make_semispray(tangent_algebroid(R1), ["-e1^2"])
    assert homogeneity_check(quad, [2.0, -1.5], sample_box(2, 50, seed=1)).passed
    with pytest.raises(ValueError):
        homogeneity_check(quad, [0.0], pts[:, :2])


def test_harmonic_homogeneity_residual():
    rep = homogeneity_check(harmonic(), [2.0], [[1.0, 0.0]])
    # S(x, 2v) = (2v, -x) against (2v, -4x)
    assert rep.max_residual == 3.0


# ---------------------------------------------------------------------------
# tower sprays


def test_identity_tower_harmonic_sprays():
    T = identity_tower(2)
    L = tower_semispray(T, [make_semispray(A, ["-x1"]) for A in T.algebroids])
    curves = L.integrate([1.0], [0.0], 1.0, 0.01)
    assert L.coherence_residual(curves) == 0


def test_nijenhuis_tower_zero_sprays():
    T = nijenhuis_tower(2)
    L = tower_semispray(T, [make_semispray(A, [0] * A.fiber_dim) for A in T.algebroids])
    assert L.max_residual <= 1e-9


def test_nijenhuis_tower_perturbations():
    T = nijenhuis_tower(2)
    s1 = make_semispray(T.algebroid(1), [0, 0])
    tower_semispray(T, [s1, make_semispray(T.algebroid(2), [0, 0, 1, 0])])
    with pytest.raises(SprayCompatibilityError) as info:
        tower_semispray(T, [s1, make_semispray(T.algebroid(2), [1, 0, 0, 0])])
    assert (info.value.lower, info.value.upper) == (1, 2)


@pytest.mark.parametrize("step", [0.05, 0.01])
def test_coherent_limit_curves(step):
    T = nijenhuis_tower(3)
    xi = [["-x1", "-y1"], ["-x1", "-y1", "-x2 + e3*e4", "x1*y2"],
          ["-x1", "-y1", "-x2 + e3*e4", "x1*y2", "e5", "-x3"]]
    L = tower_semispray(T, [make_semispray(A, x) for A, x in zip(T.algebroids, xi)])
    curves = L.integrate([0.5, -0.2, 0.1, 0.3, -0.4, 0.2], [0.1, 0.2, -0.1, 0.3, 0.0, 0.1], 1.0, step)
    assert L.coherence_residual(curves) <= 10 * step ** 4
    for A, c in zip(T.algebroids, curves):
        assert admissibility_residual(A, c).passed
