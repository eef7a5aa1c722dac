"""Tests for charts, vector fields, smooth maps, brackets and flows."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lietower.checks import sample_box
from lietower.fields import (Chart, FlowError, SmoothMap, VectorField, coordinate_field, f_related,
                             flow, jacobian, lie_bracket, zero_field)

from oracles import linear_flow

R2 = Chart(("x1", "x2"))
R3 = Chart(("x1", "x2", "x3"))
R4 = Chart.euclidean(4)
PTS2 = sample_box(2, 50, seed=1)


def _poly_field(chart, rng):
    from lietower.checks import random_polynomial
    return VectorField(chart, [random_polynomial(chart.names, rng) for _ in chart.names])


def test_chart_rejects_duplicates_and_empty():
    with pytest.raises(ValueError):
        Chart(("x", "x"))
    with pytest.raises(ValueError):
        Chart(())


def test_field_rejects_foreign_variables():
    with pytest.raises(ValueError):
        VectorField(R2, ("x1", "x3"))


def test_bracket_of_coordinate_fields_vanishes():
    br = lie_bracket(coordinate_field(R2, 0), coordinate_field(R2, 1))
    assert np.all(br(PTS2) == 0)


def test_bracket_hand_example():
    br = lie_bracket(VectorField(R2, ("x2", "0")), VectorField(R2, ("0", "1")))
    assert np.allclose(br(PTS2), [-1.0, 0.0], atol=0)


def test_rotation_commutes_with_dilation():
    br = lie_bracket(VectorField(R2, ("-x2", "x1")), VectorField(R2, ("x1", "x2")))
    assert np.max(np.abs(br(PTS2))) == 0


def test_bracket_chart_mismatch():
    with pytest.raises(ValueError):
        lie_bracket(coordinate_field(R2, 0), coordinate_field(R3, 0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_bracket_antisymmetry_and_jacobi(seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = (_poly_field(R2, rng) for _ in range(3))
    anti = lie_bracket(X, Y)(PTS2) + lie_bracket(Y, X)(PTS2)
    assert np.max(np.abs(anti)) <= 1e-12
    cyc = (lie_bracket(lie_bracket(X, Y), Z)(PTS2) + lie_bracket(lie_bracket(Y, Z), X)(PTS2)
           + lie_bracket(lie_bracket(Z, X), Y)(PTS2))
    assert np.max(np.abs(cyc)) <= 1e-9


def test_jacobian_examples():
    assert np.array_equal(jacobian(SmoothMap.identity(R3), [0.1, 0.2, 0.3]), np.eye(3))
    F = SmoothMap(R2, Chart(("y",)), ("x1*x2",))
    assert np.array_equal(jacobian(F, [2.0, 3.0]), [[3.0, 2.0]])
    P = SmoothMap.projection(R4, Chart.euclidean(2))
    assert np.array_equal(jacobian(P, [1.0, 2.0, 3.0, 4.0]), np.eye(2, 4))


def test_f_related_examples():
    pts = sample_box(4, 30, seed=2)
    ident = SmoothMap.identity(R4)
    X = VectorField(R4, ("x2", "x1*x3", "1", "x4^2"))
    assert f_related(ident, X, X, pts).max_residual == 0
    P = SmoothMap.projection(R4, Chart(("x1", "x2")))
    ok = f_related(P, VectorField(R4, ("x1", "x2", "0", "0")), VectorField(P.target, ("x1", "x2")), pts)
    assert ok.passed and ok.max_residual == 0
    bad = f_related(P, VectorField(R4, ("x3", "x4", "0", "0")), VectorField(P.target, ("x1", "x2")), pts)
    assert not bad.passed and bad.max_residual > 0.1


def test_relatedness_passes_to_brackets():
    pts = sample_box(4, 30, seed=3)
    P = SmoothMap.projection(R4, Chart(("x1", "x2")))
    T = P.target
    X1, Y1 = VectorField(R4, ("x2", "x1^2", "x3", "0")), VectorField(T, ("x2", "x1^2"))
    X2, Y2 = VectorField(R4, ("1", "x1*x2", "x4", "x1")), VectorField(T, ("1", "x1*x2"))
    assert f_related(P, X1, Y1, pts).max_residual == 0
    assert f_related(P, X2, Y2, pts).max_residual == 0
    assert f_related(P, lie_bracket(X1, X2), lie_bracket(Y1, Y2), pts).max_residual <= 1e-9


def test_compose_and_pull():
    F = SmoothMap(R2, R2, ("x1 + x2", "x1*x2"))
    G = SmoothMap(R2, Chart(("y",)), ("x1^2 - x2",))
    H = G.compose(F)
    p = np.array([0.3, -0.7])
    assert H(p) == pytest.approx(G(F(p)), abs=1e-15)


# ---------------------------------------------------------------------------
# flows


def test_zero_field_flow_is_constant():
    curve = flow(zero_field(R2), [0.4, -0.2], 1.0, 0.1)
    assert all(np.array_equal(p, [0.4, -0.2]) for _, p in curve)


def test_rotation_flow_quarter_turn():
    curve = flow(VectorField(R2, ("-x2", "x1")), [1.0, 0.0], math.pi / 2, 1e-3)
    t, end = curve[-1]
    assert t == pytest.approx(math.pi / 2, abs=1e-15)
    assert np.max(np.abs(end - [0.0, 1.0])) <= 1e-9


def test_rotation_flow_semigroup():
    X = VectorField(R2, ("-x2", "x1"))
    s, t = 0.7, 1.1
    _, mid = flow(X, [1.0, 0.5], s, 1e-3)[-1]
    _, two_step = flow(X, mid, t, 1e-3)[-1]
    _, direct = flow(X, [1.0, 0.5], s + t, 1e-3)[-1]
    assert np.max(np.abs(two_step - direct)) <= 1e-8


@pytest.mark.parametrize("step", [0.1, 0.05])
def test_linear_flow_matches_matrix_exponential(step):
    M = [[0.2, -1.0, 0.0], [1.0, 0.1, 0.3], [0.0, -0.4, -0.5]]
    X = VectorField(R3, ["0.2*x1 - x2", "x1 + 0.1*x2 + 0.3*x3", "-0.4*x2 - 0.5*x3"])
    _, end = flow(X, [1.0, 0.0, -1.0], 2.0, step)[-1]
    err = np.max(np.abs(end - linear_flow(M, [1.0, 0.0, -1.0], 2.0)))
    assert err <= 10 * step ** 4


def test_flow_blow_up_reports_partial_curve():
    X = VectorField(Chart(("x",)), ("x^2",))
    with pytest.raises(FlowError) as info:
        flow(X, [1.0], 5.0, 0.01)
    assert len(info.value.curve) > 10 and 0.9 < info.value.t < 1.1


def test_flow_rejects_bad_step():
    with pytest.raises(ValueError):
        flow(zero_field(R2), [0, 0], 1.0, 0.0)
