"""Tests for the concrete algebroids and the Nijenhuis torsion."""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lietower.algebroid import StructureFunctions, verify_anchor_homomorphism, verify_leibniz
from lietower.checks import random_polynomial, sample_box
from lietower.constructions import (ConstructionError, NijenhuisTensor, PoissonTensor,
                                    action_algebroid, canonical_poisson, distribution_algebroid,
                                    harmonic_oscillator_N, jacobi_residual, lie_derivative_1form,
                                    nijenhuis_algebroid, nijenhuis_torsion,
                                    poisson_cotangent_algebroid)
from lietower.calculus import AlgebroidForm, lie_derivative
from lietower.algebroid import tangent_algebroid
from lietower.expr import compile_exprs, parse
from lietower.fields import Chart, VectorField, coordinate_field, lie_bracket

from exact import exact_matrix
from oracles import gradient, lambdify, poisson_bracket, random_sympy_poly

R1 = Chart(("x",))
R2 = Chart(("x1", "x2"))
R3 = Chart(("x1", "x2", "x3"))


def _field(chart, rng):
    return VectorField(chart, [random_polynomial(chart.names, rng) for _ in chart.names])


# ---------------------------------------------------------------------------
# Nijenhuis


def test_identity_torsion_vanishes():
    N = NijenhuisTensor(R2, [[1, 0], [0, 1]])
    T = nijenhuis_torsion(N, VectorField(R2, ("x1*x2", "x2^2")), VectorField(R2, ("1", "x1")))
    assert np.all(T(sample_box(2, 20, seed=0)) == 0)


def test_non_nijenhuis_witness():
    N = NijenhuisTensor(R2, [["x2", 0], [0, 0]])
    T = nijenhuis_torsion(N, coordinate_field(R2, 0), coordinate_field(R2, 1))
    assert np.array_equal(T([1.0, 3.0]), [3.0, 0.0])
    pts = sample_box(2, 20, seed=1)
    assert np.array_equal(T(pts), np.column_stack([pts[:, 1], np.zeros(20)]))


@pytest.mark.parametrize("level", [1, 2, 3])
def test_oscillator_torsion_vanishes(level):
    N = harmonic_oscillator_N(level)
    rng = np.random.default_rng(level)
    pts = sample_box(N.chart.dim, 100, seed=level)
    for _ in range(3):
        T = nijenhuis_torsion(N, _field(N.chart, rng), _field(N.chart, rng))
        assert np.max(np.abs(T(pts))) <= 1e-9


def test_oscillator_values():
    assert np.array_equal(harmonic_oscillator_N(1).at([1.0, 2.0])[0], 5 * np.eye(2))
    assert np.array_equal(harmonic_oscillator_N(2).at([1.0, 0.0, 0.0, 1.0])[0], np.eye(4))
    assert np.array_equal(harmonic_oscillator_N(1).at([0.0, 0.0])[0], np.zeros((2, 2)))
    with pytest.raises(ValueError):
        harmonic_oscillator_N(0)


def test_oscillator_bracket_of_coordinate_fields():
    A = nijenhuis_algebroid(harmonic_oscillator_N(1))
    pts = sample_box(2, 20, seed=2)
    br = A.bracket(A.frame[0], A.frame[1])(pts)
    assert np.array_equal(br, np.column_stack([-2 * pts[:, 1], 2 * pts[:, 0]]))


def test_zero_tensor_gives_abelian_algebroid():
    A = nijenhuis_algebroid(NijenhuisTensor(R2, [[0, 0], [0, 0]]))
    s1, s2 = A.section(["x1*x2", "x1"]), A.section(["x2^3", "1"])
    assert np.all(A.bracket(s1, s2)(sample_box(2, 10, seed=0)) == 0)


def test_identity_tensor_bracket_is_lie_bracket():
    A = nijenhuis_algebroid(NijenhuisTensor(R2, [[1, 0], [0, 1]]))
    X, Y = VectorField(R2, ("x1*x2", "x2^2")), VectorField(R2, ("x1", "x1^3"))
    pts = sample_box(2, 20, seed=3)
    got = A.bracket(A.section(X.components), A.section(Y.components))(pts)
    assert np.max(np.abs(got - lie_bracket(X, Y)(pts))) <= 1e-12


def test_oscillator_commutes_with_projection_exactly():
    """N_1 Tdelta = Tdelta N_2 = [r1 I | 0], checked in exact rational arithmetic."""
    N1, N2 = harmonic_oscillator_N(1), harmonic_oscillator_N(2)
    rng = np.random.default_rng(11)
    Td = [[Fraction(int(i == j)) for j in range(4)] for i in range(2)]

    def exact(N, point):
        return exact_matrix(N.matrix, N.chart.names, point)

    for _ in range(20):
        p = [Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 8))) for _ in range(4)]
        a = exact(N1, p[:2])
        b = exact(N2, p)
        left = [[sum(a[i][k] * Td[k][j] for k in range(2)) for j in range(4)] for i in range(2)]
        right = [[sum(Td[i][k] * b[k][j] for k in range(4)) for j in range(4)] for i in range(2)]
        r1 = p[0] ** 2 + p[1] ** 2
        assert left == right == [[r1 * Td[i][j] for j in range(4)] for i in range(2)]
    assert exact(N1, [Fraction(1), Fraction(2)]) == [[5, 0], [0, 5]]


def _torsion_and_anchor(N, X, Y, pts):
    tors = np.max(np.abs(nijenhuis_torsion(N, X, Y)(pts)))
    A = nijenhuis_algebroid(N)
    anch = verify_anchor_homomorphism(A, A.section(X.components), A.section(Y.components), pts).max_residual
    return tors, anch


def test_torsion_equivalent_to_anchor_homomorphism():
    pts = sample_box(2, 50, seed=9)
    rng = np.random.default_rng(9)
    tensors = [harmonic_oscillator_N(1), NijenhuisTensor(R2, [["x2", 0], [0, 0]]),
               NijenhuisTensor(R2, [["x1", "x2"], ["1", "x1*x2"]])]
    for N in tensors:
        for _ in range(3):
            X, Y = _field(N.chart, rng), _field(N.chart, rng)
            t, a = _torsion_and_anchor(N, X, Y, pts)
            assert (t <= 1e-9) == (a <= 1e-9)
    t, a = _torsion_and_anchor(tensors[1], coordinate_field(R2, 0), coordinate_field(R2, 1), pts)
    assert t > 0.5 and a > 0.5


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_torsion_antisymmetric_and_tensorial(seed):
    rng = np.random.default_rng(seed)
    N = NijenhuisTensor(R2, [["x1*x2", "x2"], ["1", "x1^2"]])
    X, Y = _field(R2, rng), _field(R2, rng)
    g = random_polynomial(R2.names, rng)
    pts = sample_box(2, 30, seed=seed % 997)
    TXY = nijenhuis_torsion(N, X, Y)(pts)
    assert np.max(np.abs(TXY + nijenhuis_torsion(N, Y, X)(pts))) <= 1e-9
    gX = VectorField(R2, [g * c for c in X.components])
    gvals = compile_exprs([g], R2.names)(pts)
    assert np.max(np.abs(nijenhuis_torsion(N, gX, Y)(pts) - gvals * TXY)) <= 1e-9 * (1 + np.max(np.abs(TXY)))


# ---------------------------------------------------------------------------
# distributions and actions


def test_coordinate_plane_distribution():
    A = distribution_algebroid([coordinate_field(R3, 0), coordinate_field(R3, 1)], StructureFunctions.zero(2))
    assert A.fiber_dim == 2


def test_contact_distribution_rejected():
    with pytest.raises(ConstructionError) as info:
        distribution_algebroid([coordinate_field(R3, 0), VectorField(R3, ("0", "1", "x1"))],
                               StructureFunctions.zero(2))
    assert info.value.report.max_residual == 1.0


def test_scaling_distribution_structure_sign():
    frame = [VectorField(R1, ("x",)), VectorField(R1, ("1",))]
    distribution_algebroid(frame, StructureFunctions.antisymmetric(2, {(1, 0, 1): -1.0}))
    with pytest.raises(ConstructionError):
        distribution_algebroid(frame, StructureFunctions.antisymmetric(2, {(1, 0, 1): 1.0}))


def test_translation_action():
    action_algebroid(R2, [coordinate_field(R2, 0), coordinate_field(R2, 1)], StructureFunctions.zero(2))


def test_affine_action_sign():
    gens = [VectorField(R1, ("1",)), VectorField(R1, ("x",))]
    A = action_algebroid(R1, gens, StructureFunctions.antisymmetric(2, {(0, 0, 1): 1.0}))
    pts = sample_box(1, 100, seed=0)
    s = [A.section(["x", "x^2"]), A.section(["1", "x"]), A.section(["x^3", "2"])]
    assert verify_anchor_homomorphism(A, s[0], s[1], pts, 1e-12).passed
    assert jacobi_residual(A, *s, pts, 1e-9).passed
    with pytest.raises(ConstructionError):
        action_algebroid(R1, gens, StructureFunctions.antisymmetric(2, {(0, 0, 1): -1.0}))


def test_non_realising_generators_rejected():
    with pytest.raises(ConstructionError):
        action_algebroid(R1, [VectorField(R1, ("1",)), VectorField(R1, ("x^2",))], StructureFunctions.zero(2))


def test_action_needs_constant_structure():
    with pytest.raises(ValueError):
        action_algebroid(R1, [VectorField(R1, ("1",)), VectorField(R1, ("x",))],
                         StructureFunctions.antisymmetric(2, {(0, 0, 1): "x"}, R1))


# ---------------------------------------------------------------------------
# Poisson


def test_poisson_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        PoissonTensor(R2, [[0, 1], [1, 0]])


def test_zero_poisson_bracket_vanishes():
    A = poisson_cotangent_algebroid(PoissonTensor(R2, [[0, 0], [0, 0]]))
    assert np.all(A.bracket(A.section(["x1", "x2^2"]), A.section(["x2", "1"]))(sample_box(2, 10)) == 0)


def test_poisson_constant_covectors_commute():
    A = poisson_cotangent_algebroid(canonical_poisson(1))
    br = A.bracket(A.section([1, 0]), A.section([0, 1]))
    assert np.all(br(sample_box(2, 10)) == 0)


def test_poisson_bracket_of_differentials_matches_function_bracket():
    import sympy as sp
    A = poisson_cotangent_algebroid(canonical_poisson(1))
    names = A.chart.names
    x1, x2 = sp.symbols(names)
    f, g = x1 ** 2 / 2, x2
    df, dg = gradient(f, names), gradient(g, names)
    got = A.bracket(A.section([_str(c) for c in df]), A.section([_str(c) for c in dg]))
    P = [[0, 1], [-1, 0]]
    ref = gradient(poisson_bracket(f, g, P, names), names)
    pts = sample_box(2, 30, seed=4)
    assert np.max(np.abs(got(pts) - lambdify(ref, names)(pts))) <= 1e-12
    assert np.array_equal(got(pts), np.tile([1.0, 0.0], (30, 1)))


def _str(e):
    return str(e).replace("**", "^")


@pytest.mark.parametrize("seed", range(5))
def test_poisson_function_bracket_oracle(seed):
    import sympy as sp
    A = poisson_cotangent_algebroid(canonical_poisson(2))
    names = A.chart.names
    rng = np.random.default_rng(seed)
    f, g = random_sympy_poly(names, rng, degree=3), random_sympy_poly(names, rng, degree=3)
    got = A.bracket(A.section([_str(c) for c in gradient(f, names)]),
                    A.section([_str(c) for c in gradient(g, names)]))
    P = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    ref = gradient(poisson_bracket(f, g, P, names), names)
    pts = sample_box(4, 100, seed=seed)
    assert np.max(np.abs(got(pts) - lambdify(ref, names)(pts))) <= 1e-9


def test_poisson_anchor_orientation():
    """With anchor P^T the axioms hold; the transposed anchor breaks them."""
    from lietower.algebroid import Algebroid
    A = poisson_cotangent_algebroid(canonical_poisson(1))
    pts = sample_box(2, 50, seed=6)
    s1, s2 = A.section(["x1", "x2^2"]), A.section(["x1*x2", "1"])
    assert verify_anchor_homomorphism(A, s1, s2, pts, 1e-12).passed
    flipped = Algebroid(A.chart, 2, [[A.anchor[j][i] for j in range(2)] for i in range(2)], A._rule)
    bad = verify_anchor_homomorphism(flipped, flipped.section(s1.components), flipped.section(s2.components), pts)
    assert bad.max_residual > 1.0


def test_classical_lie_derivative_matches_module_calculus():
    T = tangent_algebroid(R2)
    X = VectorField(R2, ("x1*x2", "x2^2 + 1"))
    alpha = [parse("x1^2", R2.names), parse("x1*x2", R2.names)]
    classical = lie_derivative_1form(X, alpha)
    module = lie_derivative(T, T.section(X.components), AlgebroidForm(T, 1, alpha))
    pts = sample_box(2, 30, seed=7)
    assert np.max(np.abs(compile_exprs(list(classical), R2.names)(pts) - module.evaluate(pts))) <= 1e-12


# ---------------------------------------------------------------------------
# Jacobi across constructions


@pytest.mark.parametrize("kind", ["tangent", "oscillator", "poisson"])
def test_jacobi_on_constructions(kind):
    rng = np.random.default_rng(3)
    if kind == "tangent":
        A = tangent_algebroid(R2)
    elif kind == "oscillator":
        A = nijenhuis_algebroid(harmonic_oscillator_N(2))
    else:
        A = poisson_cotangent_algebroid(canonical_poisson(2))
    pts = sample_box(A.chart.dim, 100, seed=3)
    s = [A.section([random_polynomial(A.chart.names, rng, degree=1) for _ in range(A.fiber_dim)])
         for _ in range(3)]
    assert jacobi_residual(A, *s, pts, 1e-9).passed
    assert verify_leibniz(A, s[0], s[1], "x1*x1 + 1", pts).passed
