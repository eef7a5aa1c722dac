"""Tests for the expression engine: parsing, printing, diff, simplify, evaluation."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lietower.expr import (Add, Const, EvaluationError, ExprSyntaxError, Mul, Pow, Sin,
                           UnknownIdentifierError, Var, compile_exprs, cos, diff, div, evaluate,
                           evaluate_many, exp, free_variables, parse, power, simplify, sin,
                           substitute, sum_exprs, to_string, var)

from oracles import central_difference

COORDS = ("x1", "y1", "z")


# expression strategy: smooth everywhere (denominators bounded away from 0)
def _smooth_exprs():
    leaves = st.one_of(
        st.sampled_from(COORDS).map(Var),
        st.integers(-3, 3).map(lambda k: Const(float(k))),
        st.sampled_from([0.5, -1.25, 2.0]).map(Const),
    )

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda t: t[0] + t[1]),
            st.tuples(children, children).map(lambda t: t[0] - t[1]),
            st.tuples(children, children).map(lambda t: t[0] * t[1]),
            st.tuples(children, children).map(lambda t: div(t[0], Const(2.0) + sin(t[1]))),
            st.tuples(children, st.integers(0, 3)).map(lambda t: power(t[0], t[1])),
            children.map(sin), children.map(cos),
            children.map(lambda c: exp(sin(c))),
            children.map(lambda c: -c),
        )
    return st.recursive(leaves, extend, max_leaves=8)


points = st.tuples(*[st.floats(-1.5, 1.5) for _ in COORDS]).map(lambda t: dict(zip(COORDS, t)))


# ---------------------------------------------------------------------------
# parse


def test_parse_sum_of_squares_structure():
    e = parse("x1^2 + y1^2", ("x1", "y1"))
    assert isinstance(e, Add)
    assert e.left == Pow(Var("x1"), 2) and e.right == Pow(Var("y1"), 2)


def test_parse_product_structure():
    e = parse("sin(x1)*y1", ("x1", "y1"))
    assert isinstance(e, Mul) and e.left == Sin(Var("x1")) and e.right == Var("y1")


def test_parse_incomplete_input_reports_end_position():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x1 +", ("x1",))
    assert info.value.position == 4
    assert "end of input" in str(info.value)


def test_parse_unknown_identifier_names_offender():
    with pytest.raises(UnknownIdentifierError) as info:
        parse("x1 + w", ("x1",))
    assert info.value.name == "w" and info.value.position == 5


@pytest.mark.parametrize("text", ["(x1", "x1 x1", "x1 ^ y1", "sin x1", "2 ** x1", ")"])
def test_parse_rejects_malformed(text):
    with pytest.raises(ExprSyntaxError):
        parse(text, ("x1", "y1"))


def test_power_binds_tighter_than_unary_minus():
    assert evaluate(parse("-x1^2", ("x1",)), {"x1": 3.0}) == -9.0


def test_negative_integer_exponents():
    e = parse("x1^(-2) + x1^-1", ("x1",))
    assert evaluate(e, {"x1": 2.0}) == pytest.approx(0.75)


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_examples():
    e = parse("x1^2 + y1^2", ("x1", "y1"))
    assert evaluate(e, {"x1": 1.0, "y1": 2.0}) == 5.0
    assert evaluate(parse("sin(x1)", ("x1",)), {"x1": 0.0}) == 0.0


def test_division_by_zero_carries_subexpression():
    e = parse("1/x1", ("x1",))
    with pytest.raises(EvaluationError) as info:
        evaluate(e, {"x1": 0.0})
    assert info.value.subexpr == e


def test_missing_variable_is_an_error():
    with pytest.raises(Exception):
        evaluate(parse("x1 + y1", ("x1", "y1")), {"x1": 1.0})


def test_evaluate_many_matches_evaluate():
    exprs = [parse(t, COORDS) for t in ("x1*y1", "sin(x1*y1) + z", "x1*y1 - z^2")]
    pt = {"x1": 0.3, "y1": -1.2, "z": 0.7}
    assert evaluate_many(exprs, pt) == [evaluate(e, pt) for e in exprs]


@settings(max_examples=60, deadline=None)
@given(_smooth_exprs(), points)
def test_compiled_matches_tree_evaluation(e, pt):
    fn = compile_exprs([e], COORDS)
    value = fn(np.array([pt[c] for c in COORDS]))[0]
    assert value == pytest.approx(evaluate(e, pt), rel=1e-12, abs=1e-12)


def test_compiled_vectorised_shape():
    fn = compile_exprs([parse("x1 + 1", COORDS), Const(2.0)], COORDS)
    out = fn(np.zeros((4, 3)))
    assert out.shape == (4, 2) and np.all(out[:, 1] == 2.0)


# ---------------------------------------------------------------------------
# diff


def test_diff_examples():
    c = ("x1", "y1")
    assert evaluate(diff(parse("x1^2 + y1^2", c), "x1"), {"x1": 3.0, "y1": 0.0}) == 6.0
    assert diff(parse("sin(x1)", c), "x1") == cos(var("x1"))
    assert diff(var("x1"), "y1") == Const(0.0)


@settings(max_examples=100, deadline=None)
@given(_smooth_exprs(), points, st.sampled_from(COORDS))
def test_diff_matches_central_differences(e, pt, v):
    d = evaluate(diff(e, v), pt)
    k = COORDS.index(v)

    def f(p):
        return evaluate(e, dict(zip(COORDS, p)))
    fd = central_difference(f, [pt[c] for c in COORDS], k)
    assert abs(d - fd) <= 1e-5 * (1 + abs(d))


def test_diff_of_exp_and_quotient():
    e = parse("exp(x1) / (1 + x1^2)", ("x1",))
    d = diff(e, "x1")
    x = 0.4
    exact = math.exp(x) / (1 + x * x) - 2 * x * math.exp(x) / (1 + x * x) ** 2
    assert evaluate(d, {"x1": x}) == pytest.approx(exact, rel=1e-14)


# ---------------------------------------------------------------------------
# simplify and printing


def test_simplify_examples():
    c = ("x1", "y1")
    assert simplify(parse("0*x1 + y1", c)) == Var("y1")
    assert simplify(parse("x1^1", c)) == Var("x1")
    assert simplify(parse("2*3", c)) == Const(6.0)


@settings(max_examples=100, deadline=None)
@given(_smooth_exprs())
def test_simplify_idempotent(e):
    s = simplify(e)
    assert simplify(s) is s


@settings(max_examples=100, deadline=None)
@given(_smooth_exprs(), points)
def test_simplify_preserves_value(e, pt):
    assert evaluate(simplify(e), pt) == pytest.approx(evaluate(e, pt), rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(_smooth_exprs(), points)
def test_print_parse_round_trip_is_exact(e, pt):
    back = parse(to_string(e), COORDS)
    assert evaluate(back, pt) == evaluate(e, pt)


def test_negative_constants_print_parenthesised():
    e = Const(-2.5) * var("x1")
    assert to_string(e) == "((-2.5) * x1)"


# ---------------------------------------------------------------------------
# structure


def test_interning_gives_identity():
    assert parse("x1*y1 + 1", COORDS) is parse("x1*y1 + 1", COORDS)


def test_nodes_are_immutable():
    with pytest.raises(AttributeError):
        var("x1").name = "y1"


def test_substitute_and_free_variables():
    e = parse("x1*y1 + z", COORDS)
    s = substitute(e, {"x1": parse("y1 + 1", COORDS)})
    assert free_variables(s) == {"y1", "z"}
    assert evaluate(s, {"y1": 2.0, "z": 1.0}) == 7.0


def test_deep_expressions_do_not_recurse():
    e = sum_exprs([var("x1")] * 1)
    for k in range(5000):
        e = e * Const(1.0001) + var("y1")
    assert np.isfinite(evaluate(diff(e, "y1"), {"x1": 0.1, "y1": 0.2}))
