"""Exact rational evaluation of polynomial expression trees."""
from fractions import Fraction

from lietower.expr import Add, Const, Mul, Neg, Pow, Sub, Var

_OPS = {Add: lambda a, b: a + b, Sub: lambda a, b: a - b, Mul: lambda a, b: a * b}


def exact_value(e, env):
    """Value of ``e`` with Fraction arithmetic; ``env`` maps names to Fractions."""
    if isinstance(e, Const):
        return Fraction(e.value)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Pow):
        return exact_value(e.base, env) ** e.exponent
    if isinstance(e, Neg):
        return -exact_value(e.children[0], env)
    if type(e) not in _OPS:
        raise TypeError(f"not a polynomial node: {type(e).__name__}")
    a, b = (exact_value(c, env) for c in e.children)
    return _OPS[type(e)](a, b)


def exact_matrix(M, names, point):
    env = dict(zip(names, point))
    return [[exact_value(e, env) for e in row] for row in M]
