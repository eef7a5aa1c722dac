"""Symbolic scalar expressions over named coordinates.

Nodes are interned: two structurally equal expressions built in the same
process are the same object, so equality and hashing are O(1) and shared
subtrees are evaluated once.

Grammar accepted by :func:`parse` (and emitted by :func:`to_string`)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := ("-" | "+") unary | power
    power    := atom ("^" exponent)?
    exponent := INT | "-" INT | "(" ["-"] INT ")"
    atom     := NUMBER | IDENT | FUNC "(" expr ")" | "(" expr ")"
    FUNC     := "sin" | "cos" | "exp"
    NUMBER   := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
    IDENT    := [A-Za-z_][A-Za-z0-9_]*   (must be one of the declared coordinates)

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.
"""
from __future__ import annotations

import math
import re
import weakref
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Add", "Sub", "Mul", "Div", "Pow", "Neg",
    "Sin", "Cos", "Exp",
    "ExprError", "ExprSyntaxError", "UnknownIdentifierError", "EvaluationError",
    "parse", "to_string", "evaluate", "evaluate_many", "diff", "simplify", "substitute",
    "free_variables", "as_expr", "const", "var", "add", "sub", "mul", "div",
    "power", "neg", "sin", "cos", "exp", "sum_exprs", "ZERO", "ONE", "size",
    "is_zero", "compile_exprs",
]


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int, text: str):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position} in {text!r}")


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, position: int | None = None):
        self.name = name
        self.position = position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"unknown identifier {name!r}{where}")


class EvaluationError(ExprError):
    """Raised when evaluation hits a zero denominator; ``subexpr`` is the offender."""

    def __init__(self, message: str, subexpr: "Expr"):
        self.subexpr = subexpr
        super().__init__(f"{message}: {to_string(subexpr)}")


# ---------------------------------------------------------------------------
# Node types


class Expr:
    __slots__ = ("_hash", "__weakref__")
    _table: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
    children: tuple = ()

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._key_parts() == other._key_parts()

    def __hash__(self):
        return self._hash

    def _key_parts(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self._key_parts()))})"

    def __str__(self):
        return to_string(self)

    # Operator overloads build simplified nodes.
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)


def _intern(cls, key, init):
    table = Expr._table
    node = table.get(key)
    if node is None:
        node = object.__new__(cls)
        init(node)
        object.__setattr__(node, "_hash", hash(key))
        table[key] = node
    return node


class Const(Expr):
    __slots__ = ("value",)

    def __new__(cls, value: float):
        value = float(value)
        if not math.isfinite(value):
            raise ExprError(f"non-finite constant {value!r}")
        return _intern(cls, (cls, value.hex()),
                       lambda n: object.__setattr__(n, "value", value))

    def _key_parts(self):
        return (self.value.hex(),)

    def __repr__(self):
        return f"Const({self.value!r})"


class Var(Expr):
    __slots__ = ("name",)

    def __new__(cls, name: str):
        return _intern(cls, (cls, name),
                       lambda n: object.__setattr__(n, "name", name))

    def _key_parts(self):
        return (self.name,)

    def __repr__(self):
        return f"Var({self.name!r})"


class _Unary(Expr):
    __slots__ = ("arg",)

    def __new__(cls, arg: Expr):
        def init(n):
            object.__setattr__(n, "arg", arg)
        return _intern(cls, (cls, id(arg)), init)

    @property
    def children(self):
        return (self.arg,)

    def _key_parts(self):
        return (self.arg,)


class _Binary(Expr):
    __slots__ = ("left", "right")

    def __new__(cls, left: Expr, right: Expr):
        def init(n):
            object.__setattr__(n, "left", left)
            object.__setattr__(n, "right", right)
        return _intern(cls, (cls, id(left), id(right)), init)

    @property
    def children(self):
        return (self.left, self.right)

    def _key_parts(self):
        return (self.left, self.right)


class Add(_Binary):
    __slots__ = ()


class Sub(_Binary):
    __slots__ = ()


class Mul(_Binary):
    __slots__ = ()


class Div(_Binary):
    __slots__ = ()


class Neg(_Unary):
    __slots__ = ()


class Sin(_Unary):
    __slots__ = ()


class Cos(_Unary):
    __slots__ = ()


class Exp(_Unary):
    __slots__ = ()


class Pow(Expr):
    """``base ** exponent`` with an integer exponent."""

    __slots__ = ("base", "exponent")

    def __new__(cls, base: Expr, exponent: int):
        if isinstance(exponent, float) and exponent.is_integer():
            exponent = int(exponent)
        if not isinstance(exponent, (int, np.integer)) or isinstance(exponent, bool):
            raise ExprError(f"Pow exponent must be an integer, got {exponent!r}")
        exponent = int(exponent)

        def init(n):
            object.__setattr__(n, "base", base)
            object.__setattr__(n, "exponent", exponent)
        return _intern(cls, (cls, id(base), exponent), init)

    @property
    def children(self):
        return (self.base,)

    def _key_parts(self):
        return (self.base, self.exponent)


ZERO = Const(0.0)
ONE = Const(1.0)


# ---------------------------------------------------------------------------
# Generic iterative traversal (expressions can be deep; avoid recursion).


def _postorder(root: Expr) -> list[Expr]:
    """Unique nodes of the DAG rooted at ``root``, children before parents."""
    order: list[Expr] = []
    seen: set[int] = set()
    stack: list[tuple[Expr, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child in reversed(node.children):
            if id(child) not in seen:
                stack.append((child, False))
    return order


def _fold(root: Expr, fn: Callable[[Expr, dict], object], memo: dict | None = None):
    memo = {} if memo is None else memo
    for node in _postorder(root):
        if id(node) not in memo:
            memo[id(node)] = fn(node, memo)
    return memo[id(root)]


def size(e: Expr) -> int:
    """Number of distinct nodes in the expression DAG."""
    return len(_postorder(e))


def free_variables(e: Expr) -> frozenset[str]:
    return frozenset(n.name for n in _postorder(e) if isinstance(n, Var))


# ---------------------------------------------------------------------------
# Simplifying constructors


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
        return Const(float(value))
    raise TypeError(f"cannot convert {value!r} to Expr")


def const(value: float) -> Const:
    return Const(value)


def var(name: str) -> Var:
    return Var(name)


def _cval(e: Expr):
    return e.value if isinstance(e, Const) else None


def is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0.0


def add(a: Expr, b: Expr) -> Expr:
    ca, cb = _cval(a), _cval(b)
    if ca is not None and cb is not None:
        return Const(ca + cb)
    if ca == 0.0:
        return b
    if cb == 0.0:
        return a
    if isinstance(b, Neg):
        return sub(a, b.arg)
    if isinstance(a, Neg):
        return sub(b, a.arg)
    if a is b:
        return mul(Const(2.0), a)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    ca, cb = _cval(a), _cval(b)
    if ca is not None and cb is not None:
        return Const(ca - cb)
    if cb == 0.0:
        return a
    if ca == 0.0:
        return neg(b)
    if a is b:
        return ZERO
    if isinstance(b, Neg):
        return add(a, b.arg)
    return Sub(a, b)


def neg(a: Expr) -> Expr:
    ca = _cval(a)
    if ca is not None:
        return Const(-ca)
    if isinstance(a, Neg):
        return a.arg
    if isinstance(a, Sub):
        return sub(a.right, a.left)
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    ca, cb = _cval(a), _cval(b)
    if ca is not None and cb is not None:
        return Const(ca * cb)
    if cb is not None:
        a, b, ca, cb = b, a, cb, ca
    if ca is not None:
        if ca == 0.0:
            return ZERO
        if ca == 1.0:
            return b
        if ca == -1.0:
            return neg(b)
        if isinstance(b, Mul) and isinstance(b.left, Const):
            return mul(Const(ca * b.left.value), b.right)
        if isinstance(b, Neg):
            return mul(Const(-ca), b.arg)
        return Mul(a, b)
    if isinstance(a, Neg) and isinstance(b, Neg):
        return mul(a.arg, b.arg)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    if a is b:
        return power(a, 2)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    ca, cb = _cval(a), _cval(b)
    if cb is not None and cb != 0.0:
        if ca is not None:
            return Const(ca / cb)
        if cb == 1.0:
            return a
        if cb == -1.0:
            return neg(a)
    if ca == 0.0 and cb != 0.0:
        return ZERO
    return Div(a, b)


def power(a: Expr, n: int) -> Expr:
    a = as_expr(a)
    if isinstance(n, float) and n.is_integer():
        n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return a
    ca = _cval(a)
    if ca is not None and (ca != 0.0 or n > 0):
        return Const(float(ca) ** n)
    if isinstance(a, Pow):
        return power(a.base, a.exponent * n)
    return Pow(a, n)


def _unary_fold(cls, fn):
    def build(a: Expr) -> Expr:
        a = as_expr(a)
        ca = _cval(a)
        if ca is not None:
            return Const(fn(ca))
        return cls(a)
    return build


sin = _unary_fold(Sin, math.sin)
cos = _unary_fold(Cos, math.cos)
exp = _unary_fold(Exp, math.exp)


def sum_exprs(terms: Iterable[Expr]) -> Expr:
    """Balanced sum; keeps tree depth logarithmic in the number of terms."""
    items = [as_expr(t) for t in terms if not is_zero(as_expr(t))]
    if not items:
        return ZERO
    while len(items) > 1:
        paired = [add(items[k], items[k + 1]) for k in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


# ---------------------------------------------------------------------------
# Simplify, diff, substitute


def _rebuild(node: Expr, memo: dict) -> Expr:
    if isinstance(node, (Const, Var)):
        return node
    if isinstance(node, Pow):
        return power(memo[id(node.base)], node.exponent)
    if isinstance(node, _Binary):
        left, right = memo[id(node.left)], memo[id(node.right)]
        return _BINARY_BUILDERS[type(node)](left, right)
    return _UNARY_BUILDERS[type(node)](memo[id(node.arg)])


_BINARY_BUILDERS = {Add: add, Sub: sub, Mul: mul, Div: div}
_UNARY_BUILDERS = {Neg: neg, Sin: sin, Cos: cos, Exp: exp}


@lru_cache(maxsize=65536)
def simplify(e: Expr) -> Expr:
    """Fold constants and drop 0/1 identities, bottom-up."""
    return _fold(e, _rebuild)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (simultaneously)."""
    mapping = {k: as_expr(v) for k, v in mapping.items()}

    def step(node, memo):
        if isinstance(node, Var):
            return mapping.get(node.name, node)
        return _rebuild(node, memo)
    return _fold(e, step)


_DIFF_CACHE: dict = {}
_DIFF_CACHE_LIMIT = 500_000


def diff(e: Expr, v: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to coordinate ``v``."""
    if isinstance(v, Var):
        v = v.name
    key = (e, v)
    hit = _DIFF_CACHE.get(key)
    if hit is not None:
        return hit

    def step(node, memo):
        cached = _DIFF_CACHE.get((node, v))
        if cached is not None:
            return cached
        if isinstance(node, Const):
            out = ZERO
        elif isinstance(node, Var):
            out = ONE if node.name == v else ZERO
        elif isinstance(node, Add):
            out = add(memo[id(node.left)], memo[id(node.right)])
        elif isinstance(node, Sub):
            out = sub(memo[id(node.left)], memo[id(node.right)])
        elif isinstance(node, Neg):
            out = neg(memo[id(node.arg)])
        elif isinstance(node, Mul):
            out = add(mul(memo[id(node.left)], node.right),
                      mul(node.left, memo[id(node.right)]))
        elif isinstance(node, Div):
            da, db = memo[id(node.left)], memo[id(node.right)]
            if is_zero(db):
                out = div(da, node.right)
            else:
                out = div(sub(mul(da, node.right), mul(node.left, db)),
                          power(node.right, 2))
        elif isinstance(node, Pow):
            db = memo[id(node.base)]
            n = node.exponent
            out = mul(mul(Const(n), power(node.base, n - 1)), db)
        elif isinstance(node, Sin):
            out = mul(cos(node.arg), memo[id(node.arg)])
        elif isinstance(node, Cos):
            out = neg(mul(sin(node.arg), memo[id(node.arg)]))
        elif isinstance(node, Exp):
            out = mul(node, memo[id(node.arg)])
        else:  # pragma: no cover
            raise ExprError(f"unknown node {node!r}")
        if len(_DIFF_CACHE) < _DIFF_CACHE_LIMIT:
            _DIFF_CACHE[(node, v)] = out
        return out
    return _fold(e, step)


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(e: Expr, point: Mapping[str, object], _memo: dict | None = None):
    """Evaluate ``e`` with variables bound by ``point``.

    Values may be floats or numpy arrays (evaluated elementwise, all at once).
    A zero denominator anywhere raises :class:`EvaluationError`.
    """
    def step(node, memo):
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            try:
                return point[node.name]
            except KeyError:
                raise UnknownIdentifierError(node.name) from None
        if isinstance(node, Add):
            return memo[id(node.left)] + memo[id(node.right)]
        if isinstance(node, Sub):
            return memo[id(node.left)] - memo[id(node.right)]
        if isinstance(node, Mul):
            return memo[id(node.left)] * memo[id(node.right)]
        if isinstance(node, Div):
            den = memo[id(node.right)]
            if np.any(np.asarray(den) == 0):
                raise EvaluationError("division by zero", node)
            return memo[id(node.left)] / den
        if isinstance(node, Neg):
            return -memo[id(node.arg)]
        if isinstance(node, Pow):
            base = memo[id(node.base)]
            if node.exponent < 0:
                if np.any(np.asarray(base) == 0):
                    raise EvaluationError("division by zero", node)
                return 1.0 / (base ** (-node.exponent))
            return base ** node.exponent
        if isinstance(node, Sin):
            return np.sin(memo[id(node.arg)])
        if isinstance(node, Cos):
            return np.cos(memo[id(node.arg)])
        if isinstance(node, Exp):
            return np.exp(memo[id(node.arg)])
        raise ExprError(f"unknown node {node!r}")  # pragma: no cover

    out = _fold(e, step, _memo)
    if isinstance(out, np.ndarray):
        return out.astype(float)
    return float(out)


def evaluate_many(exprs: Sequence[Expr], point: Mapping[str, object]) -> list:
    """Evaluate several expressions sharing one memo (common subtrees once)."""
    memo: dict = {}
    return [evaluate(e, point, memo) for e in exprs]


# ---------------------------------------------------------------------------
# Printing and parsing


def _fmt_const(x: float) -> str:
    text = repr(x)
    return f"(-{text[1:]})" if x < 0 or text.startswith("-") else text


def to_string(e: Expr) -> str:
    """Fully parenthesised text that :func:`parse` reads back to the same value."""
    def step(node, memo):
        if isinstance(node, Const):
            return _fmt_const(node.value)
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Pow):
            n = node.exponent
            exponent = str(n) if n >= 0 else f"(-{-n})"
            base = memo[id(node.base)]
            if not isinstance(node.base, Var):
                base = f"({base})"
            return f"{base}^{exponent}"
        if isinstance(node, _Binary):
            op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
            return f"({memo[id(node.left)]} {op} {memo[id(node.right)]})"
        if isinstance(node, Neg):
            return f"(-{memo[id(node.arg)]})"
        fname = {Sin: "sin", Cos: "cos", Exp: "exp"}[type(node)]
        return f"{fname}({memo[id(node.arg)]})"
    return _fold(e, step)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)
_FUNCS = {"sin": Sin, "cos": Cos, "exp": Exp}


class _Parser:
    def __init__(self, text: str, coords: Sequence[str]):
        self.text = text
        self.coords = set(coords)
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                start = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise ExprSyntaxError(f"unexpected character {text[start]!r}", start, text)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def error(self, message):
        tok = self.peek()
        if tok is None:
            raise ExprSyntaxError(f"{message}: unexpected end of input", len(self.text), self.text)
        raise ExprSyntaxError(f"{message}: unexpected {tok[1]!r}", tok[2], self.text)

    def accept(self, value):
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == value:
            self.i += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            self.error(f"expected {value!r}")

    def parse(self) -> Expr:
        if not self.tokens:
            raise ExprSyntaxError("empty expression", 0, self.text)
        node = self.expr()
        if self.peek() is not None:
            self.error("trailing input")
        return node

    def expr(self):
        node = self.term()
        while True:
            if self.accept("+"):
                node = Add(node, self.term())
            elif self.accept("-"):
                node = Sub(node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            if self.accept("*"):
                node = Mul(node, self.unary())
            elif self.accept("/"):
                node = Div(node, self.unary())
            else:
                return node

    def unary(self):
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.exponent())
        return base

    def _int(self, sign):
        tok = self.peek()
        if tok is None or tok[0] != "num":
            self.error("expected integer exponent")
        value = float(tok[1])
        if not value.is_integer():
            raise ExprSyntaxError("exponent must be an integer", tok[2], self.text)
        self.i += 1
        return sign * int(value)

    def exponent(self):
        if self.accept("("):
            sign = -1 if self.accept("-") else 1
            n = self._int(sign)
            self.expect(")")
            return n
        sign = -1 if self.accept("-") else 1
        return self._int(sign)

    def atom(self):
        tok = self.peek()
        if tok is None:
            self.error("expected operand")
        kind, value, pos = tok
        if kind == "num":
            self.i += 1
            return Const(float(value))
        if kind == "id":
            self.i += 1
            if value in _FUNCS and value not in self.coords:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _FUNCS[value](arg)
            if value not in self.coords:
                raise UnknownIdentifierError(value, pos)
            return Var(value)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.error("expected operand")


def parse(text: str, coords: Sequence[str]) -> Expr:
    """Parse ``text`` into an (unsimplified) expression over ``coords``."""
    return _Parser(text, coords).parse()


# ---------------------------------------------------------------------------
# Compilation to numpy callables


def compile_exprs(exprs: Sequence[Expr], coords: Sequence[str]) -> Callable[[np.ndarray], np.ndarray]:
    """Compile expressions to ``f(X) -> values`` with common subexpressions shared.

    ``X`` has shape ``(n,)`` or ``(k, n)`` with columns ordered as ``coords``;
    the result has shape ``(len(exprs),)`` or ``(k, len(exprs))``. Zero
    denominators produce non-finite entries instead of raising; use
    :func:`evaluate` when the offending subexpression is wanted.
    """
    coords = list(coords)
    index = {name: k for k, name in enumerate(coords)}
    names: dict[int, str] = {}
    lines = ["def _compiled(X):"]
    for k in range(len(coords)):
        lines.append(f"    c{k} = X[..., {k}]")
    counter = 0
    root = _Tuple(exprs)
    for node in _postorder(root):
        if isinstance(node, _Tuple):
            continue
        if isinstance(node, Const):
            names[id(node)] = repr(node.value)
            continue
        if isinstance(node, Var):
            if node.name not in index:
                raise UnknownIdentifierError(node.name)
            names[id(node)] = f"c{index[node.name]}"
            continue
        if isinstance(node, _Binary):
            op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
            code = f"{names[id(node.left)]} {op} {names[id(node.right)]}"
        elif isinstance(node, Pow):
            b = names[id(node.base)]
            n = node.exponent
            code = f"({b}) ** {n}" if n >= 0 else f"1.0 / (({b}) ** {-n})"
        elif isinstance(node, Neg):
            code = f"-({names[id(node.arg)]})"
        else:
            fname = {Sin: "_sin", Cos: "_cos", Exp: "_exp"}[type(node)]
            code = f"{fname}({names[id(node.arg)]})"
        tmp = f"t{counter}"
        counter += 1
        lines.append(f"    {tmp} = {code}")
        names[id(node)] = tmp
    outs = ", ".join(names[id(e)] for e in exprs)
    lines.append(f"    return ({outs}{',' if len(exprs) == 1 else ''})")
    namespace = {"_sin": np.sin, "_cos": np.cos, "_exp": np.exp}
    exec(compile("\n".join(lines), "<lietower-compiled>", "exec"), namespace)
    raw = namespace["_compiled"]
    m = len(exprs)

    def fn(X):
        X = np.asarray(X, dtype=float)
        lead = X.shape[:-1]
        if m == 0:
            return np.zeros(lead + (0,))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            values = raw(X)
        return np.stack([np.broadcast_to(np.asarray(v, dtype=float), lead) for v in values], axis=-1)

    return fn


class _Tuple(Expr):
    # Transient grouping node so several roots share one traversal.
    __slots__ = ("items",)

    def __new__(cls, items):
        node = object.__new__(cls)
        object.__setattr__(node, "items", tuple(items))
        object.__setattr__(node, "_hash", id(node))
        return node

    @property
    def children(self):
        return self.items

    def _key_parts(self):
        return self.items
