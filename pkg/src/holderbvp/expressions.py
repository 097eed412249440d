"""Closed-form scalar expressions in (t, eps) with exact symbolic derivatives.

All problem data (coefficient matrices, right-hand sides, boundary densities)
is built from this small grammar: complex constants, the variables ``t`` and
``eps``, sums, products, quotients, integer powers, negation, and the unary
functions sin/cos/exp.  The grammar is closed under differentiation with
respect to either variable, so every derivative a Holder norm needs is exact,
never finite-differenced.

Expressions are immutable; building them with ``+ - * / **`` works on Expr
objects and plain numbers.  ``parse_expr`` reads the infix syntax used in
problem files (see the README for the grammar).
"""

from __future__ import annotations

import cmath
import re

import numpy as np

from .errors import ParseError, UsageError

__all__ = [
    "Expr", "Const", "Var", "T", "EPS",
    "sin", "cos", "exp",
    "differentiate", "free_variables", "parse_expr",
]


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ()

    def eval(self, t, eps=0.0):
        """Evaluate at ``t`` (scalar or ndarray) and parameter ``eps``."""
        raise NotImplementedError

    def diff(self, var="t"):
        """Exact derivative with respect to ``"t"`` or ``"eps"``."""
        raise NotImplementedError

    def subs_eps(self, value):
        """Replace the parameter variable by a constant, folding where possible."""
        raise NotImplementedError

    # -- arithmetic sugar ---------------------------------------------------

    def __add__(self, other):
        return _add(self, as_expr(other))

    def __radd__(self, other):
        return _add(as_expr(other), self)

    def __sub__(self, other):
        return _add(self, _neg(as_expr(other)))

    def __rsub__(self, other):
        return _add(as_expr(other), _neg(self))

    def __mul__(self, other):
        return _mul(self, as_expr(other))

    def __rmul__(self, other):
        return _mul(as_expr(other), self)

    def __truediv__(self, other):
        return _quot(self, as_expr(other))

    def __rtruediv__(self, other):
        return _quot(as_expr(other), self)

    def __pow__(self, k):
        return _pow(self, k)

    def __neg__(self):
        return _neg(self)

    def __repr__(self):
        return f"{type(self).__name__}({str(self)})"


def as_expr(value) -> Expr:
    """Coerce a number or expression string to an Expr; pass Exprs through."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse_expr(value)
    if isinstance(value, (int, float, complex, np.integer, np.floating, np.complexfloating)):
        return Const(complex(value))
    raise UsageError(f"cannot interpret {value!r} as an expression")


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = complex(value)

    def eval(self, t, eps=0.0):
        return self.value

    def diff(self, var="t"):
        return Const(0.0)

    def subs_eps(self, value):
        return self

    def __eq__(self, other):
        return isinstance(other, Const) and other.value == self.value

    def __hash__(self):
        return hash(("const", self.value))

    def __str__(self):
        v = self.value
        if v.imag == 0.0:
            return repr(v.real)
        return f"({v.real!r}+{v.imag!r}i)"


class Var(Expr):
    """The independent variable ``t`` or the parameter ``eps``."""

    __slots__ = ("name",)

    def __init__(self, name):
        if name not in ("t", "eps"):
            raise UsageError(f"unknown variable {name!r}")
        self.name = name

    def eval(self, t, eps=0.0):
        return t if self.name == "t" else eps

    def diff(self, var="t"):
        return Const(1.0 if var == self.name else 0.0)

    def subs_eps(self, value):
        if self.name == "eps":
            return Const(value)
        return self

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return hash(("var", self.name))

    def __str__(self):
        return self.name


T = Var("t")
EPS = Var("eps")


class _Binary(Expr):
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left = left
        self.right = right

    def __eq__(self, other):
        return type(other) is type(self) and other.left == self.left and other.right == self.right

    def __hash__(self):
        return hash((type(self).__name__, self.left, self.right))


class Sum(_Binary):
    def eval(self, t, eps=0.0):
        return self.left.eval(t, eps) + self.right.eval(t, eps)

    def diff(self, var="t"):
        return _add(self.left.diff(var), self.right.diff(var))

    def subs_eps(self, value):
        return _add(self.left.subs_eps(value), self.right.subs_eps(value))

    def __str__(self):
        return f"({self.left} + {self.right})"


class Prod(_Binary):
    def eval(self, t, eps=0.0):
        return self.left.eval(t, eps) * self.right.eval(t, eps)

    def diff(self, var="t"):
        return _add(_mul(self.left.diff(var), self.right),
                    _mul(self.left, self.right.diff(var)))

    def subs_eps(self, value):
        return _mul(self.left.subs_eps(value), self.right.subs_eps(value))

    def __str__(self):
        return f"({self.left} * {self.right})"


class Quot(_Binary):
    """Quotient node; the derivative stays inside the grammar.

    Division is the one extension beyond polynomials and sin/cos/exp: rescaled
    arguments such as sin(t/eps) are not expressible without it.
    """

    def eval(self, t, eps=0.0):
        return self.left.eval(t, eps) / self.right.eval(t, eps)

    def diff(self, var="t"):
        num = _add(_mul(self.left.diff(var), self.right),
                   _neg(_mul(self.left, self.right.diff(var))))
        return _quot(num, _mul(self.right, self.right))

    def subs_eps(self, value):
        return _quot(self.left.subs_eps(value), self.right.subs_eps(value))

    def __str__(self):
        return f"({self.left} / {self.right})"


class Neg(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg

    def eval(self, t, eps=0.0):
        return -self.arg.eval(t, eps)

    def diff(self, var="t"):
        return _neg(self.arg.diff(var))

    def subs_eps(self, value):
        return _neg(self.arg.subs_eps(value))

    def __eq__(self, other):
        return isinstance(other, Neg) and other.arg == self.arg

    def __hash__(self):
        return hash(("neg", self.arg))

    def __str__(self):
        return f"(-{self.arg})"


class Pow(Expr):
    """Integer power with non-negative exponent."""

    __slots__ = ("base", "k")

    def __init__(self, base, k):
        self.base = base
        self.k = k

    def eval(self, t, eps=0.0):
        return self.base.eval(t, eps) ** self.k

    def diff(self, var="t"):
        # d(u^k) = k u^(k-1) u';  k >= 1 here, so the exponent stays >= 0
        return _mul(_mul(Const(self.k), _pow(self.base, self.k - 1)),
                    self.base.diff(var))

    def subs_eps(self, value):
        return _pow(self.base.subs_eps(value), self.k)

    def __eq__(self, other):
        return isinstance(other, Pow) and other.base == self.base and other.k == self.k

    def __hash__(self):
        return hash(("pow", self.base, self.k))

    def __str__(self):
        return f"{self.base}^{self.k}"


class _Unary(Expr):
    __slots__ = ("arg",)
    _fn = None
    _cfn = None

    def __init__(self, arg):
        self.arg = arg

    def eval(self, t, eps=0.0):
        return type(self)._fn(self.arg.eval(t, eps))

    def subs_eps(self, value):
        return _unary(type(self), self.arg.subs_eps(value))

    def __eq__(self, other):
        return type(other) is type(self) and other.arg == self.arg

    def __hash__(self):
        return hash((type(self).__name__, self.arg))

    def __str__(self):
        return f"{type(self).__name__.lower()}({self.arg})"


class Sin(_Unary):
    _fn = staticmethod(np.sin)
    _cfn = staticmethod(cmath.sin)

    def diff(self, var="t"):
        return _mul(_unary(Cos, self.arg), self.arg.diff(var))


class Cos(_Unary):
    _fn = staticmethod(np.cos)
    _cfn = staticmethod(cmath.cos)

    def diff(self, var="t"):
        return _mul(_neg(_unary(Sin, self.arg)), self.arg.diff(var))


class Exp(_Unary):
    _fn = staticmethod(np.exp)
    _cfn = staticmethod(cmath.exp)

    def diff(self, var="t"):
        return _mul(self, self.arg.diff(var))


# -- smart constructors with constant folding --------------------------------
#
# Folding keeps repeatedly differentiated trees small (zero and one absorb),
# which matters because Leibniz recursions differentiate the same data many
# times.  Nothing beyond constant folding is attempted.

_ZERO = Const(0.0)
_ONE = Const(1.0)


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def _add(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Sum(a, b)


def _mul(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Prod(a, b)


def _neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _quot(a, b):
    if _is_const(b):
        if b.value == 0.0:
            raise UsageError("division by the constant zero")
        if _is_const(a):
            return Const(a.value / b.value)
        if b.value == 1.0:
            return a
        return _mul(Const(1.0 / b.value), a)
    if _is_const(a, 0.0):
        return _ZERO
    return Quot(a, b)


def _pow(base, k):
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise UsageError(f"power exponent must be an integer, got {k!r}")
    if k < 0:
        raise UsageError("power exponent must be >= 0 (use / for reciprocals)")
    if k == 0:
        return _ONE
    if k == 1:
        return base
    if _is_const(base):
        return Const(base.value ** int(k))
    return Pow(base, int(k))


def _unary(cls, arg):
    if _is_const(arg):
        return Const(cls._cfn(arg.value))
    return cls(arg)


def sin(arg) -> Expr:
    return _unary(Sin, as_expr(arg))


def cos(arg) -> Expr:
    return _unary(Cos, as_expr(arg))


def exp(arg) -> Expr:
    return _unary(Exp, as_expr(arg))


def differentiate(e: Expr, with_respect_to="t") -> Expr:
    """Exact symbolic derivative; repeated application is valid to any order."""
    if with_respect_to not in ("t", "eps"):
        raise UsageError(f"differentiation variable must be 't' or 'eps', got {with_respect_to!r}")
    return as_expr(e).diff(with_respect_to)


def free_variables(e: Expr) -> set:
    """The set of variable names ('t', 'eps') occurring in an expression."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, _Binary):
        return free_variables(e.left) | free_variables(e.right)
    if isinstance(e, (Neg, _Unary)):
        return free_variables(e.arg)
    if isinstance(e, Pow):
        return free_variables(e.base)
    return set()


# -- infix parser -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)

_FUNCTIONS = {"sin": sin, "cos": cos, "exp": exp}


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise ParseError(f"unexpected character {rest[0]!r} at position {pos} in {text!r}")
        pos = m.end()
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
    return tokens


class _Parser:
    """Recursive-descent parser for the problem-file expression syntax."""

    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, value, at = self.next()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r} at position {at} in {self.text!r}")

    def parse(self):
        e = self.expr()
        kind, value, at = self.peek()
        if kind is not None:
            raise ParseError(f"trailing input {value!r} at position {at} in {self.text!r}")
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.next()
                rhs = self.term()
                e = e + rhs if value == "+" else e - rhs
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.next()
                rhs = self.factor()
                e = e * rhs if value == "*" else e / rhs
            else:
                return e

    def factor(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.next()
            return -self.factor()
        return self.power()

    def power(self):
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.next()
            nkind, nvalue, at = self.next()
            if nkind != "number" or not re.fullmatch(r"\d+", nvalue):
                raise ParseError(
                    f"exponent must be a non-negative integer at position {at} in {self.text!r}")
            return base ** int(nvalue)
        return base

    def atom(self):
        kind, value, at = self.next()
        if kind == "number":
            if value.endswith("i"):
                return Const(complex(0.0, float(value[:-1] or "1")))
            return Const(float(value))
        if kind == "ident":
            if value == "t":
                return T
            if value == "eps":
                return EPS
            if value == "i":
                return Const(1j)
            if value in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return _FUNCTIONS[value](arg)
            raise ParseError(f"unknown name {value!r} at position {at} in {self.text!r}")
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected end of expression in {self.text!r}"
                         if kind is None else
                         f"unexpected {value!r} at position {at} in {self.text!r}")


def parse_expr(text: str) -> Expr:
    """Parse the infix expression syntax used in problem files.

    Variables ``t`` and ``eps``, imaginary unit ``i`` (also as a numeric
    suffix, ``2.5i``), operators ``+ - * / ^`` with ``^`` taking a
    non-negative integer exponent, functions ``sin cos exp``, parentheses.
    """
    if not isinstance(text, str) or not text.strip():
        raise ParseError(f"empty expression {text!r}")
    return _Parser(text).parse()
