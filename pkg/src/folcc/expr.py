"""Closed-form expressions in one real variable ``x``.

Grammar (``^`` is right associative and binds tighter than unary minus)::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := base ("^" factor)?
    base   := NUMBER | "x" | "pi" | FUNC "(" expr ")" | "(" expr ")" | "-" factor
    FUNC   := "exp" | "ln" | "sin" | "cos" | "sqrt" | "abs"
    NUMBER := integer | decimal | integer "/" integer   (no blanks inside)

Literals are parsed to exact :class:`~fractions.Fraction` values, so an
expression built only from ``+ - * /`` and integer powers evaluates exactly on
rational input.  :func:`eval_jet` evaluates an expression on a :class:`Jet` and
returns every derivative up to the jet order in one pass.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import re

from . import _series
from .errors import DomainError, ParseError
from .jets import Jet

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt", "abs")
DEFAULT_ZERO_TOL = 1e-12


class Node:
    """Base class of expression nodes."""

    __slots__ = ()

    def __add__(self, other):
        return Binary("+", self, as_node(other))

    def __radd__(self, other):
        return Binary("+", as_node(other), self)

    def __sub__(self, other):
        return Binary("-", self, as_node(other))

    def __rsub__(self, other):
        return Binary("-", as_node(other), self)

    def __mul__(self, other):
        return Binary("*", self, as_node(other))

    def __rmul__(self, other):
        return Binary("*", as_node(other), self)

    def __truediv__(self, other):
        return Binary("/", self, as_node(other))

    def __rtruediv__(self, other):
        return Binary("/", as_node(other), self)

    def __pow__(self, other):
        return Binary("^", self, as_node(other))

    def __neg__(self):
        return Unary("neg", self)

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True, eq=True)
class Const(Node):
    value: object
    name: str = None


@dataclass(frozen=True, eq=True)
class Var(Node):
    pass


@dataclass(frozen=True, eq=True)
class Unary(Node):
    op: str
    arg: Node


@dataclass(frozen=True, eq=True)
class Binary(Node):
    op: str
    left: Node
    right: Node


X = Var()
PI = Const(math.pi, "pi")


def as_node(value):
    if isinstance(value, Node):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(Fraction(value))
    if isinstance(value, float):
        return Const(value)
    raise TypeError(f"cannot turn {value!r} into an expression")


def func(name, arg):
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    return Unary(name, as_node(arg))


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<rational>\d+/\d+(?![\d.eE]))
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}",
                             len(source[:pos].encode()), source)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), len(source[:pos].encode())))
        pos = m.end()
    tokens.append(("end", "", len(source.encode())))
    return tokens


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, offset = self.take()
        if value != text:
            found = value or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", offset, self.source)

    def error(self, message, offset):
        raise ParseError(message, offset, self.source)

    def parse(self):
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            self.error(f"unexpected {value!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self):
        node = self.base()
        if self.peek()[1] == "^":
            self.take()
            node = Binary("^", node, self.factor())
        return node

    def base(self):
        kind, value, offset = self.take()
        if kind == "rational":
            num, den = value.split("/")
            if int(den) == 0:
                self.error("zero denominator in rational literal", offset)
            return Const(Fraction(int(num), int(den)))
        if kind == "number":
            return Const(Fraction(value))
        if kind == "name":
            if value == "x":
                return X
            if value == "pi":
                return PI
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(value, arg)
            self.error(f"unknown identifier {value!r}", offset)
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        if value == "-":
            return Unary("neg", self.factor())
        self.error(f"unexpected {value or 'end of input'!r}", offset)


def parse(source):
    """Parse ``source`` into an expression tree."""
    if not isinstance(source, str):
        raise TypeError("expression source must be text")
    return _Parser(source).parse()


# -- printing -----------------------------------------------------------------


def _const_source(value, name):
    if name is not None:
        return name
    if isinstance(value, Fraction):
        if value < 0:
            return f"(-{_const_source(-value, None)})"
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value) if value >= 0 else f"(-{-value})"
    text = repr(float(value))
    return text if value >= 0 else f"(-{text[1:]})"


def to_source(node):
    """Render ``node`` as text that :func:`parse` maps back to an equal tree."""
    if isinstance(node, Const):
        return _const_source(node.value, node.name)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Unary):
        inner = to_source(node.arg)
        if node.op == "neg":
            return f"(-({inner}))"
        return f"{node.op}({inner})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    raise TypeError(f"not an expression node: {node!r}")


# -- structure ----------------------------------------------------------------


def substitute(node, inner):
    """Composition ``node o inner``: every ``x`` in ``node`` replaced by ``inner``."""
    if isinstance(node, Var):
        return inner
    if isinstance(node, Const):
        return node
    if isinstance(node, Unary):
        return Unary(node.op, substitute(node.arg, inner))
    return Binary(node.op, substitute(node.left, inner), substitute(node.right, inner))


compose = substitute


def depends_on_x(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, Const):
        return False
    if isinstance(node, Unary):
        return depends_on_x(node.arg)
    return depends_on_x(node.left) or depends_on_x(node.right)


def is_rational(node):
    """True when only ``+ - * /``, negation and integer constant powers occur."""
    if isinstance(node, Var):
        return True
    if isinstance(node, Const):
        return isinstance(node.value, (int, Fraction)) and node.name is None
    if isinstance(node, Unary):
        return node.op == "neg" and is_rational(node.arg)
    if node.op == "^":
        if depends_on_x(node.right) or not is_rational(node.right):
            return False
        p = evaluate(node.right, 0)
        return Fraction(p).denominator == 1 and is_rational(node.left)
    return is_rational(node.left) and is_rational(node.right)


# -- evaluation ---------------------------------------------------------------


def _integral_exponent(p):
    if isinstance(p, Fraction):
        return int(p) if p.denominator == 1 else None
    if isinstance(p, int):
        return p
    if float(p).is_integer() and abs(p) < 2 ** 31:
        return int(p)
    return None


def _series_eval(node, s, tol):
    n = len(s)
    if isinstance(node, Var):
        return list(s)
    if isinstance(node, Const):
        return [node.value] + [0] * (n - 1)
    if isinstance(node, Unary):
        a = _series_eval(node.arg, s, tol)
        op = node.op
        if op == "neg":
            return [-c for c in a]
        if op == "exp":
            return _series.exp(a)
        if op == "ln":
            return _series.ln(a)
        if op == "sin":
            return _series.sincos(a)[0]
        if op == "cos":
            return _series.sincos(a)[1]
        if op == "sqrt":
            return _series.sqrt(a, tol)
        if op == "abs":
            a0 = getattr(a[0], "real", a[0])
            if n > 1 and abs(a0) <= tol:
                raise DomainError("abs is not differentiable at 0")
            return list(a) if a0 >= 0 else [-c for c in a]
        raise ValueError(f"unknown unary operator {op!r}")
    op = node.op
    a = _series_eval(node.left, s, tol)
    if op == "^":
        if depends_on_x(node.right):
            b = _series_eval(node.right, s, tol)
            return _series.exp(_series.mul(b, _series.ln(a)))
        p = _series_eval(node.right, s[:1], tol)[0]
        k = _integral_exponent(p)
        if k is not None:
            if k < 0 and abs(getattr(a[0], "real", a[0])) <= tol:
                raise DomainError("negative power of a (near-)zero value")
            return _series.powint(a, k, tol)
        return _series.powreal(a, p, tol)
    b = _series_eval(node.right, s, tol)
    if op == "+":
        return _series.add(a, b)
    if op == "-":
        return _series.sub(a, b)
    if op == "*":
        return _series.mul(a, b)
    if op == "/":
        b0 = getattr(b[0], "real", b[0])
        if b0 == 0 or abs(b0) <= tol:
            raise DomainError("division by a (near-)zero value")
        return _series.div(a, b)
    raise ValueError(f"unknown binary operator {op!r}")


def eval_jet(node, jet, zero_tol=DEFAULT_ZERO_TOL):
    """Jet of ``node o f`` where ``jet`` is the jet of ``f``.

    With the identity jet at ``x0`` this is the Taylor expansion of the
    expression at ``x0``.  ``zero_tol`` is the cutoff below which a divisor or an
    ``abs``/``sqrt`` argument counts as zero.
    """
    coeffs = _series_eval(node, jet.coeffs(), zero_tol)
    return Jet.from_coeffs(jet.base, coeffs)


def evaluate(node, x, zero_tol=DEFAULT_ZERO_TOL):
    """Value of the expression at ``x`` (exact for rational trees on rational ``x``)."""
    return _series_eval(node, [x], zero_tol)[0]


def derivatives(node, x, order, zero_tol=DEFAULT_ZERO_TOL):
    """Derivative stack of the expression at ``x`` up to ``order``."""
    return eval_jet(node, Jet.identity(x, order), zero_tol)


# -- fast scalar path -----------------------------------------------------------


def differentiate(node):
    """Symbolic derivative with respect to ``x`` (light constant folding only)."""
    if isinstance(node, Var):
        return Const(Fraction(1))
    if isinstance(node, Const):
        return Const(Fraction(0))
    if isinstance(node, Unary):
        u, du = node.arg, differentiate(node.arg)
        op = node.op
        if op == "neg":
            return _neg(du)
        if op == "exp":
            return _mul(node, du)
        if op == "ln":
            return _div(du, u)
        if op == "sin":
            return _mul(Unary("cos", u), du)
        if op == "cos":
            return _neg(_mul(Unary("sin", u), du))
        if op == "sqrt":
            return _div(du, _mul(Const(Fraction(2)), node))
        if op == "abs":
            return _mul(_div(u, node), du)
        raise ValueError(op)
    u, v = node.left, node.right
    du, dv = differentiate(u), differentiate(v)
    op = node.op
    if op == "+":
        return _add(du, dv)
    if op == "-":
        return _add(du, _neg(dv))
    if op == "*":
        return _add(_mul(du, v), _mul(u, dv))
    if op == "/":
        return _div(_add(_mul(du, v), _neg(_mul(u, dv))), Binary("^", v, Const(Fraction(2))))
    if op == "^":
        if not depends_on_x(v):
            lowered = Binary("^", u, _add(v, Const(Fraction(-1))))
            return _mul(_mul(v, lowered), du)
        return _mul(node, _add(_mul(dv, Unary("ln", u)), _div(_mul(v, du), u)))
    raise ValueError(op)


def _is_const(node, value):
    return isinstance(node, Const) and node.name is None and node.value == value


def _add(a, b):
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Binary("+", a, b)


def _neg(a):
    if _is_const(a, 0):
        return a
    return Unary("neg", a)


def _mul(a, b):
    if _is_const(a, 0) or _is_const(b, 0):
        return Const(Fraction(0))
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return Binary("*", a, b)


def _div(a, b):
    if _is_const(b, 1):
        return a
    return Binary("/", a, b)


_PY_UNARY = {"exp": "_m.exp", "ln": "_m.log", "sin": "_m.sin", "cos": "_m.cos",
             "sqrt": "_m.sqrt", "abs": "abs"}
_PY_BINARY = {"+": "+", "-": "-", "*": "*", "/": "/", "^": "**"}


def _py_source(node):
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{_py_source(node.arg)})"
        return f"{_PY_UNARY[node.op]}({_py_source(node.arg)})"
    return f"({_py_source(node.left)} {_PY_BINARY[node.op]} {_py_source(node.right)})"


def compile_float(node):
    """Plain float callable for hot loops (no domain checks beyond Python's own)."""
    code = f"lambda x: {_py_source(node)}"
    return eval(code, {"_m": math})
