"""Kernels on truncated Taylor coefficient lists.

A series of order ``q`` is a list ``[a0, a1, ..., aq]`` standing for
``a0 + a1*t + ... + aq*t**q``.  Every kernel keeps exactly the input order and
only uses ``+ - * /`` on the coefficients unless a transcendental function is
involved, so ``Fraction`` coefficients stay exact through the algebraic kernels.
"""

import math
from fractions import Fraction

from .errors import DomainError


def factorial_scale(derivs):
    """Derivative stack ``d_k`` -> Taylor coefficients ``d_k / k!``."""
    out = []
    fact = 1
    for k, d in enumerate(derivs):
        if k:
            fact *= k
        out.append(_div_int(d, fact))
    return out


def factorial_unscale(coeffs):
    """Taylor coefficients -> derivative stack."""
    out = []
    fact = 1
    for k, a in enumerate(coeffs):
        if k:
            fact *= k
        out.append(a * fact)
    return out


def _div_int(value, n):
    if n == 1:
        return value
    return qdiv(value, n)


def qdiv(a, b):
    """``a / b`` that stays a ``Fraction`` when both operands are integers."""
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def is_zero(value, tol=0.0):
    v = getattr(value, "real", value)
    if tol == 0:
        return v == 0
    return abs(v) <= tol


def add(a, b):
    return [x + y for x, y in zip(a, b)]


def sub(a, b):
    return [x - y for x, y in zip(a, b)]


def scale(a, c):
    return [c * x for x in a]


def mul(a, b):
    n = len(a)
    out = []
    for k in range(n):
        acc = a[0] * b[k]
        for j in range(1, k + 1):
            acc += a[j] * b[k - j]
        out.append(acc)
    return out


def recip(b, tol=0.0):
    if is_zero(b[0], tol):
        raise DomainError("division by a series with (near-)zero constant term")
    n = len(b)
    out = [1 / b[0] if not isinstance(b[0], int) else Fraction(1, b[0])]
    for k in range(1, n):
        acc = b[1] * out[k - 1]
        for j in range(2, k + 1):
            acc += b[j] * out[k - j]
        out.append(-acc / b[0])
    return out


def div(a, b, tol=0.0):
    if is_zero(b[0], tol):
        raise DomainError("division by a series with (near-)zero constant term")
    n = len(a)
    out = []
    for k in range(n):
        acc = a[k]
        for j in range(1, k + 1):
            acc -= b[j] * out[k - j]
        if isinstance(acc, int) and isinstance(b[0], int):
            out.append(Fraction(acc, b[0]))
        else:
            out.append(acc / b[0])
    return out


def exp(a):
    n = len(a)
    out = [math.exp(a[0])]
    for k in range(1, n):
        acc = 0.0
        for j in range(1, k + 1):
            acc += j * a[j] * out[k - j]
        out.append(acc / k)
    return out


def ln(a):
    if getattr(a[0], "real", a[0]) <= 0:
        raise DomainError(f"ln of non-positive value {float(a[0])!r}")
    n = len(a)
    out = [math.log(a[0])]
    for k in range(1, n):
        acc = 0.0
        for j in range(1, k):
            acc += j * out[j] * a[k - j]
        out.append((a[k] - acc / k) / a[0])
    return out


def sincos(a):
    n = len(a)
    s = [math.sin(a[0])]
    c = [math.cos(a[0])]
    for k in range(1, n):
        sk = 0.0
        ck = 0.0
        for j in range(1, k + 1):
            sk += j * a[j] * c[k - j]
            ck -= j * a[j] * s[k - j]
        s.append(sk / k)
        c.append(ck / k)
    return s, c


def sqrt(a, tol=0.0):
    a0 = getattr(a[0], "real", a[0])
    if a0 < 0:
        raise DomainError(f"sqrt of negative value {float(a0)!r}")
    if len(a) > 1 and is_zero(a0, tol):
        raise DomainError("sqrt is not differentiable at 0")
    n = len(a)
    out = [math.sqrt(a[0])]
    for k in range(1, n):
        acc = 0.0
        for j in range(1, k):
            acc += out[j] * out[k - j]
        out.append((a[k] - acc) / (2 * out[0]))
    return out


def powint(a, p, tol=0.0):
    n = len(a)
    if p < 0:
        return recip(powint(a, -p), tol)
    result = [1] + [0] * (n - 1)
    base = list(a)
    while p:
        if p & 1:
            result = mul(result, base)
        p >>= 1
        if p:
            base = mul(base, base)
    return result


def powreal(a, p, tol=0.0):
    """``a**p`` for a constant real exponent ``p``; needs ``a0 > 0``."""
    a0 = getattr(a[0], "real", a[0])
    if a0 < 0 or (len(a) > 1 and is_zero(a0, tol)):
        raise DomainError(f"non-integer power of value {float(a0)!r}")
    n = len(a)
    out = [a[0] ** p]
    for k in range(1, n):
        acc = 0.0
        for j in range(1, k + 1):
            acc += (p * j - (k - j)) * a[j] * out[k - j]
        out.append(acc / (k * a[0]))
    return out


def compose(outer, inner):
    """Coefficients of ``outer(inner(t))``; ``outer`` is expanded around ``inner[0]``."""
    n = len(inner)
    shifted = [0] + list(inner[1:])
    result = [outer[-1]] + [0] * (n - 1)
    for k in range(len(outer) - 2, -1, -1):
        result = mul(result, shifted)
        result[0] = result[0] + outer[k]
    return result[:n]


def derivative(a):
    """Coefficients of ``d/dt`` of the series (order drops by one)."""
    return [k * a[k] for k in range(1, len(a))]


def revert(a):
    """Compositional inverse around ``a[0]``.

    Returns ``c`` with ``c[0] = 0`` such that ``a(c(w)) = a0 + w`` to the input
    order.  Newton iteration ``c <- c - (A(c) - w) / A'(c)`` doubles the number of
    correct coefficients per step.
    """
    n = len(a)
    if is_zero(a[1]):
        raise DomainError("series with zero linear term is not invertible")
    zero = a[0] * 0
    shifted_a = [zero] + list(a[1:])
    da = derivative(shifted_a) + [zero]
    w = [zero] * n
    if n > 1:
        w[1] = zero + 1
    c = [zero] * n
    if n > 1:
        c[1] = 1 / a[1] if not isinstance(a[1], int) else Fraction(1, a[1])
    correct = 2
    while correct < n:
        resid = sub(compose(shifted_a, c), w)
        slope = compose(da, c)
        c = sub(c, div(resid, slope))
        correct *= 2
    return c
