"""Truncated jets in one variable and the frame-bundle coordinate calculus.

A :class:`Jet` stores the derivative stack ``d_0, ..., d_q`` of a function at a
base point.  An infinite order frame at a point of ``U`` is the jet at ``0`` of a
regular map ``(R, 0) -> U``; truncating at order ``q`` gives the coordinates
``z_0, ..., z_q`` with ``z_p`` the ``p``-th derivative.  Two further charts are
used on frames: ``y_p = z_p / z_1**p`` (``p >= 2``) and ``x_1 = ln|y_1|``.

Arithmetic is generic: with ``int``/``Fraction`` entries every operation here is
exact, with floats it is ordinary double precision.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

from . import _series
from .errors import OrderMismatchError, RegularityError

DEFAULT_ORDER = 8
MAX_ORDER = 16


def _check_order(order):
    if order < 0:
        raise OrderMismatchError(f"jet order must be >= 0, got {order}")
    if order > MAX_ORDER:
        raise OrderMismatchError(f"jet order {order} exceeds the maximum {MAX_ORDER}")


@dataclass(frozen=True)
class Jet:
    """Derivative stack of a function at ``base``: ``derivs[p]`` is the p-th derivative."""

    base: object
    derivs: tuple

    def __post_init__(self):
        object.__setattr__(self, "derivs", tuple(self.derivs))
        if not self.derivs:
            raise OrderMismatchError("a jet needs at least its value")
        _check_order(len(self.derivs) - 1)

    @property
    def order(self):
        return len(self.derivs) - 1

    @property
    def value(self):
        return self.derivs[0]

    @classmethod
    def identity(cls, base=0, order=DEFAULT_ORDER):
        """Jet of ``t -> t`` at ``base``."""
        _check_order(order)
        derivs = [base] + [1] * min(order, 1) + [0] * max(order - 1, 0)
        return cls(base, derivs)

    @classmethod
    def constant(cls, value, base=0, order=DEFAULT_ORDER):
        _check_order(order)
        return cls(base, [value] + [0] * order)

    @classmethod
    def from_coeffs(cls, base, coeffs):
        return cls(base, _series.factorial_unscale(coeffs))

    @classmethod
    def from_polynomial(cls, coeffs, base=0, order=DEFAULT_ORDER):
        """Jet at ``base`` of ``sum(c_k * t**k)`` given its coefficients around 0."""
        _check_order(order)
        derivs = []
        for p in range(order + 1):
            acc = 0
            for k in range(p, len(coeffs)):
                acc += coeffs[k] * math.perm(k, p) * base ** (k - p)
            derivs.append(acc)
        return cls(base, derivs)

    def coeffs(self):
        """Taylor coefficients ``d_p / p!``."""
        return _series.factorial_scale(self.derivs)

    def is_regular(self, tol=0.0):
        return self.order >= 1 and not _series.is_zero(self.derivs[1], tol)

    def truncate(self, order):
        if order > self.order:
            raise OrderMismatchError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.base, self.derivs[: order + 1])

    def derivative(self):
        """Jet of the derivative function (order drops by one)."""
        if self.order == 0:
            raise OrderMismatchError("an order-0 jet has no derivative jet")
        return Jet(self.base, self.derivs[1:])

    def shift(self, new_base):
        """Re-expand the Taylor polynomial of this jet at ``new_base``.

        Derivatives beyond the order are treated as zero, so the result is exact
        for the polynomial but only approximates the underlying function.
        """
        h = new_base - self.base
        q = self.order
        derivs = []
        for p in range(q + 1):
            acc = 0
            hp = 1
            fact = 1
            for j in range(q - p + 1):
                if j:
                    hp = hp * h
                    fact *= j
                acc = acc + _series.qdiv(self.derivs[p + j] * hp, fact)
            derivs.append(acc)
        return Jet(new_base, derivs)

    def to_json(self):
        return [_num_json(self.base)] + [_num_json(d) for d in self.derivs]

    def astype(self, kind):
        return Jet(kind(self.base), [kind(d) for d in self.derivs])

    def __iter__(self):
        return iter(self.derivs)

    def __len__(self):
        return len(self.derivs)

    def __getitem__(self, p):
        return self.derivs[p]


def _num_json(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v.numerator)
    if isinstance(v, int):
        return v
    return float(v)


def _same_point(a, b, tol):
    if tol == 0:
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def compose(outer, inner, tol=1e-12):
    """Jet of ``outer o inner`` at ``inner.base``.

    ``outer`` must be taken at ``inner.value``; with exact entries the base points
    must agree exactly, otherwise within relative tolerance ``tol``.
    """
    if outer.order != inner.order:
        raise OrderMismatchError(
            f"compose needs equal orders, got {outer.order} and {inner.order}")
    exact = isinstance(outer.base, (int, Fraction)) and isinstance(inner.value, (int, Fraction))
    if not _same_point(outer.base, inner.value, 0 if exact else tol):
        raise OrderMismatchError(
            f"outer jet is based at {outer.base!r} but inner jet has value {inner.value!r}")
    coeffs = _series.compose(outer.coeffs(), inner.coeffs())
    return Jet.from_coeffs(inner.base, coeffs)


def revert(j):
    """Compositional inverse jet: based at ``j.value`` with value ``j.base``."""
    if not j.is_regular():
        raise RegularityError("cannot revert a jet with zero first derivative")
    coeffs = _series.revert(j.coeffs())
    coeffs[0] = j.base
    return Jet.from_coeffs(j.value, coeffs)


def _bell_power_coeffs(frame_coeffs, k, n_max):
    """Coefficients of ``(sum_{i>=1} z_i t^i / i!)**k`` up to ``t**n_max``."""
    g = [0] + list(frame_coeffs[1:n_max + 1])
    out = [1] + [0] * n_max
    for _ in range(k):
        out = _series.mul(out, g)
    return out


def prolong(h_derivs, frame):
    """Image of ``frame`` under the map of frame bundles induced by ``h``.

    ``h_derivs`` is the derivative stack of ``h`` at ``frame.value``.  Component
    ``n >= 1`` is ``n! * sum_k h^(k)(z0)/k! * [t^n] (sum_i z_i t^i/i!)^k``, the
    Faa di Bruno formula summed over ordered compositions of ``n``.
    """
    q = frame.order
    if h_derivs.order != q:
        raise OrderMismatchError(f"h has order {h_derivs.order} but frame has order {q}")
    if not frame.is_regular():
        raise RegularityError("frame must have nonzero first derivative")
    if not h_derivs.is_regular():
        raise RegularityError("h must have nonzero first derivative at the frame's point")
    exact = isinstance(h_derivs.base, (int, Fraction)) and isinstance(frame.value, (int, Fraction))
    if not _same_point(h_derivs.base, frame.value, 0 if exact else 1e-12):
        raise OrderMismatchError("h_derivs must be taken at the frame's point z0")
    zc = frame.coeffs()
    alpha = [h_derivs.derivs[0]]
    powers = [_bell_power_coeffs(zc, k, q) for k in range(q + 1)]
    fact_n = 1
    for n in range(1, q + 1):
        fact_n *= n
        acc = 0
        fact_k = 1
        for k in range(1, n + 1):
            fact_k *= k
            term = powers[k][n]
            if term:
                acc = acc + _series.qdiv(h_derivs.derivs[k] * term, fact_k)
        alpha.append(acc * fact_n)
    return Jet(frame.base, alpha)


# -- frame charts -----------------------------------------------------------


@dataclass(frozen=True)
class FrameCoordsY:
    """Chart ``y_0 = z_0, y_1 = z_1, y_p = z_p / z_1**p``."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) < 2 or _series.is_zero(self.coords[1]):
            raise RegularityError("y1 must be nonzero")

    @property
    def order(self):
        return len(self.coords) - 1

    @classmethod
    def from_jet(cls, frame):
        if not frame.is_regular():
            raise RegularityError("frame must have nonzero first derivative")
        z = frame.derivs
        z1 = z[1]
        ys = [z[0], z1]
        pw = z1
        for p in range(2, len(z)):
            pw = pw * z1
            ys.append(_series.qdiv(z[p], pw))
        return cls(ys)

    def to_jet(self, base=0):
        y = self.coords
        zs = [y[0], y[1]]
        pw = y[1]
        for p in range(2, len(y)):
            pw = pw * y[1]
            zs.append(y[p] * pw)
        return Jet(base, zs)

    def act(self, lam):
        """Right action of ``lam`` in GL(1): only ``y_1`` scales."""
        return FrameCoordsY((self.coords[0], lam * self.coords[1]) + self.coords[2:])

    def to_x(self):
        y = self.coords
        return FrameCoordsX((y[0], math.log(abs(y[1]))) + y[2:])


@dataclass(frozen=True)
class FrameCoordsX:
    """Chart on frames modulo O(1): ``x_1 = ln|y_1|``, the rest as in the y-chart."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))

    @property
    def order(self):
        return len(self.coords) - 1

    def to_y(self, sign=1):
        x = self.coords
        return FrameCoordsY((x[0], sign * math.exp(x[1])) + x[2:])


def gl1_act_z(frame, lam):
    """``(z_0, z_1, z_2, ...) -> (z_0, lam z_1, lam^2 z_2, ...)``."""
    out = [frame.derivs[0]]
    pw = 1
    for z in frame.derivs[1:]:
        pw = pw * lam
        out.append(pw * z)
    return Jet(frame.base, out)


def lift_s2(h_derivs, coords):
    """Action of ``h`` on the x-chart of frames modulo O(1).

    ``beta_0 = h(x_0)``, ``beta_1 = x_1 + ln|h'(x_0)|``; ``beta_2`` and ``beta_3``
    come from their closed forms, higher components from conjugating
    :func:`prolong` through the chart maps with ``y_1 = 1`` (they do not depend
    on ``y_1``).
    """
    x = coords.coords
    q = len(x) - 1
    if h_derivs.order < q:
        raise OrderMismatchError(f"h has order {h_derivs.order} but coords have order {q}")
    h = h_derivs.derivs
    if _series.is_zero(h[1]):
        raise RegularityError("h must have nonzero first derivative")
    h1 = h[1]
    beta = [h[0], x[1] + math.log(abs(h1))]
    if q >= 2:
        beta.append(x[2] / h1 + h[2] / (h1 * h1))
    if q >= 3:
        beta.append(x[3] / (h1 * h1) + 3 * h[2] * x[2] / h1 ** 3 + h[3] / h1 ** 3)
    if q >= 4:
        y = FrameCoordsY((x[0], 1) + tuple(x[2:]))
        image = FrameCoordsY.from_jet(prolong(h_derivs.truncate(q), y.to_jet()))
        beta.extend(image.coords[4:])
    return FrameCoordsX(beta)
