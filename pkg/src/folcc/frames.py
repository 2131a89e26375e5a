"""Differential forms on frame coordinates, the canonical forms theta_k and the
fiber integration along x_1.

Forms are stored as :class:`CoordForm`: a map from increasing index tuples
``(i_1 < ... < i_d)`` to sympy coefficients in the chart symbols
``y0, y1, ...`` (or ``x0, x1, ...``).  The exterior derivative differentiates
those coefficients symbolically, so every identity here is checked exactly.
"""

from functools import lru_cache
import math
import random
import re

import sympy as sp

from . import _series
from .errors import OrderMismatchError, RegularityError
from .jets import FrameCoordsY, Jet


@lru_cache(maxsize=None)
def coord(chart, i):
    return sp.Symbol(f"{chart}{i}", real=True)


def _sort_sign(idx):
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign, tuple(sorted(idx))


class CoordForm:
    """Differential form in one chart with symbolic coefficients."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart, terms=None):
        self.chart = chart
        clean = {}
        for idx, c in (terms or {}).items():
            sign, key = _sort_sign(tuple(idx))
            if sign == 0:
                continue
            clean[key] = clean.get(key, 0) + sign * sp.sympify(c)
        self.terms = {k: v for k, v in clean.items() if v != 0}

    @classmethod
    def d_coord(cls, chart, i):
        return cls(chart, {(i,): 1})

    @classmethod
    def function(cls, chart, f):
        return cls(chart, {(): f})

    def symbol(self, i):
        return coord(self.chart, i)

    @property
    def degree(self):
        degs = {len(k) for k in self.terms}
        if len(degs) > 1:
            raise ValueError("form is not homogeneous")
        return degs.pop() if degs else 0

    def _same_chart(self, other):
        if other.chart != self.chart:
            raise ValueError(f"chart mismatch: {self.chart} vs {other.chart}")

    def __add__(self, other):
        self._same_chart(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return CoordForm(self.chart, out)

    def __neg__(self):
        return CoordForm(self.chart, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        return CoordForm(self.chart, {k: scalar * v for k, v in self.terms.items()})

    __mul__ = __rmul__

    def __xor__(self, other):
        return self.wedge(other)

    def wedge(self, other):
        self._same_chart(other)
        out = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                sign, key = _sort_sign(ka + kb)
                if sign:
                    out[key] = out.get(key, 0) + sign * va * vb
        return CoordForm(self.chart, out)

    def d(self):
        """Exterior derivative."""
        out = {}
        for idx, c in self.terms.items():
            for s in sorted(c.free_symbols, key=lambda s: s.name):
                i = _index_of(s, self.chart)
                if i is None:
                    continue
                dc = sp.diff(c, s)
                if dc == 0:
                    continue
                sign, key = _sort_sign((i,) + idx)
                if sign:
                    out[key] = out.get(key, 0) + sign * dc
        return CoordForm(self.chart, out)

    def simplify(self):
        return CoordForm(self.chart, {k: sp.simplify(v) for k, v in self.terms.items()})

    def is_zero(self):
        return all(sp.simplify(v) == 0 for v in self.terms.values())

    def equals(self, other):
        return (self - other).is_zero()

    def max_index(self):
        idx = [i for k in self.terms for i in k]
        for c in self.terms.values():
            idx += [_index_of(s, self.chart) for s in c.free_symbols
                    if _index_of(s, self.chart) is not None]
        return max(idx, default=0)

    def pullback(self, chart, images):
        """Pull back along ``old_i = images[i]`` (sympy expressions in ``chart`` symbols).

        Indices missing from ``images`` map to the same-index symbol of ``chart``.
        """
        top = self.max_index()
        subs, dforms = {}, {}
        for i in range(top + 1):
            img = sp.sympify(images.get(i, coord(chart, i)))
            subs[coord(self.chart, i)] = img
            dforms[i] = CoordForm(chart, {(j,): sp.diff(img, coord(chart, j))
                                         for j in range(top + 1)
                                         if sp.diff(img, coord(chart, j)) != 0})
        result = CoordForm(chart)
        for idx, c in self.terms.items():
            term = CoordForm.function(chart, c.xreplace(subs))
            for i in idx:
                term = term.wedge(dforms[i])
            result = result + term
        return result.simplify()

    def to_x(self):
        """Pull a y-chart form back to the x-chart on the component ``y1 > 0``."""
        if self.chart != "y":
            raise ValueError("to_x expects a y-chart form")
        return self.pullback("x", {1: sp.exp(coord("x", 1))})

    def evaluate(self, point, *vectors):
        """Value on ``vectors`` at ``point`` (sequences indexed by coordinate)."""
        subs = {coord(self.chart, i): sp.nsimplify(v) if isinstance(v, int) else v
                for i, v in enumerate(point)}
        total = 0
        for idx, c in self.terms.items():
            if len(idx) != len(vectors):
                raise ValueError("number of vectors must equal the form degree")
            m = sp.Matrix([[_component(v, i) for i in idx] for v in vectors])
            total += c.xreplace(subs) * (m.det() if idx else 1)
        return total

    def to_json(self):
        return [{"indices": list(k), "coefficient": str(v)} for k, v in sorted(self.terms.items())]

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for idx, c in sorted(self.terms.items()):
            basis = "^".join(f"d{self.chart}{i}" for i in idx)
            parts.append(f"({c})*{basis}" if basis else f"({c})")
        return " + ".join(parts)

    __repr__ = __str__


def _component(v, i):
    return v[i] if i < len(v) else 0


def _index_of(symbol, chart):
    name = symbol.name
    if name.startswith(chart) and name[len(chart):].isdigit():
        return int(name[len(chart):])
    return None


# -- canonical forms ----------------------------------------------------------------


def theta(k):
    """Closed form of ``theta_k`` (``k = 0..3``) in the y-chart."""
    y = [coord("y", i) for i in range(5)]
    dy = [CoordForm.d_coord("y", i) for i in range(5)]
    if k == 0:
        return (-1 / y[1]) * dy[0]
    if k == 1:
        return (-1 / y[1]) * dy[1] + y[2] * dy[0]
    if k == 2:
        return (-y[1]) * dy[2] + (y[1] * (y[3] - 2 * y[2] ** 2)) * dy[0]
    if k == 3:
        return ((-y[1] ** 2) * dy[3] + (3 * y[2] * y[1] ** 2) * dy[2]
                + (y[1] ** 2 * (y[4] + 6 * y[2] ** 3 - 6 * y[2] * y[3])) * dy[0])
    raise ValueError("closed forms are implemented for k = 0..3 only")


def gvl():
    return theta(0) ^ theta(1) ^ theta(2)


def cl1():
    return theta(2) ^ theta(0)


@lru_cache(maxsize=None)
def _theta_callable(k):
    form = theta(k)
    syms = [coord("y", i) for i in range(5)]
    funcs = {idx[0]: sp.lambdify(syms, c, "math") for idx, c in form.terms.items()}
    return funcs


def theta_value(k, y, tangent):
    """Float value of the closed-form ``theta_k`` at y-coordinates ``y`` on ``tangent``."""
    yy = list(y) + [0] * (5 - len(y))
    return sum(f(*yy[:5]) * _component(tangent, i) for i, f in _theta_callable(k).items())


# -- Gelfand-Kazhdan evaluation ------------------------------------------------------


class Dual:
    """``a + b*eps`` with ``eps**2 = 0``: exact first-order perturbations."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a, self.b = a, b

    @property
    def real(self):
        return self.a

    @staticmethod
    def _lift(o):
        return o if isinstance(o, Dual) else Dual(o, 0)

    def __add__(self, o):
        o = self._lift(o)
        return Dual(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        return Dual(self.a * o.a, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        a = _series.qdiv(self.a, o.a)
        return Dual(a, _series.qdiv(self.b * o.a - self.a * o.b, o.a * o.a))

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"


def _tangent_in_z(frame, tangent, chart):
    """Perturbed frame ``z(u)`` as Dual numbers for a tangent vector given in ``chart``."""
    q = frame.order
    tau = list(tangent) + [0] * (q + 1 - len(tangent))
    if chart == "z":
        return [Dual(z, t) for z, t in zip(frame.derivs, tau)]
    if chart != "y":
        raise ValueError(f"unknown chart {chart!r}")
    y = FrameCoordsY.from_jet(frame).coords
    yd = [Dual(v, t) for v, t in zip(y, tau)]
    out = [yd[0], yd[1]]
    pw = yd[1]
    for p in range(2, q + 1):
        pw = pw * yd[1]
        out.append(yd[p] * pw)
    return out


def _horner(coeffs, inner):
    """``sum_j coeffs[j] * inner**j`` on series (``inner`` keeps its constant term)."""
    n = len(inner)
    result = [coeffs[-1]] + [0] * (n - 1)
    for c in reversed(coeffs[:-1]):
        result = _series.mul(result, inner)
        result[0] = result[0] + c
    return result


def _theta_dual(k, zdual):
    """``-d/du`` of component ``k`` of ``k_0^{-1} o k_u`` for a Dual-valued frame."""
    q = len(zdual) - 1
    base = [z.a for z in zdual]
    if _series.is_zero(base[1]):
        raise RegularityError("frame must have nonzero first derivative")
    inv = _series.revert(_series.factorial_scale(base))
    inner_derivs = [zdual[0] - base[0]] + zdual[1:]
    inner = _series.factorial_scale(inner_derivs)
    comp = _horner(inv, inner)
    value = comp[k]
    value = value if isinstance(value, Dual) else Dual(value, 0)
    return -(value.b * math.factorial(k))


def theta_numeric(k, frame, tangent, chart="y"):
    """``theta_k(tangent)`` at ``frame`` from the Gelfand-Kazhdan recipe.

    The frame curve ``u -> frame + u * tangent`` (in the given chart) is
    composed with the inverse of the frame and differentiated at ``u = 0``
    with dual numbers, so the derivative is exact (rational in rational mode).
    """
    if not frame.is_regular():
        raise RegularityError("frame must have nonzero first derivative")
    if k > frame.order - 1:
        raise OrderMismatchError(f"theta_{k} needs frame order >= {k + 1}, got {frame.order}")
    return _theta_dual(k, _tangent_in_z(frame, tangent, chart))


def _push_frame(h_coeffs, zdual):
    """``h o k_u`` as a Dual-valued frame; ``h_coeffs`` are Taylor coefficients of
    ``h`` at the unperturbed ``z_0`` (one order above the frame's)."""
    q = len(zdual) - 1
    base0 = zdual[0].a
    inner = _series.factorial_scale([zdual[0] - base0] + zdual[1:])
    comp = _horner(list(h_coeffs), inner)
    return _series.factorial_unscale(comp)[: q + 1]


def check_invariance(h, k, frame, h_jet=None):
    """Largest relative change of ``theta_k`` under the prolongation of ``h``.

    For each coordinate direction ``tau`` of the y-chart, compares
    ``theta_k(tau)`` at ``frame`` with ``theta_k`` of the pushed tangent at
    ``h~(frame)``.  ``h`` is a :class:`LocalDiffeo` (or anything with
    ``jet(x, order)``); ``h_jet`` may supply its jet at ``frame.value`` directly.
    """
    q = frame.order
    if k > q - 1:
        raise OrderMismatchError(f"theta_{k} needs frame order >= {k + 1}, got {q}")
    hj = h_jet if h_jet is not None else h.jet(frame.value, q + 1)
    if hj.order < q + 1:
        raise OrderMismatchError("h needs a jet one order above the frame")
    if _series.is_zero(hj[1]):
        raise RegularityError("h must be regular at the frame's point")
    h_coeffs = _series.factorial_scale(list(hj.derivs[: q + 2]))
    worst = 0
    for i in range(q + 1):
        tau = [0] * (q + 1)
        tau[i] = 1
        zd = _tangent_in_z(frame, tau, "y")
        before = _theta_dual(k, zd)
        after = _theta_dual(k, _push_frame(h_coeffs, zd))
        diff = abs(after - before)
        scale = max(1, abs(before))
        worst = max(worst, diff / scale)
    return worst


# -- identities ---------------------------------------------------------------------


def _dx(i):
    return CoordForm.d_coord("x", i)


def maurer_cartan_rhs(r):
    """``sum_k binom(r, k) theta_{r-k+1} ^ theta_k``."""
    total = CoordForm("y")
    for kk in range(r + 1):
        total = total + math.comb(r, kk) * (theta(r - kk + 1) ^ theta(kk))
    return total


def structure_identities():
    """Exact checks of the structure equations and the x-chart forms.

    Returns a dict ``name -> {"ok": bool, "difference": str}``.
    """
    t0, t1, t2 = theta(0), theta(1), theta(2)
    g = gvl()
    checks = {
        "d theta0 = theta1 ^ theta0": t0.d() - (t1 ^ t0),
        "d theta1 = theta2 ^ theta0": t1.d() - (t2 ^ t0),
        "d theta2 = theta3 ^ theta0 + theta2 ^ theta1": t2.d() - maurer_cartan_rhs(2),
        "gvl = theta1 ^ d theta1": g - (t1 ^ t1.d()),
        "cl1 = d theta1": cl1() - t1.d(),
        "gvl (x-chart) = -dx0 ^ dx1 ^ dx2": g.to_x() - (-1 * (_dx(0) ^ _dx(1) ^ _dx(2))),
        "cl1 (x-chart) = dx2 ^ dx0": cl1().to_x() - (_dx(2) ^ _dx(0)),
        "gysin(gvl) = theta2 ^ theta0": gysin(g.to_x()) - cl1().to_x(),
    }
    out = {}
    for name, diff in checks.items():
        diff = diff.simplify()
        out[name] = {"ok": diff.is_zero(), "difference": str(diff)}
    return out


# -- fiber integration --------------------------------------------------------------


class IntegrationError(ValueError):
    pass


def gysin(form):
    """Integration over the x_1 fiber ``[0, 1]``.

    Terms without ``dx1`` map to zero; ``dx1 ^ w`` maps to ``-(int_0^1 w dx1)``.
    Coefficients must be polynomial in ``x1``.
    """
    if form.chart != "x":
        raise ValueError("gysin expects an x-chart form")
    x1 = coord("x", 1)
    out = {}
    for idx, c in form.terms.items():
        if 1 not in idx:
            continue
        if not sp.sympify(c).is_polynomial(x1):
            raise IntegrationError(f"coefficient {c} is not polynomial in x1")
        pos = idx.index(1)
        rest = idx[:pos] + idx[pos + 1:]
        sign = -1 if pos % 2 else 1
        integral = sp.integrate(c, (x1, 0, 1))
        out[rest] = out.get(rest, 0) - sign * integral
    return CoordForm("x", out).simplify()


def fiber_boundary(form):
    """``-(w|_{x1=1} - w|_{x1=0})`` for the part of ``form`` without ``dx1``.

    With it, ``gysin(d w) + d gysin(w) = fiber_boundary(w)`` for polynomial
    coefficients (Stokes on the fiber).
    """
    x1 = coord("x", 1)
    out = {}
    for idx, c in form.terms.items():
        if 1 in idx:
            continue
        out[idx] = -(c.subs(x1, 1) - c.subs(x1, 0))
    return CoordForm("x", out).simplify()


def parse_form(spec, chart="x"):
    """Parse ``"x1^2*dx1^dx0 - dx2^dx0"`` style text into a :class:`CoordForm`.

    Each summand is an optional coefficient (sympy syntax, ``^`` for powers)
    followed by ``*`` and a wedge of ``d<chart><i>`` factors joined by ``^``;
    a summand without factors is a 0-form.  The names ``gvl`` and ``cl1`` stand
    for the canonical forms.
    """
    text = spec.strip()
    if text in ("gvl", "cl1"):
        form = gvl() if text == "gvl" else cl1()
        return form.to_x() if chart == "x" else form
    names = {f"{chart}{i}": coord(chart, i) for i in range(10)}
    tail = re.compile(rf"(d{chart}\d+(?:\s*\^\s*d{chart}\d+)*)\s*$")
    result = CoordForm(chart)
    for chunk in _split_terms(text):
        chunk = chunk.strip()
        if not chunk:
            continue
        m = tail.search(chunk)
        factors = re.findall(rf"d{chart}(\d+)", m.group(1)) if m else []
        coef_text = chunk[:m.start()] if m else chunk
        coef_text = coef_text.strip().rstrip("*").strip()
        if coef_text in ("", "+"):
            coef_text = "1"
        elif coef_text == "-":
            coef_text = "-1"
        try:
            coef = sp.sympify(coef_text.replace("^", "**"), locals=names)
        except (sp.SympifyError, SyntaxError, TypeError) as exc:
            raise ValueError(f"cannot parse form term {chunk!r}") from exc
        result = result + CoordForm(chart, {tuple(int(i) for i in factors): coef})
    return result


def _split_terms(text):
    """Split on top-level ``+``/``-`` (keeping the sign with the term)."""
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > 0 and text[i - 1] not in "*/^(eE":
            terms.append(text[start:i])
            start = i
    terms.append(text[start:])
    return terms


# -- randomized sweep ----------------------------------------------------------------


def random_polynomial_jet(rng, base, order, degree=4):
    """Jet at ``base`` of ``base + sum_i c_i (x - base)**i``, ``c_1`` bounded away from 0."""
    c1 = rng.choice((-1, 1)) * rng.uniform(0.5, 2.0)
    coeffs = [rng.uniform(-1, 1), c1] + [rng.uniform(-1, 1) for _ in range(degree - 1)]
    derivs = [c * math.factorial(i) for i, c in enumerate(coeffs)]
    derivs = (derivs + [0.0] * (order + 1))[: order + 1]
    return Jet(base, derivs)


def random_frame(rng, order):
    z1 = rng.choice((-1, 1)) * rng.uniform(0.5, 2.0)
    return Jet(0.0, [rng.uniform(-1, 1), z1] + [rng.uniform(-1, 1) for _ in range(order - 1)])


def invariance_sweep(count=100, seed=0, order=5, degree=4):
    """Random polynomial diffeos and frames: canonicity of theta_0..theta_3 and
    agreement of the Gelfand-Kazhdan evaluation with the closed forms.

    Returns the worst relative invariance residual and the worst relative
    mismatch between :func:`theta_numeric` and :func:`theta_value`.
    """
    rng = random.Random(seed)
    worst_inv, worst_theta = 0.0, 0.0
    for _ in range(count):
        frame = random_frame(rng, order)
        h = random_polynomial_jet(rng, frame.value, order + 1, degree)
        y = FrameCoordsY.from_jet(frame).coords
        for k in range(4):
            worst_inv = max(worst_inv, check_invariance(None, k, frame, h_jet=h))
            for i in range(min(order, 5) + 1):
                tau = [0] * (order + 1)
                tau[i] = 1
                a = theta_numeric(k, frame, tau)
                b = theta_value(k, y, tau)
                worst_theta = max(worst_theta, abs(a - b) / max(1.0, abs(b)))
    return {"count": count, "seed": seed, "order": order,
            "max_invariance_residual": worst_inv, "max_theta_mismatch": worst_theta}
