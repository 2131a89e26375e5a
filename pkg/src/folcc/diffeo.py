"""One-dimensional local diffeomorphisms and pseudogroup presentations.

A :class:`LocalDiffeo` is one of

``explicit``
    a closed-form expression ``phi(x)``;
``conjugated_shift``
    ``phi(x) = f^{-1}(f(x) + shift)`` for a strictly monotone profile ``f``;
``lift``
    a closed-form lift ``F`` of a circle map, ``F(z + 1) = F(z) + 1``;
``piecewise``
    a list of ``((a, b), LocalDiffeo)`` pieces, each valid on ``[a, b)``.

Every kind evaluates fast on floats and returns derivative stacks as jets.
"""

from dataclasses import dataclass, field
import math

from . import _series
from . import expr as ex
from .errors import ConfigError, DomainError, PrecisionLossError, RegularityError
from .jets import Jet

INF = math.inf
_EPS = 2.0 ** -52
#: the shift must survive the addition ``f(x) + shift`` to this relative accuracy
SHIFT_RESOLUTION = 1e-6


def _as_expr(e):
    if isinstance(e, str):
        return ex.parse(e)
    return ex.as_node(e)


class _Profile:
    """Float evaluation of a monotone profile and its inverse."""

    def __init__(self, node, domain):
        self.node = node
        self.domain = domain
        self._f = ex.compile_float(node)
        self._df = ex.compile_float(ex.differentiate(node))
        lo, hi = domain
        if math.isfinite(lo) and math.isfinite(hi):
            mid, half = 0.5 * (lo + hi), 0.25 * (hi - lo)
        else:
            mid = lo + 1.0 if math.isfinite(lo) else (hi - 1.0 if math.isfinite(hi) else 0.0)
            half = 0.5
        try:
            rising = self._f(mid + half) > self._f(mid - half)
        except (OverflowError, ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot orient the profile near {mid!r}: {exc}") from exc
        self.orientation = 1 if rising else -1

    def value(self, x):
        try:
            return self._f(x)
        except OverflowError:
            lo, hi = self.domain
            mid = 0.0 if not (math.isfinite(lo) and math.isfinite(hi)) else 0.5 * (lo + hi)
            return self.orientation * INF if x > mid else -self.orientation * INF
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"profile undefined at {x!r}: {exc}") from exc

    def slope(self, x):
        try:
            return self._df(x)
        except (OverflowError, ValueError, ZeroDivisionError):
            return math.nan

    def _bracket(self, target, guess):
        """Points ``a < b`` in the domain with ``f(a) - target``, ``f(b) - target`` of opposite sign."""
        lo, hi = self.domain
        s = self.orientation

        def below(x):
            return s * (self.value(x) - target) < 0

        x0 = guess if guess is not None and lo < guess < hi else (
            0.5 * (lo + hi) if math.isfinite(lo) and math.isfinite(hi) else 0.0)
        if below(x0):
            a = x0
            step = 1.0
            b = x0 + step
            while True:
                if b >= hi:
                    return a, hi
                if not below(b):
                    return a, b
                a, step = b, step * 2
                b = a + step
                if step > 1e300:
                    raise DomainError(f"value {target!r} is outside the profile's range")
        b = x0
        step = 1.0
        a = x0 - step
        while True:
            if a <= lo:
                return lo, b
            if below(a):
                return a, b
            b, step = a, step * 2
            a = b - step
            if step > 1e300:
                raise DomainError(f"value {target!r} is outside the profile's range")

    def inverse(self, target, guess=None):
        """``f^{-1}(target)`` by safeguarded Newton on a bracket."""
        a, b = self._bracket(target, guess)
        s = self.orientation
        lo, hi = self.domain
        if a == lo:
            a = math.nextafter(lo, hi)
        if b == hi:
            b = math.nextafter(hi, lo)
        x = guess if guess is not None and a < guess < b else 0.5 * (a + b)
        for _ in range(200):
            fx = self.value(x)
            g = s * (fx - target)
            if g == 0:
                return x
            if g < 0:
                a = x
            else:
                b = x
            d = self.slope(x)
            step = None
            if d and math.isfinite(d) and math.isfinite(fx):
                newton = x - (fx - target) / d
                if a < newton < b:
                    step = newton
            if step is None:
                step = 0.5 * (a + b)
            if abs(step - x) <= 4e-16 * max(1.0, abs(x)) or b - a <= 4e-16 * max(1.0, abs(a)):
                return step
            x = step
        return x


class LocalDiffeo:
    """A regular map of an interval of the line into the line."""

    def __init__(self, kind, *, domain=(-INF, INF), expr=None, profile=None, shift=None,
                 pieces=None, name=None, lift=False):
        if kind not in ("explicit", "conjugated_shift", "lift", "piecewise"):
            raise ConfigError(f"unknown diffeo kind {kind!r}")
        self.kind = kind
        self.domain = (float(domain[0]), float(domain[1]))
        self.name = name
        self.expr = _as_expr(expr) if expr is not None else None
        self.shift = shift
        self.pieces = pieces
        self.is_lift = lift or kind == "lift"
        if kind in ("explicit", "lift"):
            if self.expr is None:
                raise ConfigError(f"{kind} diffeo needs an expression")
            self._f = ex.compile_float(self.expr)
        elif kind == "conjugated_shift":
            if profile is None or shift is None:
                raise ConfigError("conjugated_shift needs a profile and a shift")
            self.profile_expr = _as_expr(profile)
            self.profile = _Profile(self.profile_expr, self.domain)
        else:
            if not pieces:
                raise ConfigError("piecewise diffeo needs at least one piece")
            self.pieces = sorted(((float(a), float(b)), p) for (a, b), p in pieces)
        if self.is_lift and kind in ("explicit", "lift"):
            self._check_lift()

    # -- constructors --

    @classmethod
    def explicit(cls, e, domain=(-INF, INF), name=None):
        return cls("explicit", expr=e, domain=domain, name=name)

    @classmethod
    def conjugated_shift(cls, profile, shift, domain=(-INF, INF), name=None, lift=False):
        return cls("conjugated_shift", profile=profile, shift=shift, domain=domain,
                   name=name, lift=lift)

    @classmethod
    def lift_of_circle_map(cls, e, name=None):
        return cls("lift", expr=e, name=name)

    @classmethod
    def piecewise(cls, pieces, name=None):
        lo = min(a for (a, _), _ in pieces)
        hi = max(b for (_, b), _ in pieces)
        return cls("piecewise", pieces=pieces, domain=(lo, hi), name=name)

    @classmethod
    def identity(cls, domain=(-INF, INF)):
        return cls.explicit(ex.X, domain, name="id")

    def _check_lift(self, samples=17):
        for i in range(samples):
            z = -2.0 + 4.0 * i / (samples - 1)
            if abs(self(z + 1) - self(z) - 1) > 1e-10:
                raise ConfigError(f"not a lift of a circle map: F(z+1) != F(z)+1 at z={z}")

    # -- evaluation --

    def in_domain(self, x):
        lo, hi = self.domain
        return lo < x < hi or (self.kind == "piecewise" and x == lo)

    def _piece(self, x):
        for (a, b), p in self.pieces:
            if a <= x < b:
                return p
        raise DomainError(f"{x!r} is outside every piece")

    def __call__(self, x):
        if self.kind in ("explicit", "lift"):
            try:
                return self._f(x)
            except (ValueError, ZeroDivisionError, OverflowError) as exc:
                raise DomainError(f"cannot evaluate at {x!r}: {exc}") from exc
        if self.kind == "piecewise":
            return self._piece(x)(x)
        p = self.profile
        fx = p.value(x)
        target = fx + self.shift
        if self.shift != 0 and (not math.isfinite(fx)
                                or abs(target - fx - self.shift) > SHIFT_RESOLUTION * abs(self.shift)):
            raise PrecisionLossError(
                f"shift {self.shift!r} is below the float resolution of f({x!r}) = {fx!r}")
        d = p.slope(x)
        guess = x + self.shift / d if d and math.isfinite(d) else x
        return p.inverse(target, guess)

    def displacement(self, x):
        """``phi(x) - x``; raises :class:`PrecisionLossError` when a conjugated
        shift moves ``x`` by less than a few ulps, so the difference is noise."""
        if self.kind == "piecewise":
            return self._piece(x).displacement(x)
        if self.kind == "conjugated_shift" and self.shift != 0:
            d = self.profile.slope(x)
            if not (math.isfinite(d) and d != 0) or \
                    abs(self.shift / d) <= 16 * _EPS * max(1.0, abs(x)):
                raise PrecisionLossError(f"displacement at {x!r} is below float resolution")
        return self(x) - x

    def jet(self, x, order):
        """Derivative stack of the map at ``x`` (exact for rational explicit maps)."""
        if self.kind in ("explicit", "lift"):
            return ex.derivatives(self.expr, x, order)
        if self.kind == "piecewise":
            # at a junction the one-sided jet of whichever piece is defined there
            last = None
            for (a, b), p in self.pieces:
                if a <= x <= b:
                    try:
                        return p.jet(x, order)
                    except DomainError as exc:
                        last = exc
            raise last or DomainError(f"{x!r} is outside every piece")
        y = self(x)
        fx = ex.derivatives(self.profile_expr, x, order)
        fy = ex.derivatives(self.profile_expr, y, order)
        if _series.is_zero(fy[1], 1e-300):
            raise RegularityError(f"profile is critical at {y!r}")
        inv = _series.revert(fy.coeffs())
        inner = fx.coeffs()
        return Jet.from_coeffs(x, [y] + _series.compose(inv, inner)[1:])

    def derivative(self, x):
        return self.jet(x, 1)[1]

    def iterate(self, x, n):
        step = self.fast_step()
        for _ in range(n):
            x = step(x)
        return x

    def fast_step(self):
        """Float callable for hot loops.

        For a conjugated shift this is plain Newton from a first-order guess,
        falling back to the safeguarded solver when Newton stalls.
        """
        if self.kind in ("explicit", "lift"):
            return self._f
        if self.kind == "piecewise":
            return self.__call__
        f, df, s, slow = self.profile._f, self.profile._df, self.shift, self.__call__

        def step(x):
            t = f(x) + s
            y = x + s / df(x)
            for _ in range(12):
                d = (f(y) - t) / df(y)
                y -= d
                if abs(d) <= 2e-16 * (1.0 + abs(y)):
                    return y
            return slow(x)

        return step

    def power(self, n):
        """The ``n``-th iterate as a :class:`LocalDiffeo` (``n >= 1``)."""
        if n < 1:
            raise ValueError("power needs n >= 1")
        if self.kind == "conjugated_shift":
            return LocalDiffeo.conjugated_shift(self.profile_expr, n * self.shift,
                                                self.domain, lift=self.is_lift)
        if self.kind in ("explicit", "lift"):
            node = self.expr
            for _ in range(n - 1):
                node = ex.substitute(self.expr, node)
            return LocalDiffeo(self.kind, expr=node, domain=self.domain, lift=self.is_lift)
        raise ValueError("power is not available for piecewise maps")

    def boundaries(self):
        if self.kind != "piecewise":
            return []
        out = []
        for (a, b), _ in self.pieces:
            out.extend([a, b])
        return sorted(set(out))

    def describe(self):
        if self.kind in ("explicit", "lift"):
            return f"{self.kind}:{ex.to_source(self.expr)}"
        if self.kind == "conjugated_shift":
            return f"conj:{ex.to_source(self.profile_expr)} | {self.shift!r}"
        return "piecewise[" + ", ".join(
            f"[{a!r}, {b!r}): {p.describe()}" for (a, b), p in self.pieces) + "]"

    def __repr__(self):
        return f"LocalDiffeo({self.describe()}, domain={self.domain})"


def reeb_holonomy(profile, name="phi"):
    """``f^{-1}(f(x) + 1)`` on ``(0, 1)`` extended by the identity on ``[1, sqrt 2)``."""
    inner = LocalDiffeo.conjugated_shift(profile, 1, domain=(0.0, 1.0))
    ident = LocalDiffeo.identity((1.0, math.sqrt(2)))
    return LocalDiffeo.piecewise([((0.0, 1.0), inner), ((1.0, math.sqrt(2)), ident)], name=name)


def reeb_mirror_holonomy(profile, name="psi"):
    """Holonomy from the second solid torus: identity on ``(0, 1]``, a shift in
    the coordinate ``s = sqrt(2 - x^2)`` on ``(1, sqrt 2)``."""
    node = _as_expr(profile)
    mirrored = ex.substitute(node, ex.parse("sqrt(2 - x^2)"))
    inner = LocalDiffeo.conjugated_shift(mirrored, 1, domain=(1.0, math.sqrt(2)))
    ident = LocalDiffeo.identity((0.0, 1.0))
    return LocalDiffeo.piecewise(
        [((0.0, 1.0), ident), ((1.0, math.sqrt(2)), inner)], name=name)


# -- presentations ----------------------------------------------------------------


@dataclass
class Generator:
    name: str
    diffeo: LocalDiffeo
    source: str
    target: str


@dataclass
class PseudogroupPresentation:
    """Named chart intervals and generating local diffeomorphisms between them.

    ``windows`` optionally restricts sampling on unbounded charts.
    """

    charts: dict
    generators: list
    name: str = ""
    description: str = ""
    windows: dict = field(default_factory=dict)

    def __post_init__(self):
        for g in self.generators:
            for c in (g.source, g.target):
                if c not in self.charts:
                    raise ConfigError(f"generator {g.name!r} refers to unknown chart {c!r}")

    def sample_interval(self, gen):
        lo, hi = self.charts[gen.source]
        dlo, dhi = gen.diffeo.domain
        lo, hi = max(lo, dlo), min(hi, dhi)
        wlo, whi = self.windows.get(gen.source, (-4.0, 4.0))
        if not math.isfinite(lo):
            lo = wlo
        if not math.isfinite(hi):
            hi = whi
        return lo, hi

    def grid(self, gen, samples=256, trim=0.01):
        lo, hi = self.sample_interval(gen)
        width = hi - lo
        a, b = lo + trim * width, hi - trim * width
        if samples == 1:
            return [0.5 * (a + b)]
        return [a + (b - a) * i / (samples - 1) for i in range(samples)]

    def check_images(self, samples=64):
        """Generators whose sampled images leave the target chart."""
        bad = []
        for g in self.generators:
            lo, hi = self.charts[g.target]
            for x in self.grid(g, samples):
                try:
                    y = g.diffeo(x)
                except DomainError:
                    continue
                if not lo <= y <= hi:
                    bad.append((g.name, x, y))
                    break
        return bad
