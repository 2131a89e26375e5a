"""Transverse affine and projective connections as cocycles over a presentation.

An affine connection is a function ``T_c`` per chart ``c`` such that every
generator ``phi`` from chart ``w`` to chart ``t`` satisfies

    T_t(phi(w)) + phi''(w) / phi'(w)**2 = T_w(w) / phi'(w)

and a projective connection is a function ``q_c`` per chart with

    q_t(phi(w)) * phi'(w)**2 = q_w(w) - S(phi)(w),

``S`` being the Schwarzian derivative.
"""

from dataclasses import dataclass, field
import math

from . import expr as ex
from .diffeo import LocalDiffeo
from .errors import ConfigError, DomainError, RegularityError

DEFAULT_SAMPLES = 256
DEFAULT_TRIM = 0.01
DEFAULT_TOL = 1e-8


def schwarzian_from_derivs(d1, d2, d3):
    if d1 == 0:
        raise RegularityError("Schwarzian needs a nonzero first derivative")
    r = d2 / d1
    return d3 / d1 - 1.5 * r * r


def schwarzian(h, w):
    """``h'''/h' - (3/2) (h''/h')**2`` at ``w``.

    ``h`` is a :class:`LocalDiffeo`, an expression or expression text.
    """
    if isinstance(h, LocalDiffeo):
        j = h.jet(w, 3)
    else:
        node = ex.parse(h) if isinstance(h, str) else h
        j = ex.derivatives(node, w, 3)
    return schwarzian_from_derivs(j[1], j[2], j[3])


@dataclass
class ConnectionCandidate:
    """Per-chart Christoffel functions (``kind="affine"``) or ``q`` functions
    (``kind="projective"``)."""

    kind: str
    functions: dict
    description: str = ""
    _compiled: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in ("affine", "projective"):
            raise ConfigError(f"unknown connection kind {self.kind!r}")
        self.functions = {c: ex.parse(e) if isinstance(e, str) else ex.as_node(e)
                          for c, e in self.functions.items()}

    @classmethod
    def constant_zero(cls, charts, kind="affine"):
        return cls(kind, {c: ex.Const(0) for c in charts}, "zero")

    def value(self, chart, x):
        if chart not in self.functions:
            raise ConfigError(f"candidate has no function on chart {chart!r}")
        f = self._compiled.get(chart)
        if f is None:
            f = self._compiled[chart] = ex.compile_float(self.functions[chart])
        try:
            return f(x)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"candidate undefined at {x!r} on {chart!r}: {exc}") from exc

    def to_json(self):
        return {"kind": self.kind, "description": self.description,
                "functions": {c: ex.to_source(e) for c, e in sorted(self.functions.items())}}


def affine_residual(cand, gen, w):
    j = gen.diffeo.jet(w, 2)
    t, d1, d2 = float(j[0]), float(j[1]), float(j[2])
    if d1 == 0:
        raise RegularityError(f"{gen.name} is critical at {w!r}")
    return cand.value(gen.target, t) + d2 / (d1 * d1) - cand.value(gen.source, w) / d1


def projective_residual(cand, gen, w):
    j = gen.diffeo.jet(w, 3)
    t, d1, d2, d3 = (float(v) for v in j.derivs[:4])
    s = schwarzian_from_derivs(d1, d2, d3)
    return cand.value(gen.target, t) * d1 * d1 - cand.value(gen.source, w) + s


def _verify(pres, cand, residual, samples, trim, tol):
    per_gen = {}
    worst = 0.0
    ok = True
    for gen in pres.generators:
        grid = pres.grid(gen, samples, trim)
        gmax, where, errors, done = 0.0, None, [], 0
        for w in grid:
            try:
                r = abs(residual(cand, gen, w))
            except (DomainError, RegularityError, ConfigError) as exc:
                errors.append({"x": w, "error": str(exc)})
                continue
            if not math.isfinite(r):
                errors.append({"x": w, "error": "non-finite residual"})
                continue
            done += 1
            if r > gmax:
                gmax, where = r, w
        passed = done > 0 and not errors and gmax <= tol
        ok &= passed
        worst = max(worst, gmax)
        per_gen[gen.name] = {"max_residual": gmax, "argmax": where, "samples": done,
                             "errors": errors, "passed": passed}
    return {"kind": cand.kind, "tolerance": tol, "max_residual": worst, "passed": ok,
            "generators": per_gen, "candidate": cand.to_json()}


def verify_affine_connection(pres, cand, samples=DEFAULT_SAMPLES, trim=DEFAULT_TRIM,
                             tol=DEFAULT_TOL):
    """Maximum cocycle residual per generator on a uniform grid.

    The grid has ``samples`` points per generator domain with ``trim`` of the
    width cut from each end; PASS iff every residual is at most ``tol``.
    """
    if cand.kind != "affine":
        raise ConfigError("verify_affine_connection needs an affine candidate")
    return _verify(pres, cand, affine_residual, samples, trim, tol)


def verify_projective_connection(pres, cand, samples=DEFAULT_SAMPLES, trim=DEFAULT_TRIM,
                                 tol=DEFAULT_TOL):
    if cand.kind != "projective":
        raise ConfigError("verify_projective_connection needs a projective candidate")
    return _verify(pres, cand, projective_residual, samples, trim, tol)


def connection_from_conjugacy(f, charts, samples=64):
    """Affine candidate ``T = f''/f'`` on every chart in ``charts``.

    If ``f`` conjugates each generator to a translation (``f o phi = f + a``),
    differentiating twice shows that ``f''/f'`` satisfies the affine cocycle.
    ``f`` is an expression, expression text, or an explicit/lift
    :class:`LocalDiffeo`.
    """
    if isinstance(f, LocalDiffeo):
        if f.expr is None:
            raise ConfigError("connection_from_conjugacy needs a closed-form conjugacy")
        node = f.expr
    else:
        node = ex.parse(f) if isinstance(f, str) else ex.as_node(f)
    d1 = ex.differentiate(node)
    d2 = ex.differentiate(d1)
    fd1 = ex.compile_float(d1)
    for i in range(samples):
        x = i / samples
        try:
            v = fd1(x)
        except (ValueError, ZeroDivisionError, OverflowError):
            continue
        if v == 0:
            raise RegularityError(f"conjugacy is critical at {x!r}")
    t = ex.Const(0) if not ex.depends_on_x(d2) and ex.evaluate(d2, 0) == 0 else d2 / d1
    names = list(charts)
    return ConnectionCandidate("affine", {c: t for c in names},
                               f"f''/f' for f = {ex.to_source(node)}")
