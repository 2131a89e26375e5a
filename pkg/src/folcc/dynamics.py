"""Circle and interval dynamics: rotation numbers, Diophantine estimates,
conjugacy residuals, fixed-point classification and the Reeb holonomy probe."""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import mpmath

from . import expr as ex
from .diffeo import LocalDiffeo, _Profile
from .errors import DomainError, PrecisionLossError

# -- rotation numbers ----------------------------------------------------------


@dataclass
class RotationEstimate:
    rho: float
    raw: float
    bound: float
    iterations: int
    seed: float
    method: str

    def to_json(self):
        return {"rho": self.rho, "raw": self.raw, "bound": self.bound,
                "iterations": self.iterations, "seed": self.seed, "method": self.method}


def _reduce_mod1(value):
    """Reduce into ``(0, 1]``."""
    r = value - math.floor(value)
    return 1.0 if r == 0 else r


def circle_distance(a, b):
    d = (a - b) % 1.0
    return min(d, 1.0 - d)


def rotation_number(phi, iterations, z=0.0, method="auto"):
    """Birkhoff estimate ``(phi^n(z) - z) / n`` with the bound ``|rho - estimate| <= 1/n``.

    ``method="iterate"`` applies the map ``n`` times, keeping the integer part of
    the orbit exact.  ``"auto"`` uses ``phi^n = f^{-1}(f + n*shift)`` for a
    conjugated shift, which needs a single inversion, and iterates otherwise.
    """
    if not getattr(phi, "is_lift", False):
        raise DomainError("rotation_number needs the lift of a circle map")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if method not in ("auto", "iterate"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and phi.kind == "conjugated_shift":
        displacement = phi.power(iterations)(z) - z
        used = "shift-power"
    else:
        step = phi.fast_step()
        x, whole = z - math.floor(z), 0
        start = x
        for _ in range(iterations):
            x = step(x)
            m = math.floor(x)
            if m:
                x -= m
                whole += m
        displacement = whole + (x - start)
        used = "iterate"
    raw = displacement / iterations
    return RotationEstimate(_reduce_mod1(raw), raw, 1.0 / iterations, iterations, z, used)


# -- Diophantine exponent ---------------------------------------------------------


@dataclass
class Convergent:
    p: int
    q: int
    error: float
    exponent: float

    def to_json(self):
        return {"p": self.p, "q": self.q, "error": self.error, "exponent": self.exponent}


@dataclass
class DiophantineReport:
    alpha: float
    cap: int
    exponent: float
    constant: float
    sup_exponent: float
    tail_sup: float
    liouville_suspect: bool
    partial_quotients: list
    witnesses: list = field(default_factory=list)

    def to_json(self):
        return {"alpha": self.alpha, "cap": self.cap, "exponent": self.exponent,
                "constant": self.constant, "sup_exponent": self.sup_exponent,
                "tail_sup": self.tail_sup, "liouville_suspect": self.liouville_suspect,
                "partial_quotients": self.partial_quotients,
                "witnesses": [w.to_json() for w in self.witnesses]}


_MP_UNARY = {"exp": mpmath.exp, "ln": mpmath.log, "sin": mpmath.sin, "cos": mpmath.cos,
             "sqrt": mpmath.sqrt, "abs": abs, "neg": lambda a: -a}


def mp_evaluate(node, x=0):
    """High-precision value of an expression (current ``mpmath.mp`` precision)."""
    if isinstance(node, ex.Var):
        return mpmath.mpf(x)
    if isinstance(node, ex.Const):
        if node.name == "pi":
            return +mpmath.pi
        v = Fraction(node.value)
        return mpmath.mpf(v.numerator) / v.denominator
    if isinstance(node, ex.Unary):
        return _MP_UNARY[node.op](mp_evaluate(node.arg, x))
    a, b = mp_evaluate(node.left, x), mp_evaluate(node.right, x)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    return a ** b


def liouville_partial_sum(terms):
    """``sum_{k=1}^{terms} 10^(-k!)`` as an exact fraction."""
    return sum(Fraction(1, 10 ** math.factorial(k)) for k in range(1, terms + 1))


def _continued_fraction(alpha, cap, dps):
    """Convergents ``(p, q)`` of ``alpha`` with ``q <= cap`` and the partial quotients."""
    exact = isinstance(alpha, (int, Fraction))
    x = Fraction(alpha) if exact else alpha
    quotients, convs = [], []
    p0, q0, p1, q1 = 0, 1, 1, 0
    tiny = mpmath.mpf(10) ** (-(dps - 8))
    while True:
        a = math.floor(x) if exact else int(mpmath.floor(x))
        p, q = a * p1 + p0, a * q1 + q0
        if q > cap:
            break
        quotients.append(a)
        convs.append((p, q))
        p0, q0, p1, q1 = p1, q1, p, q
        frac = x - a
        if frac == 0 or (not exact and abs(frac) < tiny):
            raise DomainError(f"alpha is rational ({p}/{q}) within the denominator cap")
        x = 1 / frac
    return convs, quotients


#: 355/113 gives pi - 3 a window exponent of 1.2 at cap 1e4
LIOUVILLE_THRESHOLD = 1.5


def diophantine_exponent(alpha, denominator_cap, dps=60):
    """Empirical Diophantine exponent of ``alpha`` from its convergents.

    ``alpha`` may be a number, a :class:`~fractions.Fraction` (kept exact), an
    ``mpmath.mpf`` or an expression string (evaluated at ``dps`` digits).

    The reported ``exponent`` is ``slope - 2`` for the least-squares fit of
    ``-ln|alpha - p/q|`` against ``ln q`` over convergents with
    ``q >= sqrt(cap)`` (all convergents when fewer than three qualify);
    ``sup_exponent`` is the raw supremum of ``-ln|alpha - p/q| / ln q - 2`` and
    ``constant`` is ``min q^(2 + max(exponent, 0)) |alpha - p/q|`` over the same
    tail.  ``liouville_suspect`` is set when the per-window supremum grows from
    ``[cap^(1/4), cap^(1/2))`` to ``[cap^(1/2), cap]`` and exceeds
    ``LIOUVILLE_THRESHOLD``.
    """
    if denominator_cap < 2:
        raise ValueError("denominator cap must be >= 2")
    with mpmath.workdps(dps):
        if isinstance(alpha, str):
            alpha = mp_evaluate(ex.parse(alpha))
        elif isinstance(alpha, float):
            alpha = mpmath.mpf(alpha)
        convs, quotients = _continued_fraction(alpha, denominator_cap, dps)
        exact = isinstance(alpha, (int, Fraction))
        rows = []
        for p, q in convs:
            if q < 2:
                continue
            err = abs(Fraction(alpha) - Fraction(p, q)) if exact else abs(alpha - mpmath.mpf(p) / q)
            if err == 0:
                continue
            log_err = float(mpmath.log(mpmath.mpf(err.numerator) / err.denominator)) \
                if exact else float(mpmath.log(err))
            rows.append((p, q, log_err))
    if not rows:
        raise DomainError("no convergent with q >= 2 below the cap")
    witnesses = [Convergent(p, q, math.exp(le), -le / math.log(q) - 2) for p, q, le in rows]
    sup_exponent = max(w.exponent for w in witnesses)
    root = math.sqrt(denominator_cap)
    tail = [w for w in witnesses if w.q >= root]
    fit = tail if len(tail) >= 3 else witnesses
    exponent = _fit_exponent(fit)
    beta = max(exponent, 0.0)
    constant = min(w.q ** (2 + beta) * w.error for w in fit)
    prev = [w.exponent for w in witnesses if denominator_cap ** 0.25 <= w.q < root]
    tail_sup = max((w.exponent for w in tail), default=-math.inf)
    prev_sup = max(prev, default=-math.inf)
    suspect = tail_sup > LIOUVILLE_THRESHOLD and tail_sup > prev_sup
    value = float(alpha)
    return DiophantineReport(value, denominator_cap, exponent, constant, sup_exponent,
                             tail_sup, suspect, quotients, witnesses)


def _fit_exponent(rows):
    if len(rows) == 1:
        return rows[0].exponent
    xs = [math.log(w.q) for w in rows]
    ys = [-math.log(w.error) for w in rows]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxx = sum((a - mx) ** 2 for a in xs)
    sxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    return sxy / sxx - 2


# -- conjugacy --------------------------------------------------------------------


def verify_conjugacy(phi, f, alpha, grid=None, samples=256):
    """``max_z dist(f(phi(z)), f(z) + alpha)`` on the circle."""
    if grid is None:
        grid = [i / samples for i in range(samples)]
    worst, where = 0.0, None
    for z in grid:
        r = circle_distance(f(phi(z)), f(z) + alpha)
        if r > worst:
            worst, where = r, z
    return {"max_residual": worst, "argmax": where, "samples": len(grid)}


# -- fixed points -----------------------------------------------------------------


@dataclass
class FixedPoint:
    point: float
    derivative: float
    kind: str
    semi_isolated: str
    resolution: dict

    def to_json(self):
        return {"point": self.point, "derivative": self.derivative, "class": self.kind,
                "semi_isolated": self.semi_isolated, "resolution": self.resolution}


def _displacement(phi, x):
    """``phi(x) - x``, or ``None`` when the map cannot resolve it at ``x``.

    A nonzero displacement within a few ulps of ``x`` is float noise rather
    than a measurement, so it counts as unresolved.
    """
    try:
        g = phi.displacement(x)
    except DomainError:
        return None
    if g != 0 and abs(g) <= 16 * _EPS * max(1.0, abs(x)):
        return None
    return g


_EPS = 2.0 ** -52


def _is_fixed(g):
    return g is not None and g == 0


def _bisect_root(phi, a, ga, b, tol):
    """Sign change of ``phi(x) - x`` on ``[a, b]`` refined to width ``tol``."""
    for _ in range(200):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        gm = _displacement(phi, m)
        if gm is None:
            break
        if gm == 0:
            return m
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


def _slope_defect(phi, x):
    try:
        return float(phi.jet(x, 1)[1]) - 1.0
    except (DomainError, ValueError):
        return None


def _tangency(phi, a, b):
    """Fixed point in ``(a, b)`` where ``phi - x`` touches zero without crossing.

    Bisects on ``phi' - 1`` to full float resolution and keeps the result
    only if the displacement there is zero or below what the map resolves.
    """
    ga, gb = _slope_defect(phi, a), _slope_defect(phi, b)
    if ga is None or gb is None or (ga > 0) == (gb > 0):
        return None
    for _ in range(200):
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        gm = _slope_defect(phi, m)
        if gm is None:
            return None
        if gm == 0:
            a = b = m
            break
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b = m
    p = 0.5 * (a + b)
    g = _displacement(phi, p)
    return p if g is None or g == 0 else None


def _refine_run_end(phi, inside, outside, tol):
    """Edge of a run of fixed points between a fixed sample and a non-fixed one."""
    lo, hi = sorted((inside, outside))
    for b in phi.boundaries():
        if lo <= b <= hi:
            return b
    for _ in range(200):
        if abs(outside - inside) <= tol:
            break
        m = 0.5 * (inside + outside)
        if _is_fixed(_displacement(phi, m)):
            inside = m
        else:
            outside = m
    return inside


def _side_free(phi, p, direction, eps0, per_level, floor):
    """Probe ``(p, p + direction*eps)`` for ``eps = eps0 / 2**j`` down to ``floor``.

    Returns ``(free, resolution)``: ``free`` is ``False`` as soon as a sampled
    point is fixed, and ``resolution`` is the smallest ``eps`` at which some
    sample was resolved with no fixed sample seen.
    """
    resolution = None
    lo, hi = phi.domain
    eps = eps0
    while eps >= floor:
        resolved = 0
        for i in range(1, per_level + 1):
            x = p + direction * eps * i / per_level
            if not lo < x < hi:
                continue
            g = _displacement(phi, x)
            if g is None:
                continue
            resolved += 1
            if _is_fixed(g):
                return False, eps
        if resolved == 0:
            break
        resolution = eps
        eps /= 2
    return resolution is not None, resolution


def classify_fixed_points(phi, grid=None, tol=1e-9, samples=401, window=(-4.0, 4.0),
                          per_level=8, floor=1e-6):
    """Locate and classify fixed points of ``phi`` on its domain.

    Candidates are sign changes of ``phi(x) - x`` (refined by bisection to
    ``tol``), isolated grid points where the displacement vanishes, the
    ends of runs of fixed samples and tangencies at local minima of
    ``|phi(x) - x|``.  Samples where the map cannot resolve its
    own displacement are skipped.  Semi-isolation is observed on side
    intervals of halving length down to ``floor * max(1, |p|)`` and reported
    with the finest resolution reached; it is an observation, not a proof.
    """
    lo, hi = phi.domain
    if grid is None:
        a = lo if math.isfinite(lo) else window[0]
        b = hi if math.isfinite(hi) else window[1]
        width = b - a
        a, b = a + 1e-3 * width, b - 1e-3 * width
        grid = [a + (b - a) * i / (samples - 1) for i in range(samples)]
        grid += [x for x in phi.boundaries() if a <= x <= b]
        grid = sorted(set(grid))
    spacing = (grid[-1] - grid[0]) / max(len(grid) - 1, 1)
    values = [(x, _displacement(phi, x)) for x in grid]
    last = len(values) - 1
    candidates = []
    prev = None
    for i, (x, g) in enumerate(values):
        if g is None:
            prev = None
            continue
        if _is_fixed(g):
            nbrs = [j for j in (i - 1, i + 1) if 0 <= j <= last]
            free = [j for j in nbrs if not _is_fixed(values[j][1])]
            if len(free) == 2:
                candidates.append(x)
            elif len(free) == 1 and len(nbrs) == 2:
                candidates.append(_refine_run_end(phi, x, values[free[0]][0], tol))
        elif prev is not None and (prev[1] > 0) != (g > 0) and not _is_fixed(prev[1]):
            candidates.append(_bisect_root(phi, prev[0], prev[1], x, tol))
        elif prev is not None and 0 < i < last and values[i + 1][1] is not None:
            nxt = values[i + 1][1]
            if (prev[1] > 0) == (g > 0) == (nxt > 0) and abs(g) < abs(prev[1]) and \
                    abs(g) <= abs(nxt) and not _is_fixed(nxt):
                t = _tangency(phi, prev[0], values[i + 1][0])
                if t is not None:
                    candidates.append(t)
        prev = (x, g)
    out = []
    eps0 = min(8 * spacing, 0.05)
    points = []
    for p in sorted(candidates):
        if not points or p - points[-1] > tol:
            points.append(p)
    for p in points:
        try:
            d = float(phi.jet(p, 1)[1])
        except (DomainError, ValueError):
            d = math.nan
        kind = "non-hyperbolic" if abs(abs(d) - 1) <= tol else "hyperbolic"
        cut = floor * max(1.0, abs(p))
        left, rl = _side_free(phi, p, -1, eps0, per_level, cut)
        right, rr = _side_free(phi, p, 1, eps0, per_level, cut)
        side = {(True, True): "both", (True, False): "left",
                (False, True): "right", (False, False): None}[(left, right)]
        out.append(FixedPoint(p, d, kind, side, {"left": rl, "right": rr}))
    return out


# -- Reeb probe -------------------------------------------------------------------

REEB_PROFILE = "exp(1/(1 - x^2)) - exp(1)"


@dataclass
class ReebProbeReport:
    profile: str
    validation: dict
    rows: list
    tail: list
    truncated_at: object

    @property
    def valid(self):
        return all(v["ok"] for v in self.validation.values())

    def to_json(self):
        return {"profile": self.profile, "valid": self.valid, "validation": self.validation,
                "rows": self.rows, "tail": self.tail, "truncated_at": self.truncated_at}


def validate_reeb_profile(node, samples=50):
    """Numerical checks of the conditions imposed on a Reeb profile on ``(-1, 1)``."""
    f = ex.compile_float(node)
    df = ex.differentiate(node)
    xs = [0.98 * i / samples for i in range(1, samples + 1)]
    checks = {}
    f0 = f(0.0)
    checks["f(0)=0"] = {"ok": abs(f0) <= 1e-12, "value": f0}
    checks["even"] = {"ok": all(abs(f(x) - f(-x)) <= 1e-12 * max(1.0, abs(f(x))) for x in xs),
                      "value": max(abs(f(x) - f(-x)) for x in xs)}
    checks["nonnegative"] = {"ok": all(f(x) >= 0 for x in xs), "value": min(f(x) for x in xs)}
    dfv = ex.compile_float(df)
    checks["increasing on (0,1)"] = {"ok": all(dfv(x) > 0 for x in xs),
                                     "value": min(dfv(x) for x in xs)}
    near = [1 - 10 ** (-k / 4) for k in range(2, 7)]
    order = 3
    blowup = True
    flat = True
    grow, decay = [], []
    for x in near:
        j = ex.derivatives(node, x, order)
        rj = ex.derivatives(ex.Const(1) / df, x, order - 1)
        grow.append([float(v) for v in j.derivs])
        decay.append([float(v) for v in rj.derivs])
    for a, b in zip(grow, grow[1:]):
        blowup &= all(bb > aa > 0 for aa, bb in zip(a, b))
    for a, b in zip(decay, decay[1:]):
        flat &= all(abs(bb) <= abs(aa) for aa, bb in zip(a, b))
    checks["derivatives blow up at 1"] = {"ok": blowup, "value": grow[-1]}
    checks["derivatives of 1/f' vanish at 1"] = {"ok": flat and max(abs(v) for v in decay[-1]) < 1e-3,
                                                 "value": decay[-1]}
    return checks


def _probe_row(node, prof, n):
    x = prof.inverse(float(n))
    j = ex.derivatives(node, x, 4)
    d = [float(v) for v in j.derivs]
    if not all(math.isfinite(v) for v in d) or d[1] <= 0:
        raise OverflowError
    ratios = {str(k): d[k] / d[1] ** k for k in (2, 3, 4)}
    if not all(math.isfinite(v) for v in ratios.values()):
        raise OverflowError
    log_df = math.log(d[1])
    return {"n": n, "x0n": x, "f": d[0], "ratios": ratios, "ln_fprime": log_df,
            "ln_fprime_over_f": log_df / d[0]}


def reeb_probe(profile=REEB_PROFILE, n_max=12, tail_exponents=None):
    """Probe a Reeb profile at ``x_{0,n} = f^{-1}(n)``, ``n = 1..n_max``.

    Each row holds ``f^(k)/f'^k`` for ``k = 2, 3, 4``, ``ln f'`` and
    ``ln f' / f``.  A geometric tail ``n = 10**j`` (``j`` in ``tail_exponents``,
    default ``2, 4, ..., 306``) pushes toward the blow-up end; it stops at the
    first overflow, which is recorded in ``truncated_at``.
    """
    node = ex.parse(profile) if isinstance(profile, str) else profile
    validation = validate_reeb_profile(node)
    prof = _Profile(node, (0.0, 1.0))
    rows = [_probe_row(node, prof, n) for n in range(1, n_max + 1)]
    tail, truncated = [], None
    for j in (tail_exponents or range(2, 308, 2)):
        n = 10.0 ** j
        try:
            tail.append(_probe_row(node, prof, n))
        except (OverflowError, DomainError, ValueError, ZeroDivisionError):
            truncated = n
            break
    return ReebProbeReport(ex.to_source(node), validation, rows, tail, truncated)
