"""Vector fields generating a flow through a parabolic map.

If ``v`` generates the flow and ``f' = 1/v``, the derivatives of ``v`` are tied
to the ratios ``u_k = f^(k+1) / f'^(k+1)`` by

    v^(n) v^(n-1) = -f^(n+1) / f'^(n+1) + Q_n(u_1, ..., u_{n-1})

with integer polynomials ``Q_n`` given by a recursion from ``Q_1 = 0``.
"""

from dataclasses import dataclass

from scipy.integrate import solve_ivp

from . import _series
from . import expr as ex
from .errors import DomainError


def _strip(mono):
    mono = list(mono)
    while mono and mono[-1] == 0:
        mono.pop()
    return tuple(mono)


def _padded(mono, k):
    return tuple(mono) + (0,) * (k - len(mono))


@dataclass(frozen=True)
class QPolynomial:
    """Integer polynomial in ``u_1, ..., u_{n-1}``.

    ``coefficients`` maps exponent tuples ``(e_1, e_2, ...)`` (trailing zeros
    stripped) to nonzero integers.
    """

    n: int
    coefficients: dict

    @property
    def degree(self):
        return max((sum(m) for m in self.coefficients), default=0)

    def is_zero(self):
        return not self.coefficients

    def __call__(self, u):
        """Evaluate at ``u = (u_1, u_2, ...)``."""
        total = 0
        for mono, c in self.coefficients.items():
            term = c
            for k, e in enumerate(mono):
                if e:
                    term = term * u[k] ** e
            total = total + term
        return total

    def to_str(self):
        if not self.coefficients:
            return "0"
        parts = []
        for mono, c in sorted(self.coefficients.items(), reverse=True):
            factors = [f"u{k + 1}" + (f"^{e}" if e > 1 else "") for k, e in enumerate(mono) if e]
            body = "*".join(factors)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self):
        return {"n": self.n, "degree": self.degree, "polynomial": self.to_str(),
                "terms": [{"exponents": list(m), "coefficient": c}
                          for m, c in sorted(self.coefficients.items())]}


def _add_term(acc, mono, c):
    key = _strip(mono)
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def _next_q(q, n):
    """``Q_{n+1}`` from ``Q_n``."""
    width = n + 1
    acc = {}
    # 2 u_1 u_n
    mono = [0] * width
    mono[0] += 1
    mono[n - 1] += 1
    _add_term(acc, mono, 2)
    for m, c in q.items():
        m = list(_padded(m, width))
        # (n - 1) u_1 Q_n
        if n > 1:
            t = list(m)
            t[0] += 1
            _add_term(acc, t, (n - 1) * c)
        # sum_k dQ_n/du_k (u_{k+1} - (k+1) u_1 u_k)
        for k in range(1, n):
            e = m[k - 1]
            if not e:
                continue
            d = list(m)
            d[k - 1] -= 1
            t = list(d)
            t[k] += 1
            _add_term(acc, t, c * e)
            t = list(d)
            t[0] += 1
            t[k - 1] += 1
            _add_term(acc, t, -(k + 1) * c * e)
    return acc


_Q_CACHE = {1: {}}


def q_polynomial(n):
    if n < 1:
        raise ValueError("q_polynomial needs n >= 1")
    top = max(_Q_CACHE)
    while top < n:
        _Q_CACHE[top + 1] = _next_q(_Q_CACHE[top], top)
        top += 1
    return QPolynomial(n, dict(_Q_CACHE[n]))


# -- identity check -----------------------------------------------------------------


def _profile_from_field(v_jet):
    """Derivative stack ``f', f'', ..., f^(n+1)`` from ``f' = 1/v``."""
    coeffs = _series.recip(v_jet.coeffs(), 0.0)
    return _series.factorial_unscale(coeffs)


def szekeres_sides(v, n, x, f=None):
    """Both sides of the identity at ``x``.

    ``f`` optionally supplies the profile itself (an oracle); otherwise its
    derivatives come from the reciprocal series of ``v``.
    """
    v_node = ex.parse(v) if isinstance(v, str) else v
    vj = ex.derivatives(v_node, x, n)
    if vj[0] == 0 or abs(vj[0]) < 1e-300:
        raise DomainError(f"the field vanishes at {x!r}")
    if f is not None:
        f_node = ex.parse(f) if isinstance(f, str) else f
        fd = list(ex.derivatives(f_node, x, n + 1).derivs[1:])
    else:
        fd = _profile_from_field(vj)
    f1 = fd[0]
    # u_k = f^(k+1) / f'^(k+1)
    u = [fd[k] / f1 ** (k + 1) for k in range(1, n)]
    lhs = vj[n] * vj[0] ** (n - 1)
    rhs = -fd[n] / f1 ** (n + 1) + q_polynomial(n)(u)
    return lhs, rhs


def verify_szekeres_identity(v, n, xs, f=None):
    """Maximum relative residual ``|lhs - rhs| / max(1, |lhs|)`` over ``xs``."""
    worst = 0.0
    rows = []
    for x in xs:
        lhs, rhs = szekeres_sides(v, n, x, f)
        r = abs(lhs - rhs) / max(1.0, abs(lhs))
        rows.append({"x": float(x), "lhs": float(lhs), "rhs": float(rhs), "residual": float(r)})
        worst = max(worst, float(r))
    return {"n": n, "max_residual": worst, "samples": rows}


# -- flows --------------------------------------------------------------------------


def integrate_flow(v, x0, times, rtol=1e-10, atol=1e-12, method="RK45"):
    """``phi_t(x0)`` for each ``t`` in ``times`` (all of one sign) by adaptive RK."""
    node = ex.parse(v) if isinstance(v, str) else v
    fv = ex.compile_float(node)
    times = [float(t) for t in times]
    t_end = max(times, key=abs) if times else 0.0
    if t_end == 0:
        return [float(x0)] * len(times)
    sol = solve_ivp(lambda t, y: [fv(y[0])], (0.0, t_end), [float(x0)], method=method,
                    rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:
        raise DomainError(f"flow integration failed from {x0!r}: {sol.message}")
    return [float(sol.sol(t)[0]) for t in times]


def flow_check(phi, v, t_samples=None, x_samples=None, fixed_point=0.0, closed_form=None,
               rtol=1e-10, atol=1e-12):
    """Check that the flow of ``v`` passes through ``phi`` at time 1.

    Reports ``|phi_1 - phi|``, the group-law defect ``|phi_s(phi_t(x)) -
    phi_{s+t}(x)|`` over pairs with ``s + t <= 1``, the field and its
    derivative at ``fixed_point`` (``v'`` is only required to vanish when
    ``phi'`` is 1 there) and, when ``closed_form(t, x)`` is supplied, the
    distance to it.
    """
    node = ex.parse(v) if isinstance(v, str) else v
    ts = list(t_samples) if t_samples is not None else [i / 10 for i in range(11)]
    xs = list(x_samples) if x_samples is not None else [0.05 + 0.05 * i for i in range(10)]
    if 1.0 not in ts:
        ts.append(1.0)
    ts = sorted(set(ts))
    flows = {x: dict(zip(ts, integrate_flow(node, x, ts, rtol, atol))) for x in xs}
    time_one = max(abs(flows[x][1.0] - phi(x)) for x in xs)
    time_one = float(time_one)
    group = 0.0
    for x in xs:
        for t in ts:
            y = flows[x][t]
            rest = [s for s in ts if s + t <= 1.0 + 1e-12]
            later = integrate_flow(node, y, rest, rtol, atol)
            for s, z in zip(rest, later):
                target = flows[x].get(round(s + t, 12))
                if target is None:
                    target = integrate_flow(node, x, [s + t], rtol, atol)[0]
                group = max(group, abs(z - target))
    oracle = None
    if closed_form is not None:
        oracle = float(max(abs(flows[x][t] - closed_form(t, x)) for x in xs for t in ts))
    vj = ex.derivatives(node, float(fixed_point), 1)
    dphi = phi.jet(float(fixed_point), 1)[1] if phi.in_domain(float(fixed_point)) else None
    parabolic = dphi is not None and abs(dphi - 1) <= 1e-12
    return {
        "time_one_residual": time_one,
        "group_law_residual": group,
        "closed_form_residual": oracle,
        "v_at_fixed_point": float(vj[0]),
        "dv_at_fixed_point": float(vj[1]),
        "phi_prime_at_fixed_point": None if dphi is None else float(dphi),
        "parabolic": parabolic,
        "samples": {"t": ts, "x": [float(x) for x in xs]},
    }


def flow_check_passes(report, tol=1e-8, group_tol=1e-7, fixed_tol=1e-10):
    ok = report["time_one_residual"] <= tol and report["group_law_residual"] <= group_tol
    if report["closed_form_residual"] is not None:
        ok &= report["closed_form_residual"] <= tol
    ok &= abs(report["v_at_fixed_point"]) <= fixed_tol
    if report["parabolic"]:
        ok &= abs(report["dv_at_fixed_point"]) <= fixed_tol
    return ok

