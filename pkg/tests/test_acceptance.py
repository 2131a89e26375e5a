"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the terminal summary (see
conftest.py), so ``pytest tests/test_acceptance.py`` shows them without ``-s``.
"""

from fractions import Fraction
import math
import random
import time

from folcc import connections as cn
from folcc import dynamics as dyn
from folcc import expr as ex
from folcc import frames as fr
from folcc import gf
from folcc import jets
from folcc import scenarios as sc
from folcc import szekeres as sz
from folcc.diffeo import Generator, LocalDiffeo, PseudogroupPresentation
from folcc.jets import Jet

RESULTS = []


def verdict(number, label, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {label}" + \
        (f" [{detail}]" if detail else "")
    print(line)
    RESULTS.append(line)
    assert ok, line


# 1 ----------------------------------------------------------------------------------


def test_criterion_01_full_complex():
    start = time.perf_counter()
    full = gf.flavor("full")
    nonzero = {}
    for degree in range(6):
        for weight in range(-2, 7):
            group = gf.cohomology(full, degree, weight)
            if group.dim:
                nonzero[(degree, weight)] = group
    elapsed = time.perf_counter() - start
    top = nonzero.get((3, 0))
    ok = (sorted((k, g.dim) for k, g in nonzero.items()) == [((0, 0), 1), ((3, 0), 1)]
          and top is not None and top.representatives[0].terms == {(0, 1, 2): 1}
          and elapsed < 10)
    verdict(1, "H(W1) = span{1, c0^c1^c2} on degrees 0..5, weights -2..6", ok,
            f"{elapsed:.2f}s")


# 2 ----------------------------------------------------------------------------------


def test_criterion_02_relative_gl1():
    gl1 = gf.flavor("relative_GL1")
    dims = {d: gf.cohomology(gl1, d, 0) for d in range(1, 6)}
    rep = dims[2].representatives[0] if dims[2].dim else None
    # c0^c2 = -(c2^c0): the same class up to scale
    ok = ({d: g.dim for d, g in dims.items()} == {1: 0, 2: 1, 3: 0, 4: 0, 5: 0}
          and rep is not None and set(rep.terms) == {(0, 2)})
    verdict(2, "H(W1, GL1) = span{c2^c0} in positive degrees", ok,
            f"rep {gf.format_cochain(rep) if rep else None}")


# 3 ----------------------------------------------------------------------------------


def test_criterion_03_duminy():
    bad = {}
    for k in range(2, 7):
        dims = gf.duminy_cohomology(k).dims
        expected = {d: (1 if d in (2, 3) else 0) for d in dims}
        if dims != expected:
            bad[k] = dims
    verdict(3, "Duminy complex: H2 = H3 = 1, others 0, for k = 2..6", not bad, str(bad or ""))


# 4 ----------------------------------------------------------------------------------


def test_criterion_04_identities():
    report = fr.structure_identities()
    required = ["d theta0 = theta1 ^ theta0", "d theta1 = theta2 ^ theta0",
                "gvl = theta1 ^ d theta1", "gvl (x-chart) = -dx0 ^ dx1 ^ dx2",
                "cl1 (x-chart) = dx2 ^ dx0", "gysin(gvl) = theta2 ^ theta0"]
    failed = [name for name in required if not report[name]["ok"]]
    verdict(4, "structure identities are symbolic zeros", not failed, ", ".join(failed))


# 5 ----------------------------------------------------------------------------------


def test_criterion_05_invariance():
    start = time.perf_counter()
    sweep = fr.invariance_sweep(100, seed=0)
    elapsed = time.perf_counter() - start
    ok = (sweep["max_invariance_residual"] <= 1e-9 and sweep["max_theta_mismatch"] <= 1e-9
          and elapsed < 30)
    verdict(5, "canonical forms invariant; numeric and closed forms agree", ok,
            f"inv {sweep['max_invariance_residual']:.1e}, "
            f"theta {sweep['max_theta_mismatch']:.1e}, {elapsed:.1f}s")


# 6 ----------------------------------------------------------------------------------


def _rational(rng):
    return Fraction(rng.randint(-9, 9), rng.randint(1, 6))


def _regular_coeffs(rng, order):
    c = [_rational(rng) for _ in range(order + 1)]
    while c[1] == 0:
        c[1] = _rational(rng)
    return c


def test_criterion_06_prolong_functoriality():
    rng = random.Random(6)
    order, failures = 6, 0
    for _ in range(100):
        z0 = _rational(rng)
        frame = Jet.from_coeffs(0, [z0] + _regular_coeffs(rng, order)[1:])
        h = Jet.from_coeffs(z0, _regular_coeffs(rng, order))
        g = Jet.from_coeffs(h.value, _regular_coeffs(rng, order))
        lhs = jets.prolong(jets.compose(g, h), frame)
        rhs = jets.prolong(g, jets.prolong(h, frame))
        failures += lhs != rhs or not all(isinstance(v, Fraction) for v in lhs.derivs)
    verdict(6, "prolong(g o h) = prolong(g) o prolong(h), exact, order 6", failures == 0,
            f"{failures}/100 failed")


# 7 ----------------------------------------------------------------------------------


def _affine_residual(name):
    cfg = sc.load_builtin(name)
    charts = list(cfg.presentation.charts)
    checks = [c for c in cfg.checks if c["kind"] == "affine"]
    assert checks, name
    worst, ok = 0.0, True
    for check in checks:
        if "conjugacy" in check:
            cand = cn.connection_from_conjugacy(check["conjugacy"], charts)
        else:
            cand = cn.ConnectionCandidate("affine", check.get("candidate",
                                                              {c: "0" for c in charts}))
        rep = cn.verify_affine_connection(cfg.presentation, cand, tol=1e-8)
        worst = max(worst, rep["max_residual"])
        ok &= rep["passed"]
    return ok, worst, checks


def test_criterion_07_affine_cocycle():
    names = ["hyperbolic", "translation", "orbifold-z2", "resilient", "conjugated-rotation"]
    detail, ok = [], True
    for name in names:
        passed, worst, checks = _affine_residual(name)
        ok &= passed and worst <= 1e-8
        detail.append(f"{name} {worst:.1e}")
    conj_checks = _affine_residual("conjugated-rotation")[2]
    ok &= all("conjugacy" in c for c in conj_checks)
    verdict(7, "affine connections verified on five scenarios", ok, ", ".join(detail))


# 8 ----------------------------------------------------------------------------------


ANALYTIC = ["exp(x)", "x + x^3 / 3", "sin(x) + 2*x", "(x + 2)/(3 - x)", "x + exp(x)/4"]


def test_criterion_08_schwarzian():
    rng = random.Random(8)
    mobius = 0.0
    for _ in range(100):
        a, b, c, d = (rng.uniform(-2, 2) for _ in range(4))
        if abs(a * d - b * c) < 0.2:
            a += 1.0
        w = rng.uniform(-1, 1)
        pole = -d / c if c else math.inf
        if abs(w - pole) < 0.3:
            w = pole + 0.5
        mobius = max(mobius, abs(cn.schwarzian(f"({a}*x + {b})/({c}*x + {d})", w)))
    cocycle = 0.0
    for _ in range(100):
        f, g = ex.parse(rng.choice(ANALYTIC)), ex.parse(rng.choice(ANALYTIC))
        w = rng.uniform(-0.5, 0.5)
        inner = ex.derivatives(g, w, 1)
        lhs = cn.schwarzian(ex.substitute(f, g), w)
        rhs = cn.schwarzian(f, float(inner[0])) * float(inner[1]) ** 2 + cn.schwarzian(g, w)
        cocycle = max(cocycle, abs(lhs - rhs) / max(1.0, abs(lhs)))
    gen = Generator("exp", LocalDiffeo.explicit("exp(x)", (-2, 2)), "W", "T")
    pres = PseudogroupPresentation({"W": (-2, 2), "T": (0, 8)}, [gen])
    proj = cn.verify_projective_connection(
        pres, cn.ConnectionCandidate("projective", {"W": "0", "T": "1/(2*x^2)"}))
    ok = mobius <= 1e-12 and cocycle <= 1e-9 and proj["passed"]
    verdict(8, "Schwarzian: Mobius, cocycle, projective e^w", ok,
            f"mobius {mobius:.1e}, cocycle {cocycle:.1e}, proj {proj['max_residual']:.1e}")


# 9 ----------------------------------------------------------------------------------


def test_criterion_09_rotation():
    alpha = math.sqrt(2) - 1
    rigid = LocalDiffeo.lift_of_circle_map("x + (sqrt(2) - 1)")
    rigid_err = max(abs(dyn.rotation_number(rigid, n).rho - alpha) for n in (1, 100, 10 ** 4))
    phi = LocalDiffeo.conjugated_shift("x + 0.1*sin(2*pi*x)", alpha, lift=True)
    start = time.perf_counter()
    est = dyn.rotation_number(phi, 10 ** 6)
    elapsed = time.perf_counter() - start
    conj_err = dyn.circle_distance(est.rho, alpha)
    # the fast path must agree with plain iteration
    slow = dyn.rotation_number(phi, 10 ** 5, method="iterate")
    fast = dyn.rotation_number(phi, 10 ** 5)
    cross = abs(slow.raw - fast.raw)
    one = dyn.rotation_number(phi, 4000, method="iterate")
    two = dyn.rotation_number(phi.power(2), 4000, method="iterate")
    doubling = dyn.circle_distance(two.rho, 2 * one.rho) <= 2 * one.bound + two.bound
    golden = dyn.diophantine_exponent("(sqrt(5) - 1)/2", 10 ** 6)
    ok = (rigid_err <= 1e-12 and conj_err <= 1e-6 and elapsed < 5 and cross <= 1e-9
          and doubling and golden.exponent <= 0.05)
    verdict(9, "rotation numbers and golden-ratio exponent", ok,
            f"rigid {rigid_err:.1e}, conj {conj_err:.1e} in {elapsed:.3f}s, "
            f"exponent {golden.exponent:.1e}")


# 10 ---------------------------------------------------------------------------------


def test_criterion_10_szekeres():
    q2 = sz.q_polynomial(2).coefficients == {(2,): 2}
    degrees = all(sz.q_polynomial(n).degree <= n for n in range(1, 9))
    xs = [0.1 * i for i in range(1, 10)]
    ident = max(sz.verify_szekeres_identity("x^2", n, xs)["max_residual"] for n in range(1, 5))
    phi = LocalDiffeo.explicit("x/(1 - x)", (-0.9, 0.5))
    flow = sz.flow_check(phi, "x^2", closed_form=lambda t, x: x / (1 - t * x))
    ok = (q2 and degrees and ident <= 1e-8 and flow["closed_form_residual"] <= 1e-8
          and flow["time_one_residual"] <= 1e-8 and abs(flow["v_at_fixed_point"]) <= 1e-10
          and abs(flow["dv_at_fixed_point"]) <= 1e-10 and flow["parabolic"])
    verdict(10, "Szekeres polynomials, identity and flow of x^2", ok,
            f"identity {ident:.1e}, flow {flow['closed_form_residual']:.1e}")


# 11 ---------------------------------------------------------------------------------


def test_criterion_11_reeb_probe():
    start = time.perf_counter()
    rep = dyn.reeb_probe(n_max=12)
    elapsed = time.perf_counter() - start
    summary = sc.reeb_summary(rep)
    ok = all(summary.values()) and [r["n"] for r in rep.rows] == list(range(1, 13)) \
        and elapsed < 5
    failed = [k for k, v in summary.items() if not v]
    last = (rep.rows + rep.tail)[-1]
    verdict(11, "Reeb probe: decreasing ratios, unbounded ln f', ln f'/f -> 0", ok,
            f"{elapsed:.2f}s, ln f' {last['ln_fprime']:.0f}, "
            f"ln f'/f {last['ln_fprime_over_f']:.1e}" + (f", failed {failed}" if failed else ""))

