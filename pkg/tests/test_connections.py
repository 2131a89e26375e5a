import math
import random

from hypothesis import given, seed, strategies as st
import pytest
import sympy

from folcc import connections as cn
from folcc import expr as ex
from folcc.diffeo import Generator, LocalDiffeo, PseudogroupPresentation
from folcc.errors import ConfigError, RegularityError

INF = math.inf


def presentation(*maps, chart=(-INF, INF), domain=None):
    gens = [Generator(f"g{i}", LocalDiffeo.explicit(m, domain or chart), "C", "C")
            for i, m in enumerate(maps)]
    return PseudogroupPresentation({"C": chart}, gens)


def zero(kind="affine"):
    return cn.ConnectionCandidate.constant_zero(["C"], kind)


# -- affine ---------------------------------------------------------------------------


@pytest.mark.parametrize("maps,chart", [(["2*x"], (-INF, INF)), (["x + 1"], (-INF, INF)),
                                        (["-x"], (-1, 1)), (["x + 1", "x/2"], (-INF, INF))])
def test_zero_connection_passes_for_affine_generators(maps, chart):
    rep = cn.verify_affine_connection(presentation(*maps, chart=chart), zero())
    assert rep["passed"] and rep["max_residual"] == 0


def test_zero_connection_fails_for_a_curved_generator():
    rep = cn.verify_affine_connection(presentation("x + x^2/4", chart=(0, 1)), zero())
    assert not rep["passed"]
    assert rep["max_residual"] > 0.1


def test_orbifold_needs_an_odd_candidate():
    pres = presentation("-x", chart=(-1, 1))
    odd = cn.ConnectionCandidate("affine", {"C": "x^3 - sin(x)"})
    even = cn.ConnectionCandidate("affine", {"C": "1 + x^2"})
    assert cn.verify_affine_connection(pres, odd)["passed"]
    assert not cn.verify_affine_connection(pres, even)["passed"]


def test_evaluation_errors_are_reported_per_sample():
    pres = presentation("x + 1", chart=(-2, 2))
    cand = cn.ConnectionCandidate("affine", {"C": "ln(x)"})
    rep = cn.verify_affine_connection(pres, cand, samples=16)
    assert not rep["passed"]
    assert rep["generators"]["g0"]["errors"]


CONJ = "x + 0.1*sin(2*pi*x)"


def conjugated_rotation(profile=CONJ, alpha="sqrt(2) - 1"):
    phi = LocalDiffeo.conjugated_shift(profile, float(ex.evaluate(ex.parse(alpha), 0)),
                                       lift=True)
    return PseudogroupPresentation({"R": (-INF, INF)}, [Generator("phi", phi, "R", "R")],
                                   windows={"R": (-2, 2)})


def test_connection_from_conjugacy_identity():
    cand = cn.connection_from_conjugacy("x", ["C"])
    assert cand.functions["C"] == ex.Const(0)


def test_connection_from_conjugacy_passes():
    cand = cn.connection_from_conjugacy(CONJ, ["R"])
    rep = cn.verify_affine_connection(conjugated_rotation(), cand)
    assert rep["passed"] and rep["max_residual"] <= 1e-8


def test_zero_epsilon_gives_zero_connection():
    cand = cn.connection_from_conjugacy("x + 0*sin(2*pi*x)", ["R"])
    assert cand.value("R", 0.3) == 0


def test_negated_candidate_fails():
    """The cocycle singles out +f''/f'; its negative is not a connection."""
    cand = cn.connection_from_conjugacy(CONJ, ["R"])
    neg = cn.ConnectionCandidate("affine", {"R": -cand.functions["R"]})
    assert not cn.verify_affine_connection(conjugated_rotation(), neg)["passed"]


@pytest.mark.parametrize("eps,alpha", [(0.05, "0.3"), (0.15, "(sqrt(5) - 1)/2")])
def test_conjugated_translation_family(eps, alpha):
    """f o g with g a translation: the constructed candidate passes."""
    profile = f"x + 0.3 + {eps}*sin(2*pi*x)"
    cand = cn.connection_from_conjugacy(profile, ["R"])
    assert cn.verify_affine_connection(conjugated_rotation(profile, alpha), cand)["passed"]


def test_critical_conjugacy_is_refused():
    with pytest.raises(RegularityError):
        cn.connection_from_conjugacy("x + sin(2*pi*x)/(2*pi)", ["R"])


# -- Schwarzian -----------------------------------------------------------------------


def test_schwarzian_examples():
    assert cn.schwarzian("exp(x)", 0.7) == pytest.approx(-0.5, abs=1e-15)
    assert cn.schwarzian("3*x + 2", 1.0) == 0
    rng = random.Random(3)
    for _ in range(100):
        w = rng.uniform(-0.9, 0.9)
        assert abs(cn.schwarzian("(2*x + 1)/(x + 3)", w)) <= 1e-12


def test_schwarzian_matches_sympy():
    x = sympy.Symbol("x")
    got = cn.schwarzian(ex.parse("x^3 / 5") + ex.parse("x"), 0.4)
    g = x ** 3 / 5 + x
    want = sympy.diff(g, x, 3) / sympy.diff(g, x) - sympy.Rational(3, 2) * (
        sympy.diff(g, x, 2) / sympy.diff(g, x)) ** 2
    assert got == pytest.approx(float(want.subs(x, 0.4)), rel=1e-13)


ANALYTIC = ["exp(x)", "x + x^3 / 3", "sin(x) + 2*x", "(x + 2)/(3 - x)", "x + exp(x)/4"]


@seed(61)
@given(st.sampled_from(ANALYTIC), st.sampled_from(ANALYTIC), st.floats(-0.5, 0.5))
def test_schwarzian_cocycle(f, g, w):
    fn, gn = ex.parse(f), ex.parse(g)
    inner = ex.derivatives(gn, w, 1)
    lhs = cn.schwarzian(ex.substitute(fn, gn), w)
    rhs = cn.schwarzian(fn, float(inner[0])) * float(inner[1]) ** 2 + cn.schwarzian(gn, w)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_schwarzian_needs_regularity():
    with pytest.raises(RegularityError):
        cn.schwarzian("x^2", 0.0)


# -- projective -----------------------------------------------------------------------


def test_projective_exp_example():
    gen = Generator("exp", LocalDiffeo.explicit("exp(x)", (-2, 2)), "W", "T")
    pres = PseudogroupPresentation({"W": (-2, 2), "T": (0, 8)}, [gen])
    cand = cn.ConnectionCandidate("projective", {"W": "0", "T": "1/(2*x^2)"})
    rep = cn.verify_projective_connection(pres, cand)
    assert rep["passed"] and rep["max_residual"] <= 1e-12


def test_projective_mobius_and_identity():
    pres = presentation("(2*x + 1)/(x + 3)", chart=(-1, 1))
    assert cn.verify_projective_connection(pres, zero("projective"))["passed"]
    pres = presentation("x", chart=(-1, 1))
    q = cn.ConnectionCandidate("projective", {"C": "cos(x) + x^5"})
    assert cn.verify_projective_connection(pres, q)["passed"]


def test_kind_mismatch_is_a_config_error():
    with pytest.raises(ConfigError):
        cn.verify_affine_connection(presentation("x"), zero("projective"))
    with pytest.raises(ConfigError):
        cn.ConnectionCandidate("conformal", {})
