from fractions import Fraction
import math

from hypothesis import given, seed, strategies as st
import pytest
import sympy

from folcc import expr as ex
from folcc.errors import DomainError, ParseError
from folcc.jets import Jet

from strategies import polynomial_source

X = sympy.Symbol("x")
SYMPY_NS = {"ln": sympy.log, "exp": sympy.exp, "sin": sympy.sin, "cos": sympy.cos,
            "sqrt": sympy.sqrt, "abs": lambda e: sympy.sqrt(e ** 2), "pi": sympy.pi, "x": X}


def sympy_of(source):
    return sympy.sympify(source.replace("^", "**"), locals=SYMPY_NS)


# -- parse ------------------------------------------------------------------------


def test_parse_smoke():
    assert ex.parse("x + 1") == ex.Binary("+", ex.X, ex.Const(Fraction(1)))


def test_parse_reeb_profile():
    node = ex.parse("exp(1/(1 - x^2)) - exp(1)")
    assert ex.evaluate(node, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_power_is_right_associative():
    assert ex.evaluate(ex.parse("2^3^2"), 0) == 512


def test_power_binds_tighter_than_unary_minus():
    assert ex.evaluate(ex.parse("-x^2"), 3) == -9
    assert ex.evaluate(ex.parse("2^-1"), 0) == Fraction(1, 2)


def test_rational_literal_is_one_token():
    assert ex.parse("x^2/3") == ex.Binary("^", ex.X, ex.Const(Fraction(2, 3)))
    assert ex.parse("x^2 / 3") == ex.Binary("/", ex.Binary("^", ex.X, ex.Const(Fraction(2))),
                                            ex.Const(Fraction(3)))


def test_decimal_literals_are_exact():
    assert ex.evaluate(ex.parse("0.1 + 0.2"), 0) == Fraction(3, 10)


@pytest.mark.parametrize("source,offset", [("x + * 2", 4), ("foo(x)", 0), ("(x + 1", 6),
                                           ("x $ 1", 2), ("1/0", 0)])
def test_parse_errors_carry_offsets(source, offset):
    with pytest.raises(ParseError) as info:
        ex.parse(source)
    assert info.value.offset == offset


def test_offsets_are_bytes():
    with pytest.raises(ParseError) as info:
        ex.parse("ln(x) + é")
    assert info.value.offset == len("ln(x) + ".encode())


@seed(11)
@given(polynomial_source())
def test_round_trip(source):
    node = ex.parse(source)
    assert ex.parse(ex.to_source(node)) == node


@pytest.mark.parametrize("source", ["exp(1/(1 - x^2)) - exp(1)", "-x^2 + sin(pi*x)/3",
                                    "sqrt(abs(x) + 1)^(1/2)", "2^-x", "x + 0.1*sin(2*pi*x)"])
def test_round_trip_named(source):
    node = ex.parse(source)
    assert ex.parse(ex.to_source(node)) == node


# -- eval_jet -------------------------------------------------------------------------


def test_square_jet():
    assert ex.eval_jet(ex.parse("x^2"), Jet.identity(3, 4)).derivs == (9, 6, 2, 0, 0)


def test_exp_taylor_coefficients():
    j = ex.eval_jet(ex.parse("exp(x)"), Jet.identity(0.0, 4))
    assert j.coeffs() == pytest.approx([1, 1, 1 / 2, 1 / 6, 1 / 24], rel=1e-15)


def test_geometric_series():
    assert ex.derivatives(ex.parse("x/(1-x)"), 0, 3).derivs == (0, 1, 2, 6)


@pytest.mark.parametrize("source,x0", [("exp(1/(1 - x^2)) - exp(1)", 0.3),
                                       ("ln(2 + sin(x))*cos(x)^2", 1.1),
                                       ("sqrt(1 + x^2)/(2 - x)", -0.7),
                                       ("abs(x)^(3/2)", -2.0), ("2^x", 0.4)])
def test_derivatives_match_sympy(source, x0):
    """Taylor-mode derivatives against symbolic differentiation."""
    got = ex.derivatives(ex.parse(source), x0, 5).derivs
    f = sympy_of(source)
    for k in range(6):
        want = float(sympy.diff(f, X, k).subs(X, x0).evalf(30))
        assert got[k] == pytest.approx(want, rel=1e-10, abs=1e-12)


@seed(12)
@given(polynomial_source(), st.floats(-2, 2))
def test_jet_matches_finite_differences(source, x0):
    node = ex.parse(source)
    d = ex.derivatives(node, x0, 3).derivs
    f = ex.compile_float(node)
    h = 1e-3
    # second differences carry an h^2 f''''/12 truncation error
    scale = max(1.0, max(abs(v) for v in ex.derivatives(node, x0, 4).derivs))
    fd = [f(x0),
          (f(x0 + h) - f(x0 - h)) / (2 * h),
          (f(x0 + h) - 2 * f(x0) + f(x0 - h)) / h ** 2,
          (f(x0 + 2 * h) - 2 * f(x0 + h) + 2 * f(x0 - h) - f(x0 - 2 * h)) / (2 * h ** 3)]
    for k in range(4):
        assert d[k] == pytest.approx(fd[k], rel=1e-6, abs=1e-6 * scale)


@seed(13)
@given(polynomial_source(), st.floats(-3, 3))
def test_order_zero_is_plain_evaluation(source, x0):
    node = ex.parse(source)
    assert ex.eval_jet(node, Jet.identity(x0, 0)).derivs[0] == ex.evaluate(node, x0)


@seed(14)
@given(polynomial_source(3), polynomial_source(3),
       st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4)))
def test_chain_rule_exact_for_polynomials(g, h, x0):
    g, h = ex.parse(g), ex.parse(h)
    ident = Jet.identity(x0, 5)
    nested = ex.eval_jet(g, ex.eval_jet(h, ident))
    assert nested == ex.eval_jet(ex.substitute(g, h), ident)


@pytest.mark.parametrize("g,h,x0", [("exp(x)", "sin(x)", 0.3), ("ln(x)", "1 + x^2", -0.8),
                                    ("sqrt(x)", "exp(x)", 1.2)])
def test_chain_rule_transcendental(g, h, x0):
    g, h = ex.parse(g), ex.parse(h)
    ident = Jet.identity(x0, 6)
    nested = ex.eval_jet(g, ex.eval_jet(h, ident)).derivs
    direct = ex.eval_jet(ex.substitute(g, h), ident).derivs
    for a, b in zip(nested, direct):
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_rational_expressions_stay_exact():
    node = ex.parse("(x^3 - 2*x)/(1 + x^2)")
    assert ex.is_rational(node)
    assert all(isinstance(d, Fraction) for d in ex.derivatives(node, Fraction(1, 3), 4))


@pytest.mark.parametrize("source,x0", [("ln(x)", 0.0), ("ln(x)", -1.0), ("sqrt(x)", -1.0),
                                       ("1/x", 0.0), ("1/(x - 1e-13)", 0.0)])
def test_domain_errors(source, x0):
    with pytest.raises(DomainError):
        ex.derivatives(ex.parse(source), x0, 2)


def test_abs_refuses_derivatives_at_zero():
    node = ex.parse("abs(x)")
    assert ex.evaluate(node, 0) == 0
    with pytest.raises(DomainError):
        ex.derivatives(node, 0.0, 1)


def test_zero_tolerance_is_configurable():
    node = ex.parse("1/x")
    assert ex.evaluate(node, 1e-13, zero_tol=0.0) == pytest.approx(1e13)


def test_differentiate_and_compile_agree_with_jets():
    node = ex.parse("exp(1/(1 - x^2))")
    d1 = ex.compile_float(ex.differentiate(node))
    assert d1(0.4) == pytest.approx(ex.derivatives(node, 0.4, 1)[1], rel=1e-13)
