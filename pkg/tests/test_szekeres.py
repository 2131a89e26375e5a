import math

from hypothesis import given, seed, strategies as st
import pytest
import sympy

from folcc import szekeres as sz
from folcc.diffeo import LocalDiffeo
from folcc.errors import DomainError


def sympy_q(n):
    """Q_n from the identity itself: with f' = 1/v symbolic, solve for Q_n."""
    x = sympy.Symbol("x")
    v = sympy.Function("v")(x)
    fp = 1 / v
    u = [sympy.diff(fp, x, k) / fp ** (k + 1) for k in range(1, n)]
    q = sympy.diff(v, x, n) * v ** (n - 1) + sympy.diff(fp, x, n) / fp ** (n + 1)
    return sympy.simplify(q), u, v, x


def test_small_polynomials():
    assert sz.q_polynomial(1).is_zero()
    assert sz.q_polynomial(2).coefficients == {(2,): 2}
    assert sz.q_polynomial(2).to_str() == "2*u1^2"


@pytest.mark.parametrize("n", range(1, 9))
def test_degree_bound(n):
    assert sz.q_polynomial(n).degree <= n


@pytest.mark.parametrize("n", [2, 3, 4])
def test_recursion_matches_direct_symbolic_elimination(n):
    """Q_n(u) evaluated on u_k = f^(k+1)/f'^(k+1) equals the symbolic remainder."""
    want, u, v, x = sympy_q(n)
    got = sz.q_polynomial(n)(u)
    assert sympy.simplify(got - want) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_identity_for_x_squared(n):
    rep = sz.verify_szekeres_identity("x^2", n, [0.1, 0.2, 0.5])
    assert rep["max_residual"] <= 1e-8
    oracle = sz.verify_szekeres_identity("x^2", n, [0.1, 0.2, 0.5], f="-1/x")
    assert oracle["max_residual"] <= 1e-8


def test_first_order_by_hand():
    lhs, rhs = sz.szekeres_sides("x^2", 1, 0.3, f="-1/x")
    assert lhs == pytest.approx(0.6) and rhs == pytest.approx(0.6)


@seed(91)
@given(st.integers(1, 6), st.floats(0.2, 3.0), st.floats(1.5, 4.0))
def test_identity_for_linear_fields(n, x, k):
    lk = math.log(k)
    rep = sz.verify_szekeres_identity(f"x*{lk!r}", n, [x], f=f"ln(x)/{lk!r}")
    assert rep["max_residual"] <= 1e-8


def test_vanishing_field_is_refused():
    with pytest.raises(DomainError):
        sz.verify_szekeres_identity("x^2", 2, [0.0])


def test_flow_of_x_squared():
    phi = LocalDiffeo.explicit("x/(1 - x)", (-0.9, 0.9))
    rep = sz.flow_check(phi, "x^2", closed_form=lambda t, x: x / (1 - t * x))
    assert sz.flow_check_passes(rep)
    assert rep["closed_form_residual"] <= 1e-8
    assert rep["group_law_residual"] <= 1e-7
    assert rep["parabolic"]
    assert abs(rep["v_at_fixed_point"]) <= 1e-10 and abs(rep["dv_at_fixed_point"]) <= 1e-10


def test_linear_flow():
    k = 3.0
    phi = LocalDiffeo.explicit("3*x")
    v = f"x*{math.log(k)!r}"
    rep = sz.flow_check(phi, v, closed_form=lambda t, x: k ** t * x)
    assert sz.flow_check_passes(rep) and not rep["parabolic"]


def test_wrong_field_fails():
    phi = LocalDiffeo.explicit("x/(1 - x)", (-0.9, 0.9))
    rep = sz.flow_check(phi, "1.1*x^2")
    assert not sz.flow_check_passes(rep)
