"""Shared hypothesis strategies."""

from fractions import Fraction

from hypothesis import strategies as st

small_int = st.integers(-5, 5)
small_frac = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5))
nonzero_frac = small_frac.filter(lambda v: v != 0)


@st.composite
def rational_jet_coeffs(draw, order, regular=True):
    """Taylor coefficients ``c_0..c_order`` with ``c_1 != 0`` when ``regular``."""
    c = [draw(small_frac) for _ in range(order + 1)]
    if regular:
        c[1] = draw(nonzero_frac)
    return c


@st.composite
def polynomial_source(draw, max_degree=4):
    """Source text of an integer polynomial in ``x``."""
    coeffs = [draw(small_int) for _ in range(draw(st.integers(1, max_degree + 1)))]
    parts = [f"({c})*x^{k}" for k, c in enumerate(coeffs)]
    return " + ".join(parts)
