"""Cochains of the Lie algebra of formal vector fields on the line.

The cochain algebra is the exterior algebra on 1-forms ``c_0, c_1, c_2, ...``
with ``d c_r = sum_{k=0}^{r} binom(r, k) c_{r-k+1} ^ c_k`` extended as a graded
derivation.  The weight ``wt(c_r) = r - 1`` is preserved by ``d``, so each
(degree, weight) slice is finite dimensional and cohomology is computed slice
by slice with exact rational linear algebra.

Subcomplexes ("flavors"):

``full``
    everything.
``relative_O1``
    monomials of even weight (invariants of ``c_r -> (-1)**(r-1) c_r``).
``relative_GL1``
    weight-0 monomials without a ``c_1`` factor: ``1`` and ``c_0 ^ c_2``.
``duminy(k)``
    monomials ``omega ^ c_0`` with ``omega`` a wedge of ``c_1 .. c_k``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
import re

from . import linalg


def _sort_sign(indices):
    """Sign of the permutation sorting ``indices``; 0 if an index repeats."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign, tuple(sorted(idx))


def monomial_weight(mono):
    return sum(i - 1 for i in mono)


class ExteriorCochain:
    """Finite linear combination of wedge monomials ``c_{i1} ^ ... ^ c_{id}``.

    Keys are strictly increasing index tuples, values nonzero ``Fraction``s.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for mono, coef in (terms or {}).items():
            sign, key = _sort_sign(mono)
            if sign == 0 or coef == 0:
                continue
            clean[key] = clean.get(key, Fraction(0)) + sign * Fraction(coef)
        self.terms = {k: v for k, v in clean.items() if v != 0}

    @classmethod
    def generator(cls, r):
        return cls({(r,): 1})

    @classmethod
    def one(cls):
        return cls({(): 1})

    @classmethod
    def monomial(cls, *indices, coef=1):
        return cls({tuple(indices): coef})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, ExteriorCochain):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return ExteriorCochain(out)

    def __neg__(self):
        return ExteriorCochain({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        return ExteriorCochain({k: scalar * v for k, v in self.terms.items()})

    def __xor__(self, other):
        return wedge(self, other)

    def degrees(self):
        return {len(k) for k in self.terms}

    def weights(self):
        return {monomial_weight(k) for k in self.terms}

    def homogeneous_part(self, degree=None, weight=None):
        return ExteriorCochain({
            k: v for k, v in self.terms.items()
            if (degree is None or len(k) == degree)
            and (weight is None or monomial_weight(k) == weight)})

    def __repr__(self):
        return f"ExteriorCochain({format_cochain(self)})"

    def to_json(self):
        return [{"monomial": list(k), "coefficient": _frac_str(v)}
                for k, v in sorted(self.terms.items())]


def _frac_str(v):
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def format_cochain(a):
    if not a.terms:
        return "0"
    parts = []
    for mono, coef in sorted(a.terms.items()):
        name = " ^ ".join(f"c{i}" for i in mono) or "1"
        parts.append(f"{coef}*{name}" if coef != 1 else name)
    return " + ".join(parts)


def wedge(a, b):
    out = {}
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            sign, key = _sort_sign(ka + kb)
            if sign:
                out[key] = out.get(key, 0) + sign * va * vb
    return ExteriorCochain(out)


@lru_cache(maxsize=None)
def _d_generator_terms(r):
    out = {}
    for k in range(r + 1):
        sign, key = _sort_sign((r - k + 1, k))
        if sign:
            out[key] = out.get(key, 0) + sign * comb(r, k)
    return tuple((k, Fraction(v)) for k, v in out.items() if v)


def d_generator(r):
    """``d c_r`` as a cochain."""
    return ExteriorCochain(dict(_d_generator_terms(r)))


@lru_cache(maxsize=None)
def _d_monomial(mono):
    out = {}
    for j, r in enumerate(mono):
        sign_j = -1 if j % 2 else 1
        before, after = mono[:j], mono[j + 1:]
        for pair, coef in _d_generator_terms(r):
            sign, key = _sort_sign(before + pair + after)
            if sign:
                out[key] = out.get(key, 0) + sign_j * sign * coef
    return tuple((k, v) for k, v in out.items() if v)


def differential(a):
    """Gelfand-Fuchs differential, extended by the graded Leibniz rule."""
    out = {}
    for mono, coef in a.terms.items():
        for key, v in _d_monomial(mono):
            out[key] = out.get(key, 0) + coef * v
    return ExteriorCochain(out)


# -- flavors and slices ---------------------------------------------------------


@dataclass(frozen=True)
class Flavor:
    kind: str
    k: int = None

    def __post_init__(self):
        if self.kind not in ("full", "relative_O1", "relative_GL1", "duminy"):
            raise ValueError(f"unknown flavor {self.kind!r}")
        if self.kind == "duminy" and (self.k is None or self.k < 1):
            raise ValueError("duminy flavor needs a maximal index k >= 1")

    def __str__(self):
        return f"duminy({self.k})" if self.kind == "duminy" else self.kind

    def admits(self, mono):
        if self.kind == "full":
            return True
        if self.kind == "relative_O1":
            return monomial_weight(mono) % 2 == 0
        if self.kind == "relative_GL1":
            return monomial_weight(mono) == 0 and 1 not in mono
        return bool(mono) and mono[0] == 0 and all(1 <= i <= self.k for i in mono[1:])


FULL = Flavor("full")
RELATIVE_O1 = Flavor("relative_O1")
RELATIVE_GL1 = Flavor("relative_GL1")

_ALIASES = {"full": "full", "o1": "relative_O1", "relative_o1": "relative_O1",
            "gl1": "relative_GL1", "relative_gl1": "relative_GL1"}


def flavor(spec, k=None):
    """Normalize ``"full"``, ``"o1"``, ``"gl1"``, ``"duminy"``/``"duminy(3)"`` or a Flavor."""
    if isinstance(spec, Flavor):
        return spec
    text = str(spec).strip()
    m = re.fullmatch(r"duminy(?:\((\d+)\))?", text, flags=re.IGNORECASE)
    if m:
        return Flavor("duminy", int(m.group(1)) if m.group(1) else k)
    kind = _ALIASES.get(text.lower())
    if kind is None:
        raise ValueError(f"unknown flavor {spec!r}")
    return Flavor(kind)


def _increasing_tuples(length, total, lo=0, hi=None):
    """Strictly increasing tuples of ``length`` indices in ``[lo, hi]`` summing to ``total``."""
    if length == 0:
        if total == 0:
            yield ()
        return
    # smallest possible remainder after choosing first = i: (i+1) + ... + (i+length-1)
    i = lo
    while True:
        rest_min = (length - 1) * (2 * i + length) // 2
        if i + rest_min > total or (hi is not None and i > hi):
            return
        for tail in _increasing_tuples(length - 1, total - i, i + 1, hi):
            yield (i,) + tail
        i += 1


def slice_basis(flv, degree, weight):
    flv = flavor(flv)
    if degree < 0:
        return []
    total = weight + degree
    if flv.kind == "duminy":
        if degree == 0:
            return []
        tails = _increasing_tuples(degree - 1, total, 1, flv.k)
        return [(0,) + t for t in tails]
    return [m for m in _increasing_tuples(degree, total) if flv.admits(m)]


def boundary_matrix(flv, degree, weight):
    """Matrix of ``d`` from the (degree, weight) slice to the (degree+1, weight) slice.

    Raises ``ValueError`` if ``d`` leaves the flavor's span.
    """
    flv = flavor(flv)
    src = slice_basis(flv, degree, weight)
    dst = slice_basis(flv, degree + 1, weight)
    index = {m: i for i, m in enumerate(dst)}
    mat = [[Fraction(0)] * len(src) for _ in dst]
    for j, mono in enumerate(src):
        for key, v in _d_monomial(mono):
            if key not in index:
                raise ValueError(
                    f"d maps {mono} outside the {flv} subcomplex (term {key})")
            mat[index[key]][j] += v
    return mat


@dataclass
class ComplexSlice:
    flavor: Flavor
    degree: int
    weight: int
    basis: list
    boundary_in: list
    boundary_out: list

    @property
    def dim(self):
        return len(self.basis)


def slice(flv, degree, weight):
    flv = flavor(flv)
    basis = slice_basis(flv, degree, weight)
    b_in = boundary_matrix(flv, degree - 1, weight) if degree > 0 else []
    b_out = boundary_matrix(flv, degree, weight)
    if b_in and b_out and basis:
        if not linalg.is_zero_matrix(linalg.matmul(b_out, b_in)):
            raise AssertionError(f"d^2 != 0 on slice ({flv}, {degree}, {weight})")
    return ComplexSlice(flv, degree, weight, basis, b_in, b_out)


@dataclass
class CohomologyGroup:
    flavor: Flavor
    degree: int
    weight: int
    dim: int
    representatives: list = field(default_factory=list)

    def to_json(self):
        return {"degree": self.degree, "weight": self.weight, "dim": self.dim,
                "representatives": [r.to_json() for r in self.representatives]}


def _normalize(vec):
    lead = next(x for x in vec if x != 0)
    return [x / lead for x in vec]


def cohomology(flv, degree, weight):
    """Cohomology of one slice with representative cocycles.

    ``dim = nullity(d_out) - rank(d_in)``; representatives are kernel basis
    vectors that are independent modulo the image, scaled so the first nonzero
    coefficient is 1.
    """
    sl = slice(flv, degree, weight)
    n = sl.dim
    if n == 0:
        return CohomologyGroup(sl.flavor, degree, weight, 0)
    rank_out = linalg.rank(sl.boundary_out) if sl.boundary_out else 0
    rank_in = linalg.rank(sl.boundary_in) if sl.boundary_in else 0
    dim = n - rank_out - rank_in
    reps = []
    if dim:
        kernel = linalg.nullspace(sl.boundary_out, n) if sl.boundary_out else \
            linalg.nullspace([], n)
        span = linalg.columns(sl.boundary_in) if sl.boundary_in else []
        span = [c for c in span if any(c)]
        current = linalg.rank(span) if span else 0
        for v in kernel:
            trial = span + [v]
            r = linalg.rank(trial)
            if r > current:
                span, current = trial, r
                v = _normalize(v)
                reps.append(ExteriorCochain({m: c for m, c in zip(sl.basis, v) if c}))
                if len(reps) == dim:
                    break
    return CohomologyGroup(sl.flavor, degree, weight, dim, reps)


def cohomology_dim(flv, degree, weight_window, representatives=False):
    """Map weight -> dimension of H^degree over ``weight_window = (lo, hi)`` inclusive.

    With ``representatives=True`` the values are :class:`CohomologyGroup` objects.
    """
    lo, hi = weight_window
    out = {}
    for w in range(lo, hi + 1):
        group = cohomology(flv, degree, w)
        out[w] = group if representatives else group.dim
    return out


def euler_characteristic(flv, weight, max_degree):
    chain = sum((-1) ** d * len(slice_basis(flv, d, weight)) for d in range(max_degree + 1))
    homology = sum((-1) ** d * cohomology(flv, d, weight).dim for d in range(max_degree + 1))
    return chain, homology


@dataclass
class DuminyCohomology:
    k: int
    dims: dict
    representatives: dict

    def to_json(self):
        return {"k": self.k, "dims": {str(d): v for d, v in sorted(self.dims.items())},
                "representatives": {str(d): [r.to_json() for r in reps]
                                    for d, reps in sorted(self.representatives.items())}}


def _duminy_weights(k, degree):
    ws = set()
    for tail in combinations(range(1, k + 1), degree - 1):
        ws.add(monomial_weight((0,) + tail))
    return sorted(ws)


def duminy_cohomology(k):
    """Cohomology of the complex spanned by ``omega ^ c_0``, ``omega`` in ``c_1..c_k``.

    Every degree ``1 .. k+1`` is reported, summed over all weights.
    """
    if k < 2:
        raise ValueError("duminy_cohomology needs k >= 2")
    flv = Flavor("duminy", k)
    dims, reps = {}, {}
    for degree in range(1, k + 2):
        total, found = 0, []
        for w in _duminy_weights(k, degree):
            g = cohomology(flv, degree, w)
            total += g.dim
            found.extend(g.representatives)
        dims[degree] = total
        reps[degree] = found
    return DuminyCohomology(k, dims, reps)
