"""Exact linear algebra over Q for the cochain complexes.

Matrices are lists of rows with ``int`` or ``Fraction`` entries.
"""

from fractions import Fraction
from math import lcm


def _integer_rows(matrix):
    rows = []
    for row in matrix:
        den = 1
        for a in row:
            if isinstance(a, Fraction):
                den = lcm(den, a.denominator)
        rows.append([int(a * den) for a in row])
    return rows


def rank(matrix):
    """Rank by fraction-free (Bareiss) elimination on an integer-scaled copy."""
    if not matrix or not matrix[0]:
        return 0
    a = _integer_rows(matrix)
    m, n = len(a), len(a[0])
    r = 0
    prev = 1
    for col in range(n):
        pivot = next((i for i in range(r, m) if a[i][col] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        p = a[r][col]
        for i in range(r + 1, m):
            ai = a[i]
            f = ai[col]
            for j in range(col + 1, n):
                # exact division is guaranteed by Sylvester's identity
                ai[j] = (p * ai[j] - f * a[r][j]) // prev
            ai[col] = 0
        prev = p
        r += 1
        if r == m:
            break
    return r


def rref(matrix):
    """Reduced row echelon form over Q; returns ``(rows, pivot_columns)``."""
    a = [[Fraction(x) for x in row] for row in matrix]
    if not a:
        return a, []
    m, n = len(a), len(a[0])
    pivots = []
    r = 0
    for col in range(n):
        pivot = next((i for i in range(r, m) if a[i][col] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        p = a[r][col]
        a[r] = [x / p for x in a[r]]
        for i in range(m):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    return a, pivots


def nullspace(matrix, ncols=None):
    """Basis of ``{v : matrix v = 0}`` as a list of column vectors."""
    if not matrix:
        n = ncols or 0
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    n = len(matrix[0])
    reduced, pivots = rref(matrix)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def columns(matrix):
    if not matrix:
        return []
    return [list(col) for col in zip(*matrix)]


def matmul(a, b):
    if not a or not b:
        return []
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def is_zero_matrix(a):
    return all(x == 0 for row in a for x in row)
