"""Small exact linear algebra over Q(i) and integer lattices.

Matrices are lists of rows. The field routines accept exact entries
(``Fraction`` or ``GaussianRational``) mixed with ``complex`` ones; with floats the
pivot is chosen by absolute value.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .novikov import coeff_is_zero, is_exact


def _is_zero(x) -> bool:
    return coeff_is_zero(x, 1e-13)


def _pivot(rows, col, start):
    best, best_abs = None, -1.0
    for r in range(start, len(rows)):
        x = rows[r][col]
        if _is_zero(x):
            continue
        if is_exact(x):
            return r
        if abs(x) > best_abs:
            best, best_abs = r, abs(x)
    return best


def rref(M: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form and pivot columns."""
    rows = [[x if not isinstance(x, int) else Fraction(x) for x in r] for r in M]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = _pivot(rows, c, r)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not _is_zero(rows[i][c]):
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(M: Sequence[Sequence]) -> int:
    return len(rref(M)[1]) if M else 0


def det(M: Sequence[Sequence]):
    n = len(M)
    rows = [[Fraction(x) if isinstance(x, int) else x for x in r] for r in M]
    sign = 1
    d = Fraction(1)
    for c in range(n):
        p = _pivot(rows, c, c)
        if p is None:
            return Fraction(0)
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            sign = -sign
        d = d * rows[c][c]
        inv = 1 / rows[c][c]
        for i in range(c + 1, n):
            if not _is_zero(rows[i][c]):
                f = rows[i][c] * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return d * sign


def solve(A: Sequence[Sequence], b: Sequence):
    """Solve the square system ``A x = b``; ``None`` if ``A`` is singular."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(piv) > n and piv[n] == n:
        return None
    return [R[i][n] for i in range(n)]


def inverse(A: Sequence[Sequence]):
    n = len(A)
    aug = [list(A[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        return None
    return [row[n:] for row in R]


def matmul(A, B):
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in zip(*B)] for row in A]


def row_space_contains(rows: Sequence[Sequence], v: Sequence) -> bool:
    if not rows:
        return all(x == 0 for x in v)
    return rank(list(rows) + [list(v)]) == rank(rows)


def nullspace(M: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of ``{x : M x = 0}`` over Q."""
    if not M:
        n = ncols or 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    R, piv = rref(M)
    n = len(M[0])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for r, p in enumerate(piv):
            x[p] = -R[r][f]
        basis.append(x)
    return basis


def primitive_integer(v: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to a primitive integer vector."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    return [x // g for x in ints] if g else ints


# integer lattices

def _integer_echelon(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Row-reduce in place with unimodular operations on the first ``ncols`` columns."""
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        while True:
            nz = [i for i in range(r, nrows) if rows[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(rows[i][c]))
            rows[r], rows[p] = rows[p], rows[r]
            done = True
            for i in range(r + 1, nrows):
                if rows[i][c] != 0:
                    q = rows[i][c] // rows[r][c]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
                    if rows[i][c] != 0:
                        done = False
            if done:
                break
        if any(rows[i][c] != 0 for i in range(r, nrows)):
            r += 1
        if r == nrows:
            break
    return rows


def integer_kernel(M: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Z-basis of ``{x in Z^n : M x = 0}``."""
    if not M:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    m = len(M)
    rows = [[int(M[k][i]) for k in range(m)] + [int(i == j) for j in range(n)] for i in range(n)]
    _integer_echelon(rows, m)
    return [row[m:] for row in rows if all(x == 0 for x in row[:m])]


def saturate(rows: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Z-basis of ``span_Q(rows) intersected with Z^n``."""
    rows = [list(map(int, r)) for r in rows if any(r)]
    if not rows:
        return []
    ker = nullspace(rows)
    if not ker:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    K = [primitive_integer(k) for k in ker]
    return integer_kernel(K, n)


def maximal_minors_gcd(rows: Sequence[Sequence[int]]) -> int:
    r = len(rows)
    n = len(rows[0])
    g = 0
    for cols in combinations(range(n), r):
        d = det([[row[c] for c in cols] for row in rows])
        g = math.gcd(g, int(d))
    return g


def is_primitive_system(rows: Sequence[Sequence[int]]) -> bool:
    """True iff the rows are a Z-basis of a saturated sublattice."""
    if not rows:
        return True
    return maximal_minors_gcd(rows) == 1


def complete_basis(B: Sequence[Sequence[int]], C: Sequence[Sequence[int]]) -> list[list[int]]:
    """Vectors ``W`` with ``B + W`` a Z-basis of the lattice spanned by ``C``.

    ``B`` must be a primitive system inside that lattice.
    """
    s = len(C)
    r = len(B)
    if r == s:
        return []
    # coordinates X of B in the basis C (B = X C)
    Ct = [list(col) for col in zip(*C)]
    X = []
    for b in B:
        sol = _solve_overdetermined(Ct, list(b))
        X.append([int(x) for x in sol])
    # unimodular U with U X^T = [H^T; 0]
    rows = [[X[j][i] for j in range(r)] + [int(i == k) for k in range(s)] for i in range(s)]
    _integer_echelon(rows, r)
    U = [row[r:] for row in rows]
    Uinv = inverse(U)
    # columns r.. of U^-1, transposed, are the complement coordinates
    W = []
    for col in range(r, s):
        coords = [int(Uinv[i][col]) for i in range(s)]
        W.append([sum(coords[i] * C[i][j] for i in range(s)) for j in range(len(C[0]))])
    return W


def _solve_overdetermined(A, b):
    """Exact solution of a consistent full-column-rank system ``A x = b``."""
    ncols = len(A[0])
    aug = [list(A[i]) + [b[i]] for i in range(len(A))]
    R, piv = rref(aug)
    if ncols in piv:
        raise ValueError("inconsistent system")
    x = [Fraction(0)] * ncols
    for r, p in enumerate(piv):
        x[p] = R[r][ncols]
    return x


# polyhedra

def enumerate_vertices(A: Sequence[Sequence], b: Sequence) -> list[tuple[tuple[Fraction, ...], frozenset[int]]]:
    """Vertices of ``{x : A x >= b}`` by exhaustive n-subset intersection.

    Returns ``(vertex, active constraint indices)`` pairs in a canonical order.
    """
    m = len(A)
    if m == 0:
        return []
    n = len(A[0])
    found: dict[tuple, set[int]] = {}
    for subset in combinations(range(m), n):
        sub = [A[i] for i in subset]
        x = solve(sub, [b[i] for i in subset])
        if x is None:
            continue
        x = tuple(Fraction(v) for v in x)
        if x in found:
            continue
        vals = [sum(a * xi for a, xi in zip(A[i], x)) - b[i] for i in range(m)]
        if all(v >= 0 for v in vals):
            found[x] = {i for i in range(m) if vals[i] == 0}
    return sorted((v, frozenset(s)) for v, s in found.items())


def in_cone(target: Sequence, generators: Sequence[Sequence]):
    """Nonnegative coefficients ``c`` with ``sum c_j g_j = target``, or ``None``.

    Searches basic solutions (Caratheodory), which is exact and complete.
    """
    if all(x == 0 for x in target):
        return [Fraction(0)] * len(generators)
    if not generators:
        return None
    r = rank(generators)
    if not row_space_contains(generators, target):
        return None
    for subset in combinations(range(len(generators)), r):
        G = [generators[j] for j in subset]
        if rank(G) < r:
            continue
        Gt = [list(col) for col in zip(*G)]
        try:
            c = _solve_overdetermined(Gt, list(target))
        except ValueError:
            continue
        if all(x >= 0 for x in c):
            out = [Fraction(0)] * len(generators)
            for j, x in zip(subset, c):
                out[j] = x
            return out
    return None
