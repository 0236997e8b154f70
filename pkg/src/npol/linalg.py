"""Exact integer and rational linear algebra.

Matrices are plain nested sequences of Python ints (row-major).  Nothing
in here touches floating point; results are tuples of tuples so they can be
hashed and compared directly.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

IntMatrix = tuple[tuple[int, ...], ...]
LatticeVector = tuple[int, ...]
RationalVector = tuple[Fraction, ...]


class ShapeError(ValueError):
    pass


class SingularMatrixError(ValueError):
    pass


def as_matrix(M: Sequence[Sequence[int]]) -> IntMatrix:
    rows = tuple(tuple(int(x) for x in row) for row in M)
    if not rows or not rows[0]:
        raise ShapeError("matrix must have at least one row and one column")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ShapeError("ragged matrix")
    return rows


def identity(n: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def transpose(M: Sequence[Sequence[int]]) -> IntMatrix:
    return tuple(zip(*M))


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> IntMatrix:
    Bt = transpose(B)
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in Bt) for row in A)


def matvec(A: Sequence[Sequence[int]], v: Sequence[int]) -> tuple:
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A)


def dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def vgcd(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, x)
    return g


def primitive(v: Sequence[int]) -> LatticeVector:
    """Divide ``v`` by the gcd of its entries.

    The divisor is positive, so the sign of every coordinate (in particular
    the first nonzero one) is kept.
    """
    g = vgcd(v)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in v)


def determinant(M: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    A = [list(r) for r in as_matrix(M)]
    n = len(A)
    if any(len(r) != n for r in A):
        raise ShapeError(f"determinant of a non-square {n}x{len(A[0])} matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def rank(M: Sequence[Sequence[int]]) -> int:
    A = [[Fraction(x) for x in r] for r in M]
    if not A:
        return 0
    m, n = len(A), len(A[0])
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(r + 1, m):
            if A[i][c] != 0:
                f = A[i][c] / A[r][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
        if r == m:
            break
    return r


def _inverse_fractions(M: IntMatrix) -> list[list[Fraction]]:
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(M)]
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for i in range(n):
            if i != c and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return [row[n:] for row in A]


def adjugate(M: Sequence[Sequence[int]]) -> tuple[IntMatrix, int]:
    """Return ``(adj(M), det(M))`` with ``M @ adj(M) == det(M) * I``."""
    A = as_matrix(M)
    if len(A) != len(A[0]):
        raise ShapeError("adjugate of a non-square matrix")
    det = determinant(A)
    if det == 0:
        raise SingularMatrixError("matrix is singular")
    inv = _inverse_fractions(A)
    adj = tuple(tuple(int(x * det) for x in row) for row in inv)
    return adj, det


def solve_rational(M: Sequence[Sequence[int]], b: Sequence[int]) -> RationalVector:
    """Exact solution of ``M x = b`` for square nonsingular ``M``."""
    A = as_matrix(M)
    n = len(A)
    if len(A[0]) != n:
        raise ShapeError("solve_rational needs a square matrix")
    if len(b) != n:
        raise ShapeError("right-hand side has the wrong length")
    aug = [[Fraction(x) for x in row] + [Fraction(bi)] for row, bi in zip(A, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * p for a, p in zip(aug[i], aug[c])]
    return tuple(row[n] for row in aug)


def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form ``(D, U, V)`` with ``U @ M @ V == D``.

    Pivoting always takes the nonzero entry of least absolute value in the
    remaining block (ties broken by position), so the output is a
    deterministic function of the input.
    """
    A = [list(r) for r in as_matrix(M)]
    m, n = len(A), len(A[0])
    U = [list(r) for r in identity(m)]
    V = [list(r) for r in identity(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for row in A:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    a = A[i][j]
                    if a != 0 and (best is None or abs(a) < best[0]):
                        best = (abs(a), i, j)
            if best is None:
                break
            _, pi, pj = best
            if pi != t:
                swap_rows(t, pi)
            if pj != t:
                swap_cols(t, pj)
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                q = A[i][t] // p
                if q:
                    add_row(i, t, -q)
                if A[i][t]:
                    clean = False
            for j in range(t + 1, n):
                q = A[t][j] // p
                if q:
                    add_col(j, t, -q)
                if A[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % p), None)
            if bad is not None:
                add_row(t, bad[0], 1)
                continue
            break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    freeze = lambda X: tuple(tuple(r) for r in X)  # noqa: E731
    return freeze(A), freeze(U), freeze(V)


def hermite_normal_form(M: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix]:
    """Row Hermite normal form ``(H, U)`` with ``U @ M == H``.

    ``H`` is in row echelon form, pivots are positive, entries above a pivot
    lie in ``[0, pivot)`` and zero rows sit at the bottom.
    """
    A = [list(r) for r in as_matrix(M)]
    m, n = len(A), len(A[0])
    U = [list(r) for r in identity(m)]
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(A[i][c]), i))
            if piv != r:
                A[r], A[piv] = A[piv], A[r]
                U[r], U[piv] = U[piv], U[r]
            done = True
            for i in range(r + 1, m):
                q = A[i][c] // A[r][c]
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
                if A[i][c]:
                    done = False
            if done:
                break
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
            U[r] = [-x for x in U[r]]
        p = A[r][c]
        for i in range(r):
            q = A[i][c] // p
            if q:
                A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                U[i] = [a - q * b for a, b in zip(U[i], U[r])]
        r += 1
    return tuple(tuple(x) for x in A), tuple(tuple(x) for x in U)


def affine_rank(points: Sequence[Sequence[int]]) -> int:
    """Dimension of the affine hull of a nonempty point set."""
    pts = list(points)
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    return rank(diffs) if diffs else 0
