"""Small exact linear algebra over Q and Z."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in r] for r in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot columns."""
    m = to_fractions(rows)
    pivots: list[int] = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                fac = m[i][c]
                m[i] = [a - fac * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def bareiss_rank(rows: Sequence[Sequence]) -> int:
    """Rank by fraction-free elimination on the denominator-cleared matrix."""
    m = [list(r) for r in to_fractions(rows) if r]
    if not m:
        return 0
    ints = []
    for r in m:
        den = 1
        for x in r:
            den = _lcm(den, x.denominator)
        ints.append([int(x * den) for x in r])
    ncols = len(ints[0])
    rank, prev = 0, 1
    for c in range(ncols):
        pr = next((i for i in range(rank, len(ints)) if ints[i][c] != 0), None)
        if pr is None:
            continue
        ints[rank], ints[pr] = ints[pr], ints[rank]
        p = ints[rank][c]
        for i in range(rank + 1, len(ints)):
            ints[i] = [(p * ints[i][j] - ints[i][c] * ints[rank][j]) // prev for j in range(ncols)]
        prev = p
        rank += 1
        if rank == len(ints):
            break
    return rank


def solve(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """A solution x of A x = b (least-index free variables set to 0), or None."""
    n = len(A[0])
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    red, piv = rref(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for r, c in enumerate(piv):
        x[c] = red[r][n]
    return x


def inverse(A: Sequence[Sequence]) -> Matrix:
    n = len(A)
    aug = [list(A[i]) + [int(i == j) for j in range(n)] for i in range(n)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def mat_vec(A: Sequence[Sequence], x: Sequence) -> list:
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def transpose(A: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*A)]


def integer_kernel(rows: Sequence[Sequence]) -> list[list[int]]:
    """A Z-basis of {c in Z^k : sum_i c_i rows[i] = 0} for rational row vectors."""
    m = to_fractions(rows)
    k = len(m)
    den = 1
    for r in m:
        for x in r:
            den = _lcm(den, x.denominator)
    work = [[int(x * den) for x in r] + [int(i == j) for j in range(k)] for i, r in enumerate(m)]
    ncols = len(m[0]) if m else 0
    # row-style Hermite reduction on the first ncols columns
    top = 0
    for c in range(ncols):
        while True:
            nz = [i for i in range(top, k) if work[i][c] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(work[i][c]))
            work[top], work[i0] = work[i0], work[top]
            done = True
            for i in range(top + 1, k):
                if work[i][c]:
                    q = work[i][c] // work[top][c]
                    work[i] = [a - q * b for a, b in zip(work[i], work[top])]
                    if work[i][c]:
                        done = False
            if done:
                top += 1
                break
    return [row[ncols:] for row in work[top:]]


def lattice_coordinates(basis: Sequence[Sequence], v: Sequence) -> list[Fraction] | None:
    """Coordinates of v in the (independent) basis rows, or None if v is outside their span."""
    return solve(transpose(basis), v)


def in_lattice(basis: Sequence[Sequence], v: Sequence) -> bool:
    c = lattice_coordinates(basis, v)
    return c is not None and all(x.denominator == 1 for x in c)
