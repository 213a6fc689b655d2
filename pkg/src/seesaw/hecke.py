"""Hecke operators on geodesic cycles of Y_0(N)."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .geodesics import GeodesicCycle, WeightedCycle, pair_weighted
from .quadforms import Matrix, gamma0_automorph, mat_adj, mat_mul, mat_neg, mat_pow


@dataclass(frozen=True)
class HeckeCosets:
    n: int
    level: int
    reps: tuple[Matrix, ...]


def divisor_sigma(n: int) -> int:
    return sum(d for d in range(1, n + 1) if n % d == 0)


def hecke_cosets(n: int, N: int) -> HeckeCosets:
    """Representatives ``[[a, b], [0, d]]`` (ad = n, 0 <= b < d) of Gamma_0(N) \\ Delta_n."""
    if n < 1 or N < 1:
        raise ValueError("n and N must be positive")
    if gcd(n, N) != 1:
        raise ValueError(f"gcd(n, N) = gcd({n}, {N}) must be 1")
    reps = []
    for a in range(1, n + 1):
        if n % a:
            continue
        d = n // a
        for b in range(d):
            reps.append(((a, b), (0, d)))
    return HeckeCosets(n, N, tuple(sorted(reps)))


def coset_normal_form(X: Matrix) -> Matrix:
    """The representative ``[[a, b], [0, d]]`` (0 <= b < d) of the left coset SL_2(Z) X."""
    (x1, x2), (x3, x4) = X
    n = x1 * x4 - x2 * x3
    if n <= 0:
        raise ValueError("coset normal form needs positive determinant")
    g, u, v = _egcd(x1, x3)
    if g < 0:
        g, u, v = -g, -u, -v
    top = u * x2 + v * x4
    d = n // g
    return ((g, top % d), (0, d))


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0)
    g, x, y = _egcd(b, a % b)
    return (g, y, x - (a // b) * y)


def _winding(Y: Matrix, P: Matrix) -> int:
    """The exponent m > 0 with ``Y = +-P^m``."""
    B = P
    for m in range(1, 10_000):
        if B == Y or B == mat_neg(Y):
            return m
        B = mat_mul(B, P)
    raise RuntimeError("translate period is not a positive power of its automorph")


def hecke_translate(c: GeodesicCycle, n: int) -> WeightedCycle:
    """T_n applied to a cycle.

    For each coset representative M the geodesic of ``f.act(adj M)`` has axis
    M applied to the axis of f, with orientation carried along, and
    discriminant ``n^2 D``.  The automorph A of c permutes the cosets by
    ``Gamma_0(N) M A = Gamma_0(N) M'``.  The translates along one orbit of
    length k trace the same closed geodesic, jointly covering
    ``M A^k M^-1 = P^m`` where P is the primitive level-N automorph of the
    translate.  Each orbit therefore contributes one cycle with weight m.
    """
    cos = hecke_cosets(n, c.level)
    A = c.automorph
    index = {M: i for i, M in enumerate(cos.reps)}
    done: set[Matrix] = set()
    terms = []
    for M in cos.reps:
        if M in done:
            continue
        orbit = [M]
        done.add(M)
        X = coset_normal_form(mat_mul(M, A))
        while X != M:
            if X not in index:
                raise RuntimeError("automorph left the coset set")
            orbit.append(X)
            done.add(X)
            X = coset_normal_form(mat_mul(X, A))
        g = c.form.act(mat_adj(M))
        k = len(orbit)
        Yn = mat_mul(mat_mul(M, mat_pow(A, k)), mat_adj(M))
        Y = tuple(tuple(e // n for e in row) for row in Yn)
        P = gamma0_automorph(g.primitive_part(), c.level)
        terms.append((_winding(Y, P), GeodesicCycle(g, c.level)))
    return WeightedCycle(terms)


def hecke_weighted(w: WeightedCycle, n: int) -> WeightedCycle:
    out = WeightedCycle([])
    for coeff, c in w.terms:
        out = out + hecke_translate(c, n).scaled(coeff)
    return out


def _discs(w: WeightedCycle) -> list[int]:
    return [c.form.disc for _, c in w.terms]


def hecke_pair(w1: WeightedCycle, n: int, w2: WeightedCycle):
    """The pairing of w1 with T_n w2."""
    N = w1.level or w2.level or 1
    bad = N
    for D in _discs(w1) + _discs(w2):
        bad *= D
    if gcd(n, bad) != 1:
        raise ValueError(f"n={n} must be coprime to the level and both discriminants")
    return pair_weighted(w1, hecke_weighted(w2, n))


def as_weighted(c: GeodesicCycle, coeff=1) -> WeightedCycle:
    return WeightedCycle([(coeff, c)])
