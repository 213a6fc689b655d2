"""Exact arithmetic over Q and real quadratic fields.

Rationals are plain :class:`fractions.Fraction` values.  Elements of a real
quadratic field are :class:`QuadIrr` values ``x + y*sqrt(D)`` whose signs are
decided by rationalizing, never by floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Union

Rational = Union[int, Fraction]


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def squarefree_kernel(n: int) -> tuple[int, int]:
    """Write a positive integer as ``k**2 * d`` with ``d`` squarefree; return (k, d)."""
    if n <= 0:
        raise ValueError("squarefree kernel needs a positive integer")
    k, d, p = 1, 1, 2
    m = n
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        k *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1
    d *= m
    return k, d


def sign(x) -> int:
    return (x > 0) - (x < 0)


def _check_disc(D: int) -> None:
    if D <= 0 or is_square(D):
        raise ValueError(f"D={D} must be a positive non-square integer")


@dataclass(frozen=True)
class QuadIrr:
    """The real number ``x + y*sqrt(disc)`` with rational ``x``, ``y``."""

    disc: int
    x: Fraction = Fraction(0)
    y: Fraction = Fraction(0)

    def __post_init__(self):
        _check_disc(self.disc)
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))

    # canonical coordinates in Q(sqrt(d)) with d squarefree
    def _canon(self) -> tuple[int, Fraction, Fraction]:
        k, d = squarefree_kernel(self.disc)
        return d, self.x, self.y * k

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.y == 0 and self.x == other
        if not isinstance(other, QuadIrr):
            return NotImplemented
        a, b = self._canon(), other._canon()
        if a[2] == 0 and b[2] == 0:
            return a[1] == b[1]
        return a == b

    def __hash__(self):
        d, x, y = self._canon()
        return hash((x,)) if y == 0 else hash((d, x, y))

    def _coerce(self, other) -> "QuadIrr":
        if isinstance(other, QuadIrr):
            if other.disc != self.disc:
                raise ValueError("mixed discriminants")
            return other
        return QuadIrr(self.disc, Fraction(other), Fraction(0))

    def __add__(self, other):
        o = self._coerce(other)
        return QuadIrr(self.disc, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return QuadIrr(self.disc, -self.x, -self.y)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return QuadIrr(
            self.disc,
            self.x * o.x + self.disc * self.y * o.y,
            self.x * o.y + self.y * o.x,
        )

    __rmul__ = __mul__

    def conj(self) -> "QuadIrr":
        return QuadIrr(self.disc, self.x, -self.y)

    def norm(self) -> Fraction:
        return self.x * self.x - self.disc * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x

    def inverse(self) -> "QuadIrr":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero has no inverse")
        return QuadIrr(self.disc, self.x / n, -self.y / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def sign(self) -> int:
        return sign_of(self)

    def __lt__(self, other):
        return sign_of(self - other) < 0

    def __le__(self, other):
        return sign_of(self - other) <= 0

    def __gt__(self, other):
        return sign_of(self - other) > 0

    def __ge__(self, other):
        return sign_of(self - other) >= 0

    def __float__(self):
        return float(self.x) + float(self.y) * self.disc ** 0.5

    def __repr__(self):
        return f"QuadIrr({self.x} + {self.y}*sqrt({self.disc}))"


def sign_of(q: QuadIrr) -> int:
    """Exact sign of ``x + y*sqrt(D)``."""
    sx, sy = sign(q.x), sign(q.y)
    if sy == 0:
        return sx
    if sx == 0 or sx == sy:
        return sy
    # opposite signs: compare x^2 with D*y^2
    return sy if q.disc * q.y * q.y > q.x * q.x else sx


def sign_sqrt_combo(x: Rational, y: Rational, D: Rational) -> int:
    """Sign of ``x + y*sqrt(D)`` for a nonnegative rational radicand ``D``."""
    sx, sy = sign(x), sign(y)
    if sy == 0 or D == 0:
        return sx
    if sx == 0 or sx == sy:
        return sy
    lhs, rhs = Fraction(y) ** 2 * D, Fraction(x) ** 2
    if lhs == rhs:
        return 0
    return sy if lhs > rhs else sx


@dataclass(frozen=True)
class ContinuedFraction:
    """Periodic expansion ``[a0; period, period, ...]`` of ``sqrt(D)``."""

    disc: int
    a0: int
    period: tuple[int, ...]

    def terms(self, count: int) -> list[int]:
        out = [self.a0]
        i = 0
        while len(out) < count:
            out.append(self.period[i % len(self.period)])
            i += 1
        return out[:count]

    def __str__(self):
        return f"[{self.a0}; ({', '.join(map(str, self.period))})]"


def cfrac_sqrt(D: int, terms: int | None = None) -> ContinuedFraction | list[int]:
    """Continued fraction of sqrt(D).

    The period is found by detecting a repeated (P, Q) state of the standard
    recurrence.  With ``terms`` given the first ``terms`` partial quotients are
    returned instead of the structured expansion.
    """
    if D <= 0 or is_square(D):
        raise ValueError(f"D={D} must be a positive non-square integer")
    a0 = isqrt(D)
    P, Q = 0, 1
    seen: dict[tuple[int, int], int] = {}
    quotients: list[int] = []
    while True:
        a = (a0 + P) // Q
        if (P, Q) in seen:
            start = seen[(P, Q)]
            break
        seen[(P, Q)] = len(quotients)
        quotients.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    # the state (0, 1) only occurs at the start, so the period begins at index 1
    assert start == 1
    cf = ContinuedFraction(D, quotients[0], tuple(quotients[1:]))
    if terms is not None:
        return cf.terms(terms)
    return cf


@dataclass(frozen=True)
class PellSolution:
    u: int
    v: int
    disc: int

    def __post_init__(self):
        if self.u * self.u - self.disc * self.v * self.v != 1:
            raise ValueError("not a Pell solution")

    def unit(self) -> QuadIrr:
        return QuadIrr(self.disc, self.u, self.v)


def pell_fundamental(D: int) -> PellSolution:
    """Smallest positive solution of u^2 - D v^2 = 1, from the convergents of sqrt(D)."""
    if D <= 0 or is_square(D):
        raise ValueError(f"D={D} must be a positive non-square integer")
    cf = cfrac_sqrt(D)
    period = len(cf.period)
    length = period if period % 2 == 0 else 2 * period
    h_prev, h = 1, cf.a0
    k_prev, k = 0, 1
    for a in cf.terms(length)[1:]:
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
    # (h, k) is now the convergent of index length-1
    return PellSolution(h, k, D)
