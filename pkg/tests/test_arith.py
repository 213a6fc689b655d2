import random
from fractions import Fraction
from math import isqrt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seesaw.arith import (
    QuadIrr,
    cfrac_sqrt,
    is_square,
    pell_fundamental,
    sign_of,
    squarefree_kernel,
)


def brute_pell(D):
    v = 1
    while True:
        u2 = 1 + D * v * v
        if is_square(u2):
            return isqrt(u2), v
        v += 1


@pytest.mark.parametrize("D,expected", [(5, (9, 4)), (12, (7, 2)), (2, (3, 2)), (61, (1766319049, 226153980))])
def test_pell_examples(D, expected):
    P = pell_fundamental(D)
    assert (P.u, P.v) == expected


def test_pell_rejects_squares_and_nonpositive():
    for D in (4, 9, 0, -3):
        with pytest.raises(ValueError):
            pell_fundamental(D)


def test_pell_matches_brute_force_small():
    for D in range(2, 60):
        if is_square(D):
            continue
        P = pell_fundamental(D)
        if P.v < 10**5:
            assert (P.u, P.v) == brute_pell(D)


def test_pell_is_solution_up_to_2000():
    for D in range(2, 2001):
        if is_square(D):
            continue
        P = pell_fundamental(D)
        assert P.u * P.u - D * P.v * P.v == 1


def test_cfrac_examples():
    assert cfrac_sqrt(5).a0 == 2 and cfrac_sqrt(5).period == (4,)
    assert cfrac_sqrt(2).a0 == 1 and cfrac_sqrt(2).period == (2,)
    assert cfrac_sqrt(7, terms=6) == [2, 1, 1, 1, 4, 1]
    with pytest.raises(ValueError):
        cfrac_sqrt(9)


def test_cfrac_period_is_palindromic_with_double_a0_end():
    for D in range(2, 300):
        if is_square(D):
            continue
        cf = cfrac_sqrt(D)
        body = cf.period[:-1]
        assert cf.period[-1] == 2 * cf.a0
        assert body == body[::-1]


@pytest.mark.parametrize("x,y,D,s", [(-7, 1, 5, -1), (0, 0, 5, 0), (-2, 1, 5, 1), (3, -1, 8, 1), (3, -1, 10, -1)])
def test_sign_examples(x, y, D, s):
    assert sign_of(QuadIrr(D, x, y)) == s


def _sign_by_scaled_floor(x: Fraction, y: Fraction, D: int, bits: int = 128) -> int | None:
    """Interval evaluation: enclose x + y sqrt(D) between rationals with 2^-bits resolution."""
    scale = 1 << bits
    s = isqrt(D * scale * scale)  # s <= sqrt(D) 2^bits < s + 1
    lo_r, hi_r = Fraction(s, scale), Fraction(s + 1, scale)
    ends = [x + y * lo_r, x + y * hi_r]
    lo, hi = min(ends), max(ends)
    if lo > 0:
        return 1
    if hi < 0:
        return -1
    return None


def test_sign_agrees_with_interval_evaluation():
    rng = random.Random(7)
    decided = 0
    for _ in range(10_000):
        D = rng.choice([d for d in range(2, 200) if not is_square(d)])
        x = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 1000))
        y = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 1000))
        iv = _sign_by_scaled_floor(x, y, D)
        if iv is not None:
            decided += 1
            assert sign_of(QuadIrr(D, x, y)) == iv
    assert decided > 9_900


def test_squarefree_kernel():
    assert squarefree_kernel(12) == (2, 3)
    assert squarefree_kernel(5) == (1, 5)
    assert squarefree_kernel(72) == (6, 2)


def test_equality_across_discriminants():
    # sqrt(12) = 2 sqrt(3)
    assert QuadIrr(12, 1, 1) == QuadIrr(3, 1, 2)
    assert QuadIrr(12, 1, 1) != QuadIrr(3, 1, 1)


rats = st.fractions(min_value=-50, max_value=50, max_denominator=20)
elems = st.builds(lambda x, y: QuadIrr(7, x, y), rats, rats)


@settings(max_examples=300, deadline=None)
@given(elems, elems, elems)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a.conj() * a == a.norm()
    if a != 0:
        assert a * a.inverse() == 1


@settings(max_examples=300, deadline=None)
@given(elems, elems)
def test_order_is_consistent_with_subtraction(a, b):
    assert (a < b) == (sign_of(b - a) > 0)
    assert sign_of(a - b) == -sign_of(b - a)
