import random
from collections import Counter
from math import gcd

import pytest

from seesaw.geodesics import GeodesicCycle, WeightedCycle, pair_weighted
from seesaw.hecke import (
    as_weighted,
    divisor_sigma,
    hecke_cosets,
    hecke_pair,
    hecke_translate,
    hecke_weighted,
)
from seesaw.quadforms import gamma0_class_key, heegner_form, in_gamma0, mat_det, mat_mul, mat_adj
from seesaw.suites import hecke_multiplicativity, hecke_self_adjointness


def _cycle(D, N=11):
    return GeodesicCycle(heegner_form(D, N).form, N)


def test_cosets_n2_level11():
    reps = set(hecke_cosets(2, 11).reps)
    assert reps == {((1, 0), (0, 2)), ((1, 1), (0, 2)), ((2, 0), (0, 1))}


def test_cosets_trivial_and_errors():
    assert hecke_cosets(1, 7).reps == (((1, 0), (0, 1)),)
    with pytest.raises(ValueError):
        hecke_cosets(11, 11)
    with pytest.raises(ValueError):
        hecke_cosets(0, 11)


@pytest.mark.parametrize("N", [1, 11, 13])
def test_coset_count_is_sigma(N):
    for n in range(1, 31):
        if gcd(n, N) != 1:
            continue
        reps = hecke_cosets(n, N).reps
        assert len(reps) == divisor_sigma(n)
        for M in reps:
            assert mat_det(M) == n and M[1][0] % N == 0 and gcd(M[0][0], N) == 1
        # pairwise inequivalent: M1 adj(M2) / n is never in Gamma_0(N)
        for i, A in enumerate(reps):
            for B in reps[i + 1:]:
                X = mat_mul(A, mat_adj(B))
                if all(e % n == 0 for row in X for e in row):
                    assert not in_gamma0(tuple(tuple(e // n for e in row) for row in X), N)


def test_translate_discriminants_and_content():
    for D in (5, 37, 53):
        c = _cycle(D)
        for n in (2, 3, 5, 7):
            if gcd(n, 11 * D) != 1:
                continue
            T = hecke_translate(c, n)
            assert sum(m for m, _ in T.terms) <= divisor_sigma(n)
            for _, t in T.terms:
                assert t.form.disc == n * n * D
                assert n % t.form.content == 0


def test_translate_of_n2_for_disc5():
    T = hecke_translate(_cycle(5), 2)
    assert all(t.form.disc == 20 for _, t in T.terms)


def test_t1_is_identity():
    c = _cycle(5)
    T = hecke_translate(c, 1)
    assert [(m, t.form) for m, t in T.terms] == [(1, c.form)]
    w1, w2 = as_weighted(_cycle(5)), as_weighted(_cycle(12))
    assert hecke_pair(w1, 1, w2) == pair_weighted(w1, w2)


def test_hecke_pair_rejects_non_coprime_n():
    with pytest.raises(ValueError):
        hecke_pair(as_weighted(_cycle(5)), 5, as_weighted(_cycle(12)))


def test_hecke_pair_bilinear():
    w1 = as_weighted(_cycle(5))
    w2 = WeightedCycle([(1, _cycle(12)), (2, _cycle(5))])
    n = 7
    assert hecke_pair(w1.scaled(3), n, w2) == 3 * hecke_pair(w1, n, w2)
    assert hecke_pair(w1, n, w2) == hecke_pair(w1, n, as_weighted(_cycle(12))) + 2 * hecke_pair(
        w1, n, as_weighted(_cycle(5)))


def test_self_adjoint_for_disc5_class():
    c = _cycle(5)
    w = as_weighted(c)
    assert hecke_pair(w, 2, w) == pair_weighted(hecke_translate(c, 2), w)


def test_self_adjoint_nonzero_case():
    c1, c2 = _cycle(5), _cycle(12)
    lhs = hecke_pair(as_weighted(c1), 7, as_weighted(c2))
    rhs = pair_weighted(hecke_translate(c1, 7), as_weighted(c2))
    assert lhs == rhs != 0


def test_self_adjoint_random_pairs():
    name, ok, detail = hecke_self_adjointness(random.Random(1), pairs=5)
    assert ok, detail


def _classes(w):
    out = Counter()
    for k, c in w.terms:
        out[gamma0_class_key(c.form.primitive_part(), c.level)] += k
    return out


@pytest.mark.parametrize("D", [5, 37, 53])
def test_multiplicative_on_cycles(D):
    c = _cycle(D)
    for m, n in [(2, 3), (2, 5), (3, 5)]:
        if gcd(m * n, D) != 1:
            continue
        assert +_classes(hecke_weighted(hecke_translate(c, n), m)) == +_classes(hecke_translate(c, m * n))
        lhs, rhs = hecke_multiplicativity(c, c, m, n)
        assert lhs == rhs


@pytest.mark.parametrize("D", [5, 37, 53])
def test_prime_square_relation_on_cycles(D):
    # T_p T_p = T_{p^2} + p T_1 for p prime to the level
    c = _cycle(D)
    for p in (2, 3):
        lhs = _classes(hecke_weighted(hecke_translate(c, p), p))
        rhs = _classes(hecke_translate(c, p * p))
        rhs[gamma0_class_key(c.form, 11)] += p
        assert +lhs == +rhs


def test_coefficients_of_disc5_disc12_pairing():
    # the (5, 12) pairing series at level 11 reproduces the Hecke eigenvalues of
    # the weight-2 newform of level 11 at n = 1, 7, 13
    w1, w2 = as_weighted(_cycle(5)), as_weighted(_cycle(12))
    assert [hecke_pair(w1, n, w2) for n in (1, 7, 13)] == [1, -2, 4]
