import random
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seesaw.arith import PellSolution, pell_fundamental
from seesaw.quadforms import (
    QuadForm,
    automorph,
    canonical_form,
    characters,
    class_representatives,
    cycle_count,
    gamma0_class_key,
    gamma0_wide_form,
    gamma0_witness,
    heegner_form,
    heegner_in_class,
    in_gamma0,
    is_fundamental_disc,
    is_valid_disc,
    lattice_level,
    mat_det,
    mat_mul,
    narrow_class_group,
    optimal_embedding_matrix,
    primitive_automorph,
    principal_form,
    reduce_cycle,
    sl2_equivalent,
)


def test_reduce_cycle_of_disc_12_principal_form():
    cyc = reduce_cycle(QuadForm(1, 2, -2))
    assert QuadForm(1, 2, -2) in cyc


def test_heegner_form_of_disc_5_is_principal():
    assert sl2_equivalent(QuadForm(11, 7, 1), principal_form(5))
    assert set(reduce_cycle(QuadForm(11, 7, 1))) == set(reduce_cycle(principal_form(5)))


def test_negative_discriminant_rejected():
    with pytest.raises(ValueError):
        reduce_cycle(QuadForm(1, 0, 1))


@pytest.mark.parametrize("D,order", [(5, 1), (12, 2), (8, 1), (60, 4), (145, 4)])
def test_class_group_orders(D, order):
    assert narrow_class_group(D).order == order


def test_invalid_discriminant_rejected():
    with pytest.raises(ValueError):
        narrow_class_group(7)


def test_characters_small_groups():
    assert len(characters(narrow_class_group(5))) == 1
    G = narrow_class_group(12)
    chars = characters(G)
    assert len(chars) == 2
    nontrivial = [c for c in chars if not c.is_trivial()]
    assert len(nontrivial) == 1
    principal = G.index_of(principal_form(12))
    other = 1 - principal
    assert nontrivial[0].real_value(principal) == 1
    assert nontrivial[0].real_value(other) == -1


@pytest.mark.parametrize("D", [12, 60, 85, 145, 221, 229])
def test_characters_are_homomorphisms(D):
    G = narrow_class_group(D)
    for chi in characters(G):
        for i in range(G.order):
            for j in range(G.order):
                assert chi.value_exponent(G.mul(i, j)) % chi.order == \
                    (chi.value_exponent(i) + chi.value_exponent(j)) % chi.order


def test_group_axioms_and_cycle_count():
    checked = 0
    for D in range(5, 501):
        if not is_fundamental_disc(D):
            continue
        G = narrow_class_group(D)
        assert G.order == cycle_count(D)
        if G.order > 8:
            continue
        checked += 1
        e = G.index_of(principal_form(D))
        r = range(G.order)
        for i in r:
            assert G.mul(e, i) == i
            assert G.mul(i, G.inverse(i)) == e
            for j in r:
                assert G.mul(i, j) == G.mul(j, i)
                for k in r:
                    assert G.mul(G.mul(i, j), k) == G.mul(i, G.mul(j, k))
    assert checked > 100


def test_heegner_examples():
    h = heegner_form(5, 11)
    assert (h.r, h.form) == (7, QuadForm(11, 7, 1))
    h = heegner_form(12, 11)
    assert (h.r, h.form) == (10, QuadForm(22, 10, 1))
    with pytest.raises(ValueError, match="not split"):
        heegner_form(5, 7)


@pytest.mark.parametrize("D", [5, 12, 20, 37, 53, 60, 93, 104, 113, 125])
def test_heegner_congruences(D):
    p = 11
    h = heegner_form(D, p)
    f = h.form
    assert f.disc == D
    assert f.a % p == 0
    assert (f.b - h.r) % p == 0
    assert (h.r * h.r - D) % (4 * p) == 0


def test_heegner_in_every_class():
    split = [D for D in range(5, 300) if is_fundamental_disc(D) and pow(D, 5, 11) == 1]
    multi = [D for D in split if narrow_class_group(D).order > 1][:4]
    assert multi
    for D in multi:
        G = narrow_class_group(D)
        for k in range(G.order):
            h = heegner_form(D, 11, klass=k)
            assert G.index_of(h.form) == k
    for f in class_representatives(48):
        h = heegner_in_class(f, 11)
        assert sl2_equivalent(h.form, f) and h.form.a % 11 == 0


def test_automorph_examples():
    assert automorph(QuadForm(11, 7, 1), pell_fundamental(5)) == ((-19, -8), (88, 37))
    assert automorph(QuadForm(22, 10, 1), pell_fundamental(12)) == ((-13, -4), (88, 27))
    assert automorph(QuadForm(3, 1, -2), PellSolution(1, 0, 25)) == ((1, 0), (0, 1))


def test_optimal_embedding_examples():
    for f, M, D in [
        (QuadForm(11, 7, 1), ((-7, -2), (22, 7)), 5),
        (QuadForm(22, 10, 1), ((-10, -2), (44, 10)), 12),
        (QuadForm(1, 0, -3), ((0, 6), (2, 0)), 12),
    ]:
        assert optimal_embedding_matrix(f) == M
        assert mat_mul(M, M) == ((D, 0), (0, D))


def random_primitive_form(rng):
    while True:
        a, b, c = (rng.randint(-40, 40) for _ in range(3))
        D = b * b - 4 * a * c
        if a and gcd(gcd(a, b), c) == 1 and is_valid_disc(D):
            return QuadForm(a, b, c)


def test_automorph_preserves_form():
    rng = random.Random(11)
    for _ in range(100):
        f = random_primitive_form(rng)
        M = automorph(f, pell_fundamental(f.disc))
        assert mat_det(M) == 1
        assert f.act(M) == f
        P = primitive_automorph(f)
        assert f.act(P) == f and P != ((1, 0), (0, 1))


def test_lattice_level_examples():
    assert lattice_level([[0, 1], [1, 0]]) == 1
    assert lattice_level([[2, 0], [0, 2]]) == 4
    with pytest.raises(ValueError):
        lattice_level([[0, 0], [0, 2]])


def _direct_sum(A, B):
    n, m = len(A), len(B)
    out = [[0] * (n + m) for _ in range(n + m)]
    for i in range(n):
        for j in range(n):
            out[i][j] = A[i][j]
    for i in range(m):
        for j in range(m):
            out[n + i][n + j] = B[i][j]
    return out


even_grams = st.tuples(
    st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6)
).map(lambda t: [[2 * t[0], t[1]], [t[1], 2 * t[2]]]).filter(lambda g: g[0][0] * g[1][1] != g[0][1] ** 2)


@settings(max_examples=100, deadline=None)
@given(even_grams, even_grams)
def test_lattice_level_multiplicative(A, B):
    assert lattice_level(_direct_sum(A, B)) == lattice_level(A) * lattice_level(B)


def test_equivalence_is_an_equivalence_relation():
    rng = random.Random(3)
    # a small pool of forms per discriminant so that equivalent pairs occur
    pool = {}
    for D in (12, 60, 85, 145):
        reps = class_representatives(D)
        for f in reps:
            for _ in range(5):
                M = ((1, rng.randint(-3, 3)), (0, 1))
                S = ((0, -1), (1, 0))
                g = f.act(mat_mul(M, S)).act(((1, rng.randint(-3, 3)), (0, 1)))
                pool.setdefault(D, []).append(g)
    forms = [f for v in pool.values() for f in v]
    for _ in range(200):
        f, g, h = (rng.choice(forms) for _ in range(3))
        assert sl2_equivalent(f, f)
        assert sl2_equivalent(f, g) == sl2_equivalent(g, f)
        if sl2_equivalent(f, g) and sl2_equivalent(g, h):
            assert sl2_equivalent(f, h)


def test_canonical_form_transforms():
    rng = random.Random(5)
    for _ in range(50):
        f = random_primitive_form(rng)
        r, P = canonical_form(f)
        assert f.act(P) == r and mat_det(P) == 1


def test_gamma0_wide_form_is_equivalent():
    for D in (5, 12, 20, 37, 48, 60):
        for f in class_representatives(D):
            try:
                h = heegner_in_class(f, 11)
            except ValueError:
                continue
            g, gamma = gamma0_wide_form(h.form, 11)
            assert in_gamma0(gamma, 11) and mat_det(gamma) == 1
            assert h.form.act(gamma) == g
            assert abs(g.a) <= abs(h.form.a)
            assert gamma0_class_key(g, 11) == gamma0_class_key(h.form, 11)
            assert gamma0_witness(h.form, g, 11) is not None
