from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seesaw.qseries import (
    BasisFile,
    InconsistentSeries,
    InsufficientPrecision,
    QSeries,
    bundled_basis,
    eta_quotient,
    membership,
    qs_mul,
    read_blocks,
    span_rank,
    sturm_bound,
    write_blocks,
)

ELEVEN_A = [0, 1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4, 4, -1, -4, -2, 4, 0, 2]


def S(coeffs, weight=2, level=11, prec=None):
    return QSeries([Fr(c) for c in coeffs], len(coeffs) if prec is None else prec, weight, level)


def test_product_examples():
    assert qs_mul(S([0, 1, 1, 0], 1, 1), S([1, -1, 0, 0], 1, 1)) == S([0, 1, 0, -1], 2, 1)
    assert (S([0, 1, 1]) * S([0, 0, 0])).is_zero()


def test_product_truncates_to_min_precision_and_adds_weight():
    f = S([1, 2, 3, 4], 1, 1) * S([1, 1], 1, 1)
    assert f.prec == 2 and f.weight == 2


def test_eta_product_expansion():
    e = eta_quotient([(1, 2), (11, 2)], 11, 21)
    assert [e[n] for n in range(21)] == ELEVEN_A
    assert e.valuation() == 1


def test_eta_errors_and_empty():
    with pytest.raises(ValueError):
        eta_quotient([(1, 1)], 1, 10)
    one = eta_quotient([], 1, 5)
    assert [one[n] for n in range(5)] == [1, 0, 0, 0, 0]


def test_eta_quotients_multiply():
    a, b = [(1, 2), (11, 2)], [(1, 24)]
    lhs = eta_quotient(a, 11, 50) * eta_quotient(b, 11, 50)
    rhs = eta_quotient(a + b, 11, 50)
    assert [lhs[n] for n in range(50)] == [rhs[n] for n in range(50)]


@pytest.mark.parametrize("k,N,b", [(2, 11, 3), (2, 1, 1), (4, 1, 1), (12, 1, 2), (2, 6, 3)])
def test_sturm_bound(k, N, b):
    assert sturm_bound(k, N) == b


def test_membership_examples():
    basis = bundled_basis()
    e = basis.series[0]
    m = membership(e.scale(3), basis)
    assert m.member and m.coordinates == [3]
    bad = QSeries(list(e.coeffs), e.prec, 2, 11)
    bad.coeffs[1] += 1
    m = membership(bad, basis)
    # a_1 fixes the coordinate, so the system first fails at q^2
    assert not m.member and m.witness == 2


def test_membership_disagreement_beyond_bound_is_inconsistent():
    basis = bundled_basis()
    e = basis.series[0]
    bad = QSeries(list(e.coeffs), e.prec, 2, 11)
    bad.coeffs[50] += 1
    with pytest.raises(InconsistentSeries):
        membership(bad, basis)


def test_membership_needs_precision():
    with pytest.raises(InsufficientPrecision):
        membership(S([0, 1]), bundled_basis())


def test_membership_coordinates_reproduce_all_coefficients():
    basis = bundled_basis()
    f = basis.series[0].scale(Fr(-7, 3))
    m = membership(f, basis)
    for n in range(f.prec):
        assert sum(c * b[n] for c, b in zip(m.coordinates, basis.series)) == f[n]


def test_span_rank_examples():
    e = bundled_basis().series[0]
    assert span_rank([e, e]) == 1
    assert span_rank([]) == 0
    assert span_rank(bundled_basis().series) == 1
    with pytest.raises(ValueError):
        span_rank([e, S([0, 1, 0, 0, 0], 2, 1)])


def test_span_rank_invariant_under_scaling_and_permutation():
    fs = [S([0, 1, 2, 3, 4]), S([0, 0, 1, 1, 1]), S([0, 1, 3, 4, 5])]
    r = span_rank(fs)
    assert r == 2
    assert span_rank([fs[2].scale(5), fs[0], fs[1].scale(Fr(-1, 2))]) == r


def test_text_round_trip(tmp_path):
    e = bundled_basis().series[0]
    assert QSeries.from_text(e.to_text()) == e
    assert read_blocks(write_blocks([e, e.scale(2)])) == [e, e.scale(2)]
    path = tmp_path / "b.qseries"
    BasisFile([e]).dump(path)
    assert BasisFile.load(path).series == [e]


coeff = st.fractions(min_value=-20, max_value=20, max_denominator=6)
series = st.lists(coeff, min_size=8, max_size=8).map(lambda cs: QSeries(cs, 8, 1, 1))


@settings(max_examples=100, deadline=None)
@given(series, series, series)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


def test_membership_ignores_skipped_indices():
    basis = bundled_basis()
    e = basis.series[0]
    f = QSeries([c if n % 2 else Fr(0) for n, c in enumerate(e.coeffs)], e.prec, 2, 11)
    skip = [n for n in range(e.prec) if n % 2 == 0 and n > 0]
    m = membership(f, basis, skip)
    assert m.member and m.coordinates == [1] and not m.certified
    m = membership(f, basis, [50])
    assert m.certified and not m.member and m.witness == 2
