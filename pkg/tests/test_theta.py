from fractions import Fraction as Fr

import pytest

from seesaw.quadforms import lattice_level
from seesaw.theta import (
    EtaleAlgebraData,
    Factor,
    ThetaSetup,
    biquadratic_setup,
    compute_alpha,
    diagonal_restriction,
    gram_signature,
    hilbert_coefficient,
    norm_solutions,
    product_subsetup,
    signature_of,
    split_factor_series,
    split_product_series,
    split_setup,
)

QSQRT5 = EtaleAlgebraData((Factor(1, (Fr(5),)),))
OK5 = [(Fr(1), Fr(0)), (Fr(1, 2), Fr(1, 2))]  # ring of integers of Q(sqrt 5)


def ring_setup(units):
    s = ThetaSetup(QSQRT5, (Fr(1),), OK5, units, None, "trivial", Fr(1), {"level": 1})
    s.check()
    return s


def test_signature_three_place_types():
    split5 = EtaleAlgebraData((Factor(1, (Fr(5),)), Factor(1, (Fr(5),))))
    assert signature_of(split5, ((Fr(1),), (Fr(1),))) == (2, 2)
    imag = EtaleAlgebraData((Factor(1, (Fr(-3),)),))
    assert signature_of(imag, (Fr(1),)) == (2, 0)
    assert signature_of(imag, (Fr(-1),)) == (0, 2)


@pytest.mark.parametrize("alpha", [(Fr(1),), (Fr(-1),), (Fr(3, 7),)])
@pytest.mark.parametrize("delta", [5, -3, -7, 13])
def test_signature_matches_gram_inertia(delta, alpha):
    alg = EtaleAlgebraData((Factor(1, (Fr(delta),)),))
    gram = [[alg.trace_form(alpha, x, y) for y in alg.basis()] for x in alg.basis()]
    assert signature_of(alg, alpha) == gram_signature(gram)


def test_setup_signatures_match_gram():
    s, _ = split_setup(5, 11)
    b, _ = biquadratic_setup(5, 12, 11)
    for setup in (s, b):
        assert signature_of(setup.algebra, setup.alpha) == gram_signature(setup.gram()) == (2, 2)


def test_compute_alpha_trace_form_is_one():
    gram = [[QSQRT5.trace_form((Fr(1),), x, y) for y in QSQRT5.basis()] for x in QSQRT5.basis()]
    assert compute_alpha(gram, QSQRT5) == (Fr(1),)


def test_compute_alpha_rejects_zero_generator():
    with pytest.raises(ValueError):
        compute_alpha([[0, 0], [0, 0]], QSQRT5)


def test_compute_alpha_reconstructs_biquadratic_gram():
    setup, model = biquadratic_setup(5, 12, 11)
    gram = model.gram()
    alpha = compute_alpha(gram, setup.algebra)
    alg = setup.algebra
    basis = alg.basis()
    rebuilt = [[alg.trace_form(alpha, x, y) for y in basis] for x in basis]
    assert rebuilt == [[Fr(v) for v in row] for row in gram]
    assert alg.totally_positive(alpha)


def test_lattice_levels_of_setups():
    s, _ = biquadratic_setup(5, 12, 11)
    gram = s.gram()
    assert all(v.denominator == 1 for row in gram for v in row)
    assert all(gram[i][i] % 2 == 0 for i in range(len(gram)))
    assert lattice_level([[int(v) for v in row] for row in gram]) % 11 == 0


def test_norm_solutions_unit_norm():
    s = ring_setup([(Fr(3, 2), Fr(1, 2))])
    sols = norm_solutions(s, (Fr(1),))
    # the orbits of +1 and -1 under the totally positive units
    assert len(sols) == 2
    assert (Fr(1), Fr(0)) in sols
    assert all(QSQRT5.norm(v) == (Fr(1),) for v in sols)


def test_norm_solutions_vanish_off_total_positivity():
    s = ring_setup([(Fr(3, 2), Fr(1, 2))])
    assert norm_solutions(s, (Fr(-1),)) == []
    assert norm_solutions(s, (Fr(2),)) == []  # 2 is inert in Q(sqrt 5)
    assert hilbert_coefficient(s, (Fr(-4),)).value == 0
    assert hilbert_coefficient(s, (Fr(0),)).value == 0


def test_sign_weights_cancel_for_single_real_place():
    # v and -v land in different orbits with opposite sign weights
    s = ring_setup([(Fr(3, 2), Fr(1, 2))])
    for m in range(1, 30):
        assert hilbert_coefficient(s, (Fr(m),)).value == 0


def test_unit_invariance():
    eps2 = (Fr(3, 2), Fr(1, 2))
    eps2_inv = (Fr(3, 2), Fr(-1, 2))
    a, b = ring_setup([eps2]), ring_setup([eps2_inv])
    for m in (1, 4, 5, 9, 11, 19, 20):
        sa, sb = norm_solutions(a, (Fr(m),)), norm_solutions(b, (Fr(m),))
        assert len(sa) == len(sb)
        assert hilbert_coefficient(a, (Fr(m),)).value == hilbert_coefficient(b, (Fr(m),)).value


def test_diagonal_restriction_constant_term_zero():
    s, _ = biquadratic_setup(5, 12, 11)
    series = diagonal_restriction(s, 10)
    assert series[0] == 0
    assert series.weight == 2
    # twice the coefficients of the weight-2 newform of level 11
    assert [series[n] for n in range(1, 11)] == [2 * a for a in (1, -2, -1, 2, 1, 2, -2, 0, -2, -2)]


def test_split_factorization_matches_joint_series():
    s = product_subsetup(split_setup(5, 11)[0])
    joint = diagonal_restriction(s, 10)
    prod = split_factor_series(s, 0, 10) * split_factor_series(s, 1, 10)
    assert joint == prod == split_product_series(s, 10)


def test_setup_json_round_trip():
    s, _ = biquadratic_setup(5, 12, 11)
    assert ThetaSetup.from_json(s.to_json()).as_json() == s.as_json()
