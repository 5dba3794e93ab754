import itertools
from fractions import Fraction

import pytest

from dnls_nflab.coeffs import ExactCoeff
from dnls_nflab.order4 import compute_R6
from dnls_nflab.order6 import (
    build_F6,
    build_K,
    build_Qtilde0,
    coefficient_growth_audit_f6,
    enumerate_resonant,
    exhaustive_sextuple_audit,
    iter_resonant_monomials,
    qtilde0_crosscheck,
    random_sextuple_audit,
    sextuple_bound_check,
    sextuple_divisor,
    split_r6,
    tau,
    tau_bound_check,
    verify_Ktilde_zero,
)
from dnls_nflab.poly import Monomial, PolyHamiltonian, bracket, build_lambda


# -- tau -------------------------------------------------------------------------


def test_tau_examples():
    assert tau(2, 1, 3) == 2
    assert tau(2, 1, 3) + tau(1, 3, 2) + tau(3, 2, 1) == 0


def test_tau_pole_guard():
    with pytest.raises(ZeroDivisionError):
        tau(1, 1, 3)
    with pytest.raises(ZeroDivisionError):
        tau(2, 3, 3)


def test_tau_two_forms_agree():
    for j, k, l in itertools.product(range(-6, 7), repeat=3):
        if 0 in (j, k) or j == k or l == k:
            continue
        m = j - k + l
        denom = j * j - k * k + l * l - m * m
        assert denom != 0
        assert tau(j, k, l) == Fraction(-2 * (j - k + l), denom)


def test_tau_kernel_form():
    # middle-slot repetition gives the closed sextic kernel
    for j, k in itertools.product(range(-5, 6), repeat=2):
        if 0 in (j, k) or j == k:
            continue
        assert tau(j, k, j) == Fraction(2 * j - k, (j - k) ** 2)


def test_tau_cyclic_identity_exhaustive():
    for j, k, l in itertools.product(range(-8, 9), repeat=3):
        if len({j, k, l}) < 3:
            continue
        assert tau(j, k, l) + tau(k, l, j) + tau(l, j, k) == 0


# -- K ----------------------------------------------------------------------------


def test_K_kernel_values():
    K = build_K(4)
    assert K.coefficient(Monomial.of((2, 2, 1), (2, 2, 1))) == ExactCoeff.real(
        Fraction(-3, 8), pi_power=2
    )
    # 2j - k = 0 kills the coefficient
    assert K.coefficient(Monomial.of((1, 1, 2), (1, 1, 2))).is_zero


def test_K_is_action_only():
    for mono, _ in build_K(5).terms():
        assert mono.is_normal()


def test_K_matches_r6_action_part():
    for M in (4, 6):
        r6 = compute_R6(M)
        normal, _ = split_r6(r6)
        assert normal == build_K(M)


# -- resonant set ------------------------------------------------------------------


def test_resonant_smallest_members():
    from dnls_nflab.identities import TriplePair, pair_matches

    assert enumerate_resonant(1) == []
    # sign-mixed members exist from max index 2 on
    two = enumerate_resonant(2)
    assert any(
        pair_matches(TriplePair.of(t[0::2], t[1::2]), (1, 1, -2), (-1, -1, 2))
        for t in two
    )
    # the smallest all-positive member needs repeats and max index 5
    five = enumerate_resonant(5)
    assert any(
        pair_matches(TriplePair.of(t[0::2], t[1::2]), (1, 4, 4), (2, 2, 5))
        for t in five
    )
    for t in five:
        assert sextuple_divisor(t) == 0
        with pytest.raises(ValueError):
            sextuple_bound_check(t)  # resonants are outside the bound's domain


def test_resonant_contains_known_member_at_seven():
    from dnls_nflab.identities import TriplePair, pair_matches

    assert any(
        pair_matches(TriplePair.of(t[0::2], t[1::2]), (1, 5, 6), (2, 3, 7))
        for t in enumerate_resonant(7)
    )


def test_resonant_monomials_disjoint_slots():
    for mono in iter_resonant_monomials(6):
        assert not set(mono.plus) & set(mono.minus)
        assert mono.momentum() == 0
        assert mono.square_divisor() == 0


def test_ktilde_zero_small(r6_at_8):
    rep = verify_Ktilde_zero(8, r6_at_8)
    assert rep.passed
    assert rep.checked > 50


def test_ktilde_example_monomial(r6_at_8):
    mono = Monomial.of((1, 5, 6), (2, 3, 7))
    assert r6_at_8.coefficient(mono).is_zero


# -- generator --------------------------------------------------------------------


def test_f6_solves_homological_equation(r6_at_8):
    F6 = build_F6(8, r6_at_8)
    _, qtilde = split_r6(r6_at_8)
    residual = bracket(build_lambda(8), F6) + qtilde
    assert residual.is_zero
    assert F6.is_real_valued()


def test_f6_supported_off_resonance(r6_at_8):
    F6 = build_F6(8, r6_at_8)
    for mono, _ in F6.terms():
        assert mono.square_divisor() != 0
        assert not mono.is_normal()


def test_split_r6_refuses_resonant_survivor():
    bad = PolyHamiltonian.from_terms(
        8,
        [
            (Monomial.of((1, 5, 6), (2, 3, 7)), ExactCoeff.real(1, pi_power=2)),
        ],
    )
    with pytest.raises(ArithmeticError):
        split_r6(bad)


def test_f6_growth_audit_regression(r6_at_8):
    # empirical minimal constant for the steep-head coefficient shape at M=8,
    # frozen as a regression baseline (the bound only claims existence)
    rep = coefficient_growth_audit_f6(build_F6(8, r6_at_8))
    assert rep.constant_raw == pytest.approx(0.06478175736883228, rel=1e-9)


# -- sextuple bound ----------------------------------------------------------------


def test_sextuple_bound_example():
    rep = sextuple_bound_check((5, 4, 2, 3, 1, 1))
    assert rep.divisor == 4
    assert not rep.excluded
    assert rep.holds
    # bound value: 125 / (100 * (4*3*2*1*1)^2) vs divisor 4
    assert 100 * 4 * (4 * 3 * 2 * 1 * 1) ** 2 >= 125


def test_sextuple_excluded_case():
    n = 10**6
    rep = sextuple_bound_check((n, n, 1, 2, 3, 2))
    assert rep.excluded
    assert rep.holds is None


def test_sextuple_rejects_resonant():
    with pytest.raises(ValueError):
        sextuple_bound_check((1, 2, 4, 2, 4, 5))


def test_exhaustive_sextuple_bound_small():
    rep = exhaustive_sextuple_audit(6)
    assert rep["violations"] == []
    assert rep["excluded"] == 0


def test_random_sextuple_bound():
    rep = random_sextuple_audit(2000, 500, seed=3)
    assert rep["violations"] == []


# -- reducible closed form ------------------------------------------------------------


def test_qtilde0_crosscheck_exact(r6_at_8):
    rep = qtilde0_crosscheck(8, 8, r6_at_8)
    assert rep.passed
    assert rep.n_compared > 100
    assert rep.regime_satisfied is False  # desk scale cannot reach the regime


def test_qtilde0_crosscheck_negative_mode(r6_at_8):
    rep = qtilde0_crosscheck(8, -8, r6_at_8)
    assert rep.passed


def test_qtilde0_symmetric_window_tuple():
    # window quadruples with a repeated unbarred mode engage the degenerate
    # multiplicity weights; agreement must still be exact
    M, n = 6, 6
    r6 = compute_R6(M)
    rep = qtilde0_crosscheck(M, n, r6)
    assert rep.passed
    q0 = build_Qtilde0(M, n)
    sym = [
        mono
        for mono, _ in q0.terms()
        if len(set(mono.plus)) < 3 or len(set(mono.minus)) < 3
    ]
    assert sym, "symmetric window tuples must occur in the comparison"


def test_tau_bound_examples():
    assert tau_bound_check(3, 1, 2, 4, 10**4)
    assert tau_bound_check(3, 1, 2, 4, 10**6)
    assert tau_bound_check(3, 1, 2, 4, -(10**4))
    with pytest.raises(ValueError):
        tau_bound_check(3, 1, 2, 4, 100)  # regime violated


def test_tau_bound_values_small():
    n = 10**4
    for a, b in ((3, 1), (3, 2), (1, 4)):
        assert abs(tau(a, n, b)) < Fraction(2, n)
