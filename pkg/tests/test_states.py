import math

import numpy as np
import pytest

from dnls_nflab.states import (
    FourierState,
    eval_physical,
    hamiltonian_coefficients,
    hamiltonian_physical,
    lambda_energy,
    mode_range,
    sobolev_norm,
    state_from_json,
    state_to_json,
)

TWO_PI = 2 * math.pi


def test_mode_zero_rejected():
    with pytest.raises(ValueError):
        FourierState({0: 1.0}, 4)


def test_truncation_enforced():
    with pytest.raises(ValueError):
        FourierState({5: 1.0}, 4)


def test_zero_amplitudes_dropped():
    st = FourierState({1: 0.0, 2: 1.0}, 4)
    assert st.support() == (2,)


def test_sobolev_examples():
    assert sobolev_norm(FourierState.zero(4), 2.0) == 0.0
    assert sobolev_norm(FourierState({1: 1.0}, 4), 7.3) == pytest.approx(1.0)
    st = FourierState({1: 1.0, -2: 2j}, 4)
    assert sobolev_norm(st, 1.0) == pytest.approx(math.sqrt(17))


def test_sobolev_monotone_in_s():
    st = FourierState({1: 0.3, -2: 0.1j, 3: 0.05}, 4)
    values = [sobolev_norm(st, s) for s in (0.0, 0.5, 1.0, 2.0, 3.5)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_sobolev_rejects_negative_s():
    with pytest.raises(ValueError):
        sobolev_norm(FourierState.zero(2), -1.0)


def test_eval_physical_examples():
    st = FourierState({1: math.sqrt(TWO_PI)}, 2)
    assert eval_physical(st, 0.0) == pytest.approx(1.0)
    assert eval_physical(FourierState.zero(2), 1.234) == 0
    st2 = FourierState({1: 1.0, -1: 1.0}, 2)
    assert abs(eval_physical(st2, math.pi / 2)) == pytest.approx(0.0, abs=1e-15)


def test_eval_physical_periodic():
    st = FourierState({1: 0.5, -2: 0.25j, 3: 0.125}, 4)
    xs = np.linspace(0, 1, 7)
    np.testing.assert_allclose(
        eval_physical(st, xs), eval_physical(st, xs + TWO_PI), rtol=0, atol=1e-12
    )


def test_lambda_examples():
    assert lambda_energy(FourierState({1: 1.0, -2: 2j}, 4)) == pytest.approx(-7.0)
    assert lambda_energy(FourierState.zero(4)) == 0.0
    assert lambda_energy(FourierState({3: 0.5j}, 4)) == pytest.approx(3 * 0.25)


def test_hamiltonian_single_mode():
    st = FourierState({1: 1.0}, 1)
    assert hamiltonian_physical(st, 5) == pytest.approx(1 + 1 / (4 * math.pi), rel=1e-12)


def test_hamiltonian_quadratic_dominance():
    eps = 1e-4
    st = FourierState({1: eps}, 1)
    h = hamiltonian_physical(st, 5)
    assert h == pytest.approx(eps**2, rel=1e-7)


def test_hamiltonian_matches_coefficient_space():
    rng = np.random.default_rng(0)
    for M in (4, 8, 16):
        amp = {
            j: complex(rng.normal(), rng.normal()) * 0.4 for j in mode_range(M)
        }
        st = FourierState(amp, M)
        h_phys = hamiltonian_physical(st, 4 * M + 1)
        h_coef = hamiltonian_coefficients(st)
        assert h_phys == pytest.approx(h_coef, rel=1e-10, abs=1e-12)


def test_hamiltonian_quadrature_precondition():
    st = FourierState({1: 1.0}, 4)
    with pytest.raises(ValueError):
        hamiltonian_physical(st, 4 * 4)


def test_grid_roundtrip_exact():
    # samples on 4M+1 points determine the coefficients exactly
    rng = np.random.default_rng(1)
    M = 6
    amp = {j: complex(rng.normal(), rng.normal()) for j in mode_range(M)}
    st = FourierState(amp, M)
    N = 4 * M + 1
    x = np.arange(N) * TWO_PI / N
    u = eval_physical(st, x)
    for j in mode_range(M):
        coeff = np.sum(u * np.exp(-1j * j * x)) * (TWO_PI / N) / math.sqrt(TWO_PI)
        assert abs(coeff - amp[j]) < 1e-12


def test_json_roundtrip():
    st = FourierState({1: 1 + 2j, -3: 0.5j}, 4)
    text = state_to_json(st)
    back = state_from_json(text, 4)
    assert back == st


def test_json_rejects_mode_zero_and_duplicates():
    with pytest.raises(ValueError):
        state_from_json('[{"j": 0, "re": 1, "im": 0}]', 4)
    with pytest.raises(ValueError):
        state_from_json(
            '[{"j": 1, "re": 1, "im": 0}, {"j": 1, "re": 2, "im": 0}]', 4
        )


def test_vector_roundtrip():
    st = FourierState({2: 1j, -1: 0.25}, 3)
    assert FourierState.from_vector(st.to_vector(), 3) == st
