import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavity_noon.model import BASIS_SHIFTS, BASIS_SPINS, BlockGrid, ModelParams
from cavity_noon.states import (InitialNoonState, TruncationError, build_expansion,
                                choose_truncation, coeff_C, expansion_array, expansion_coeffs,
                                hypergeometric_identity_check, projection, weight_F, weight_S)

from conftest import TABLE1, displacement_element


def localized_in_delocalized(n0, n1, K):
    """``|n0, n1>`` of the local modes in the delocalized number basis."""
    out = np.zeros((K, K))
    norm = math.sqrt(2 ** (n0 + n1) * math.factorial(n0) * math.factorial(n1))
    for p in range(n0 + 1):
        for q in range(n1 + 1):
            k0, k1 = p + q, n0 - p + n1 - q
            coef = math.comb(n0, p) * math.comb(n1, q) * (-1) ** (n1 - q)
            out[k0, k1] += coef * math.sqrt(math.factorial(k0) * math.factorial(k1)) / norm
    return out


def brute_force_coeffs(n0, m0, n1, m1, params, nmax, K=40):
    loc = localized_in_delocalized(n0, n1, K)
    a0 = math.sqrt(2) * params.lam / params.Omega0
    a1 = math.sqrt(2) * params.lam / params.Omega1
    grid = BlockGrid(params, nmax)
    amps = np.zeros((4, nmax + 1, nmax + 1))
    for b, (shifts, spins) in enumerate(zip(BASIS_SHIFTS, BASIS_SPINS)):
        if spins != (m0, m1):
            continue
        D0 = np.array([[displacement_element(shifts[0] / 2 * a0, i, j) for j in range(K)]
                       for i in range(nmax + 1)])
        D1 = np.array([[displacement_element(shifts[1] / 2 * a1, i, j) for j in range(K)]
                       for i in range(nmax + 1)])
        amps[b] = D0 @ loc @ D1.T
    return np.einsum("jbxy,bxy->jxy", grid.mixing, amps)


@pytest.mark.parametrize("config", [(1, -1, 0, -1), (0, -1, 3, -1), (2, 1, 1, 1),
                                    (2, 1, 0, -1), (1, -1, 2, 1), (0, -1, 0, -1)])
def test_expansion_matches_brute_force(config):
    params = ModelParams(1.0, 0.15, 0.25, 0.3)
    nmax = 6
    got = expansion_array(*config, params, nmax)
    want = brute_force_coeffs(*config, params, nmax)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_single_block_coeffs_agree_with_array():
    params = TABLE1
    arr = expansion_array(2, 1, 1, -1, params, 4)
    for block in [(0, 0), (2, 3), (4, 1)]:
        np.testing.assert_allclose(expansion_coeffs(2, 1, 1, -1, block, params), arr[:, block[0], block[1]],
                                   atol=1e-15)


def test_projection_equals_C_times_F():
    params = TABLE1
    for mode in (0, 1):
        for block in [(0, 0), (2, 1), (3, 4)]:
            for sign in (1, -1):
                cf = coeff_C(mode, 2, 1, block, sign, params) * weight_F(mode, 2, 1, block, params)
                assert projection(mode, 2, 1, block, sign, params) == pytest.approx(cf, rel=1e-10, abs=1e-15)


def test_projection_lambda_zero_is_beam_splitter():
    p0 = ModelParams(1.0, 0.15, 0.0, 0.5)
    loc = localized_in_delocalized(2, 1, 6)
    for N0 in range(4):
        for N1 in range(4):
            sign = (-1) ** N0
            # the (-1,-1) component reduces to (-1)^N0 <N0, N1 | 2, 1>
            assert sign * projection(0, 2, 1, (N0, N1), 1, p0) == pytest.approx(loc[N0, N1], abs=1e-15)
    with pytest.raises(ValueError):
        weight_F(0, 1, 0, (1, 0), p0)


def test_selector_structure_c1_vanishes():
    arr = expansion_array(3, -1, 2, -1, TABLE1, 5)
    assert np.all(arr[1] == 0.0)
    arr = expansion_array(3, 1, 2, -1, TABLE1, 5)
    assert np.all(arr[0] == 0.0)


def test_state_validation():
    s = InitialNoonState(3, 1j)
    assert s.norm_factor == pytest.approx(1 / math.sqrt(2))
    assert s.qubit_config == (-1, -1)
    with pytest.raises(ValueError):
        InitialNoonState(-1)
    with pytest.raises(ValueError):
        InitialNoonState(0, 0.5)
    with pytest.raises(ValueError):
        InitialNoonState(2, complex("nan"))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(0, 6), cr=st.floats(-2, 2), ci=st.floats(-2, 2),
       lam=st.floats(0.0, 0.2), nu=st.floats(0.0, 0.7))
def test_norm_convergence_from_below(n, cr, ci, lam, nu):
    c = 0j if n == 0 else complex(cr, ci)
    state = InitialNoonState(n, c)
    params = ModelParams(1.0, 0.15, lam, nu)
    nmax = choose_truncation(state, params, 1e-10)
    table = build_expansion(state, params, nmax + 3)
    weights = [table.weight_within(k) for k in range(nmax + 4)]
    assert np.all(np.diff(weights) >= -1e-14)
    assert weights[nmax] >= 1 - 1e-10
    assert weights[-1] <= 1 + 1e-10
    if nmax > 0:
        assert weights[nmax - 1] < 1 - 1e-10


def test_truncation_cap():
    with pytest.raises(TruncationError):
        choose_truncation(InitialNoonState(6), TABLE1, 1e-12, cap=3)
    with pytest.raises(ValueError):
        choose_truncation(InitialNoonState(1), TABLE1, 0.0)


def test_weight_S_relation():
    # S_{n0,n1} coincides with F_1 at tau = -1/x
    params = TABLE1
    x = params.lam ** 2 / params.Omega1 ** 2
    for block in [(1, 0), (2, 2), (3, 1)]:
        assert weight_S(2, 1, *block, x) == pytest.approx(weight_F(1, 2, 1, block, params), rel=1e-12)


@pytest.mark.parametrize("args,rel", [((0, 0, 0, 0, 0.02, 40), None), ((1, 0, 0, 1, 0.02, 40), None),
                                      ((2, 1, 2, 1, 0.02, 60), 1e-8)])
def test_identity_examples(args, rel):
    lhs, rhs = hypergeometric_identity_check(*args)
    if rhs == 0:
        assert abs(lhs) < 1e-10
    else:
        assert lhs / rhs == pytest.approx(1.0, abs=rel or 1e-12)
    if args[:4] == (0, 0, 0, 0):
        assert rhs == pytest.approx(math.exp(0.04))


def test_identity_rejects_nonpositive_x():
    with pytest.raises(ValueError):
        hypergeometric_identity_check(0, 0, 0, 0, 0.0, 5)


@pytest.mark.parametrize("n,c,params", [
    (1, 0, TABLE1),
    (4, 1j, ModelParams(1.0, 0.2, 0.3, 0.2)),
    (3, 0.5 - 1j, ModelParams(1.0, 0.15, 0.15, 0.7)),
])
def test_initial_state_has_zero_mean_parity(n, c, params):
    # P flips both qubits, so the state is not a parity eigenstate; its two
    # parity sectors carry equal weight
    state = InitialNoonState(n, c)
    nmax = choose_truncation(state, params)
    grid = BlockGrid(params, nmax)
    weights = np.abs(build_expansion(state, params, nmax, grid).amplitudes) ** 2
    assert np.sum(grid.parities * weights) == pytest.approx(0.0, abs=1e-12)
