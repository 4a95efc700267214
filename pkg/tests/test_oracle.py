import numpy as np
import pytest

from cavity_noon.dynamics import Evolution
from cavity_noon.model import BlockGrid, ModelParams
from cavity_noon.oracle import (DENSE_LIMIT, ExactEvolution, FockTruncation, OracleCapacityError,
                                build_hamiltonian, exact_reduced_density, initial_vector,
                                parity_commutator_norm, parity_operator)
from cavity_noon.states import InitialNoonState

from conftest import TABLE1


@pytest.fixture(scope="module")
def table1_oracle():
    return ExactEvolution(TABLE1, FockTruncation(14))


def test_truncation_dimension_and_caps():
    assert FockTruncation(20).dimension == 1764
    with pytest.raises(OracleCapacityError):
        FockTruncation(200)
    with pytest.raises(ValueError):
        FockTruncation(-1)
    big = FockTruncation(40)
    assert big.dimension > DENSE_LIMIT
    with pytest.raises(OracleCapacityError):
        ExactEvolution(TABLE1, big)


def test_hamiltonian_hermitian_exactly():
    H = build_hamiltonian(TABLE1, FockTruncation(6))
    assert np.max(np.abs(H - H.conj().T)) == 0.0


def test_decoupled_spectrum():
    p = ModelParams(1.0, 0.15, 0.0, 0.0)
    ev = np.linalg.eigvalsh(build_hamiltonian(p, FockTruncation(3)))
    want = sorted(n0 + n1 + s0 * 0.075 + s1 * 0.075
                  for n0 in range(4) for n1 in range(4) for s0 in (-1, 1) for s1 in (-1, 1))
    np.testing.assert_allclose(ev, want, atol=1e-12)


def test_lambda_zero_matches_block_energies():
    p = ModelParams(1.0, 0.15, 0.0, 0.4)
    ev = np.linalg.eigvalsh(build_hamiltonian(p, FockTruncation(12)))
    grid = BlockGrid(p, 2)
    low = np.sort(grid.energies.ravel())
    low = low[low < 1.0]
    np.testing.assert_allclose(ev[:len(low)], low, atol=1e-12)


def test_parity_commutator():
    assert parity_commutator_norm(TABLE1, FockTruncation(10)) < 1e-12
    assert parity_commutator_norm(TABLE1, FockTruncation(20)) < 1e-12
    assert parity_commutator_norm(ModelParams(1.0, 0.15, 0.0, 0.5), FockTruncation(10)) < 1e-14
    P = parity_operator(FockTruncation(5))
    np.testing.assert_array_equal(P @ P, np.eye(P.shape[0]))


def test_ground_energy_close_to_adiabatic(table1_oracle):
    exact = table1_oracle.energies[0]
    adiabatic = BlockGrid(TABLE1, 4).energies.min()
    assert abs(exact - adiabatic) <= 0.02 * abs(adiabatic)


def test_exact_evolution_invariants(table1_oracle):
    res = table1_oracle.run(InitialNoonState(2, 1j), np.linspace(0, 50, 11), margin=4)
    assert res.energy_drift < 1e-10
    assert res.norm_drift < 1e-12
    assert res.parity_drift < 1e-10
    want = np.zeros((4, 4))
    want[0, 0] = 1
    np.testing.assert_allclose(res.rhos[0], want, atol=1e-12)
    for rho in res.rhos:
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert res.reliable


def test_leakage_flag_and_margin():
    ex = ExactEvolution(ModelParams(1.0, 0.15, 0.6, 0.5), FockTruncation(6))
    res = ex.run(InitialNoonState(2), [0.0, 5.0], margin=2)
    assert not res.reliable
    with pytest.raises(ValueError):
        ex.run(InitialNoonState(5), [0.0])
    with pytest.raises(ValueError):
        initial_vector(InitialNoonState(8), FockTruncation(6))


def test_exact_matches_adiabatic_at_small_delta():
    p = ModelParams(1.0, 0.02, 0.1, 0.5)
    rho_ex = exact_reduced_density(InitialNoonState(1), p, FockTruncation(14), 30.0, margin=4)
    rho_ad = Evolution(InitialNoonState(1), p).density(30.0).elements
    assert np.max(np.abs(rho_ex - rho_ad)) < 5e-3
