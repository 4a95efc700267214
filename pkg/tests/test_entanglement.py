import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavity_noon.entanglement import (BELL_BASIS, BELL_LABELS, MalformedDensityMatrix, bell_fit,
                                      bell_state, concurrence, detect_sudden_death,
                                      hilbert_schmidt_distance, spin_flip)

from conftest import random_density, random_unitary2

SY = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SY, SY)


def test_spin_flip_matches_pauli_form():
    rng = np.random.default_rng(1)
    for _ in range(10):
        rho = random_density(rng)
        np.testing.assert_allclose(spin_flip(rho), YY @ rho.conj() @ YY, atol=1e-15)


def test_concurrence_reference_states():
    for k in range(4):
        phi = BELL_BASIS[k]
        assert concurrence(np.outer(phi, phi.conj())) == pytest.approx(1.0, abs=1e-12)
    prod = np.zeros((4, 4))
    prod[0, 0] = 1
    assert concurrence(prod) == 0.0
    assert concurrence(np.eye(4) / 4) == 0.0
    rng = np.random.default_rng(3)
    diag = np.diag(rng.dirichlet(np.ones(4)))
    assert concurrence(diag) == 0.0


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.9, 1.0])
def test_werner_state(p):
    phi = BELL_BASIS[2]
    rho = p * np.outer(phi, phi.conj()) + (1 - p) * np.eye(4) / 4
    assert concurrence(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-12)


def test_local_unitary_invariance():
    rng = np.random.default_rng(7)
    for _ in range(50):
        rho = random_density(rng, rank=int(rng.integers(1, 5)))
        U = np.kron(random_unitary2(rng), random_unitary2(rng))
        assert abs(concurrence(rho) - concurrence(U @ rho @ U.conj().T)) < 1e-9


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), rank=st.integers(1, 4))
def test_concurrence_bounds(seed, rank):
    rho = random_density(np.random.default_rng(seed), rank)
    assert 0.0 <= concurrence(rho) <= 1.0 + 1e-12


def test_concurrence_rejects_bad_input():
    with pytest.raises(ValueError):
        concurrence(np.eye(3))
    bad = np.diag([1.0, -1.0, 0.5, 0.5])
    bad[0, 3] = 2.0
    bad[3, 0] = 2.0
    with pytest.raises(MalformedDensityMatrix):
        concurrence(bad)


def test_sudden_death_detection():
    ts = np.arange(10.0)
    dead = detect_sudden_death(list(zip(ts, np.zeros(10))))
    assert dead.intervals == ((0.0, 9.0),)
    assert dead.longest_duration == 9.0
    cs = [0.5, 0.0, 0.0, 0.4, 0.0, 0.0, 0.0, 0.0, 0.3, 1e-7]
    rep = detect_sudden_death(list(zip(ts, cs)))
    assert rep.intervals == ((4.0, 7.0),)
    assert detect_sudden_death([]).intervals == ()
    with pytest.raises(ValueError):
        detect_sudden_death([(1.0, 0.0), (0.0, 0.0)])


def test_sudden_death_refinement():
    # concurrence zero on [2.5, 6.25]
    fn = lambda t: 0.0 if 2.5 <= t <= 6.25 else 1.0  # noqa: E731
    ts = np.arange(10.0)
    rep = detect_sudden_death([(t, fn(t)) for t in ts], refine=fn)
    (start, end), = rep.intervals
    assert start == pytest.approx(2.5, abs=1e-9)
    assert end == pytest.approx(6.25, abs=1e-9)


def test_bell_fit_pure_bell_state():
    coeffs = np.array([0.0, 1.0, 0.0, 0.0])
    phi = bell_state(coeffs) * np.exp(0.7j)
    fit = bell_fit(np.outer(phi, phi.conj()))
    assert fit.dominant_label == "phi-"
    np.testing.assert_allclose(fit.coefficients, coeffs, atol=1e-12)
    assert fit.distance == pytest.approx(0.0, abs=1e-7)
    fit = bell_fit(np.outer(BELL_BASIS[0], BELL_BASIS[0].conj()))
    assert fit.dominant_label == "phi+"
    assert fit.coefficients[0] == pytest.approx(1.0)


def test_bell_fit_maximally_mixed():
    fit = bell_fit(np.eye(4) / 4)
    assert fit.distance == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
    assert fit.degenerate


def test_bell_basis_orthonormal():
    np.testing.assert_allclose(BELL_BASIS @ BELL_BASIS.conj().T, np.eye(4), atol=1e-15)
    assert BELL_LABELS == ("phi+", "phi-", "psi+", "psi-")


def test_bell_fit_closed_form_and_sampler():
    rng = np.random.default_rng(11)
    for _ in range(20):
        rho = random_density(rng)
        fit = bell_fit(rho)
        lam_max = np.linalg.eigvalsh(rho)[-1]
        closed = math.sqrt(np.trace(rho @ rho).real + 1 - 2 * lam_max)
        assert abs(fit.distance - closed) < 1e-10
        assert hilbert_schmidt_distance(rho, bell_state(fit.coefficients)) == pytest.approx(fit.distance, abs=1e-7)
        samples = rng.normal(size=(200, 4)) + 1j * rng.normal(size=(200, 4))
        samples /= np.linalg.norm(samples, axis=1, keepdims=True)
        best = min(hilbert_schmidt_distance(rho, bell_state(s)) for s in samples)
        assert fit.distance <= best + 1e-12
        k = int(np.argmax(np.abs(fit.coefficients)))
        assert fit.coefficients[k].imag == pytest.approx(0.0, abs=1e-15)
        assert fit.coefficients[k].real > 0
