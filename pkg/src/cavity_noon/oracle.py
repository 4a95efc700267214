"""Exact reference dynamics in a truncated localized Fock basis.

Basis vectors are ``|n0, m0; n1, m1>`` in row-major order with the qubit
label ``m`` in {-1, +1} stored at index {0, 1}; ``sigma_z = diag(-1, 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .model import ModelParams
from .states import InitialNoonState

DEFAULT_DIMENSION_CAP = 65536
DENSE_LIMIT = 4096
LEAKAGE_THRESHOLD = 1e-8
DEFAULT_MARGIN = 10

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.diag([-1.0, 1.0])
_I2 = np.eye(2)


class OracleCapacityError(RuntimeError):
    pass


@dataclass(frozen=True)
class FockTruncation:
    n_max_local: int
    dimension_cap: int = DEFAULT_DIMENSION_CAP

    def __post_init__(self):
        if self.n_max_local < 0:
            raise ValueError("nMaxLocal must be non-negative")
        if self.dimension > self.dimension_cap:
            raise OracleCapacityError(
                f"dimension {self.dimension} exceeds cap {self.dimension_cap}")

    @property
    def dimension(self) -> int:
        return 4 * (self.n_max_local + 1) ** 2


def _kron(*ops):
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _ladder(trunc: FockTruncation):
    k = trunc.n_max_local + 1
    a = np.diag(np.sqrt(np.arange(1, k)), 1)
    return a, np.eye(k)


def build_hamiltonian(params: ModelParams, trunc: FockTruncation) -> np.ndarray:
    a, ik = _ladder(trunc)
    num = a.T @ a
    x = a + a.T
    H = np.zeros((trunc.dimension, trunc.dimension))
    # cavity 0 acts on factors (n0, m0), cavity 1 on (n1, m1)
    H += _kron(ik, -0.5 * params.delta * _SX, ik, _I2)
    H += _kron(ik, _I2, ik, -0.5 * params.delta * _SX)
    H += params.omega * (_kron(num, _I2, ik, _I2) + _kron(ik, _I2, num, _I2))
    H += params.lam * (_kron(x, _SZ, ik, _I2) + _kron(ik, _I2, x, _SZ))
    H += params.nu * (_kron(a.T, _I2, a, _I2) + _kron(a, _I2, a.T, _I2))
    return H


def parity_operator(trunc: FockTruncation) -> np.ndarray:
    """``exp(i pi (n0 + n1) + i pi/2 (sx0 + sx1))`` as a real matrix.

    ``exp(i pi/2 sx) = i sx`` on each qubit, so the operator equals
    ``-(-1)^(n0+n1) sx0 sx1``.
    """
    k = trunc.n_max_local + 1
    sign = np.diag((-1.0) ** np.arange(k))
    return -_kron(sign, _SX, sign, _SX)


def parity_commutator_norm(params: ModelParams, trunc: FockTruncation) -> float:
    H = build_hamiltonian(params, trunc)
    P = parity_operator(trunc)
    return float(np.max(np.abs(P @ H - H @ P)))


def initial_vector(state: InitialNoonState, trunc: FockTruncation) -> np.ndarray:
    if state.n > trunc.n_max_local:
        raise ValueError(f"n = {state.n} exceeds nMaxLocal = {trunc.n_max_local}")
    k = trunc.n_max_local + 1
    psi = np.zeros((k, 2, k, 2), dtype=complex)
    psi[state.n, 0, 0, 0] += 1.0
    psi[0, 0, state.n, 0] += state.c
    return psi.ravel() * state.norm_factor


@dataclass(frozen=True)
class ExactResult:
    omega_ts: np.ndarray
    rhos: np.ndarray  # (T, 4, 4)
    leakage: float  # largest population on the top Fock level of either cavity
    energy_drift: float
    norm_drift: float
    parity_drift: float

    @property
    def reliable(self) -> bool:
        return self.leakage <= LEAKAGE_THRESHOLD


class ExactEvolution:
    """Diagonalize once, then apply phases for any set of times."""

    def __init__(self, params: ModelParams, trunc: FockTruncation):
        if trunc.dimension > DENSE_LIMIT:
            raise OracleCapacityError(
                f"dense diagonalization refused above dimension {DENSE_LIMIT} "
                f"(got {trunc.dimension})")
        self.params = params
        self.trunc = trunc
        self.H = build_hamiltonian(params, trunc)
        self.P = parity_operator(trunc)
        self.energies, self.vectors = eigh(self.H)

    def states(self, psi0: np.ndarray, omega_ts) -> np.ndarray:
        ts = np.asarray(omega_ts, dtype=float) / self.params.omega
        coeff = self.vectors.T @ psi0
        phases = np.exp(-1j * np.outer(ts, self.energies))
        return (phases * coeff) @ self.vectors.T

    def reduced(self, psis: np.ndarray) -> np.ndarray:
        k = self.trunc.n_max_local + 1
        arr = psis.reshape(len(psis), k, 2, k, 2)
        # rho[(m0 m1), (m0' m1')] = sum_{n0 n1} psi psi*
        rho = np.einsum("tambn,tapbq->tmnpq", arr, arr.conj())
        return rho.reshape(len(psis), 4, 4)

    def run(self, state: InitialNoonState, omega_ts, margin: int = DEFAULT_MARGIN) -> ExactResult:
        if state.n > self.trunc.n_max_local - margin:
            raise ValueError(
                f"n = {state.n} too close to nMaxLocal = {self.trunc.n_max_local} "
                f"(margin {margin})")
        omega_ts = np.atleast_1d(np.asarray(omega_ts, dtype=float))
        psi0 = initial_vector(state, self.trunc)
        psis = self.states(psi0, omega_ts)
        k = self.trunc.n_max_local + 1
        pops = np.abs(psis.reshape(len(psis), k, 2, k, 2)) ** 2
        leakage = max(float(pops[:, -1].sum(axis=(1, 2, 3)).max()),
                      float(pops[:, :, :, -1].sum(axis=(1, 2, 3)).max()))
        energy = np.real(np.einsum("ti,ij,tj->t", psis.conj(), self.H, psis))
        norm = np.real(np.einsum("ti,ti->t", psis.conj(), psis))
        parity = np.real(np.einsum("ti,ij,tj->t", psis.conj(), self.P, psis))
        e0 = float(np.real(psi0.conj() @ self.H @ psi0))
        p0 = float(np.real(psi0.conj() @ self.P @ psi0))
        return ExactResult(
            omega_ts=omega_ts,
            rhos=self.reduced(psis),
            leakage=leakage,
            energy_drift=float(np.max(np.abs(energy - e0))),
            norm_drift=float(np.max(np.abs(norm - 1.0))),
            parity_drift=float(np.max(np.abs(parity - p0))),
        )


def exact_reduced_density(state: InitialNoonState, params: ModelParams, trunc: FockTruncation,
                          omega_t: float, margin: int = DEFAULT_MARGIN) -> np.ndarray:
    return ExactEvolution(params, trunc).run(state, [omega_t], margin).rhos[0]


def exact_ground_energy(params: ModelParams, trunc: FockTruncation) -> float:
    return float(ExactEvolution(params, trunc).energies[0])


def fock_dimension(n_max_local: int) -> int:
    return 4 * (n_max_local + 1) ** 2
