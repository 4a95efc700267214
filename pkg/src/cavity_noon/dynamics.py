"""Closed-form time evolution of N00N-type states and the two-qubit
reduced density matrix.

Two evaluation paths are provided. ``firstPrinciples`` rewrites the
evolved state in the displaced tensor basis and traces out both
oscillators with the displaced-overlap tables. ``paperFormulas`` evaluates
the element-by-element closed forms built on the kernel ``G`` and is kept
for auditing.

Public functions take the dimensionless time ``omega_t``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .entanglement import concurrence
from .model import BASIS_SHIFTS, BlockGrid, ModelParams
from .specfun import OverlapTable
from .states import (DEFAULT_EPSILON, ExpansionTable, InitialNoonState, build_expansion,
                     choose_truncation, projection)

#: tensor-basis index of each qubit configuration in the order
#: (-1,-1), (-1,1), (1,-1), (1,1)
QUBIT_TO_BASIS = (1, 3, 2, 0)
QUBIT_LABELS = ("-1,-1", "-1,1", "1,-1", "1,1")
#: the ten independent elements (i <= j)
UPPER_INDICES = tuple((i, j) for i in range(4) for j in range(i, 4))

METHODS = ("firstPrinciples", "paperFormulas")
_CHUNK = 64


@dataclass(frozen=True)
class QubitDensityMatrix:
    elements: np.ndarray
    omega_t: float

    def __array__(self, dtype=None, copy=None):
        return self.elements if dtype is None else self.elements.astype(dtype)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.elements)))

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))

    @property
    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.elements + self.elements.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.elements @ self.elements)))

    def element(self, row: str, col: str) -> complex:
        return complex(self.elements[QUBIT_LABELS.index(row), QUBIT_LABELS.index(col)])


@dataclass(frozen=True)
class EvolutionKernel:
    """``G(N; N') = d(N) d(N')*`` stored through its factor ``d``.

    ``d[N0, N1]`` is ``(-1)^N0 C0 (F0^(n,0) + c F0^(0,n)) / sqrt(1+|c|^2)``.
    """

    nmax: int
    factor: np.ndarray

    def __call__(self, block, block_p) -> complex:
        return complex(self.factor[tuple(block)] * np.conj(self.factor[tuple(block_p)]))

    @property
    def matrix(self) -> np.ndarray:
        """Full kernel, shape ``(K*K, K*K)`` over row-major flattened blocks."""
        d = self.factor.ravel()
        return np.outer(d, d.conj())

    @property
    def diagonal_sum(self) -> float:
        return float(np.sum(np.abs(self.factor) ** 2))


def build_kernel(state: InitialNoonState, table: ExpansionTable, params: ModelParams) -> EvolutionKernel:
    K = table.nmax + 1
    d = np.empty((K, K), dtype=complex)
    for N0 in range(K):
        for N1 in range(K):
            cf_a = projection(0, state.n, 0, (N0, N1), 1, params)
            cf_b = projection(0, 0, state.n, (N0, N1), 1, params) if state.n else 0.0
            d[N0, N1] = (-1) ** N0 * (cf_a + state.c * cf_b)
    return EvolutionKernel(table.nmax, d * state.norm_factor)


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CAVITY_NOON_THREADS", "1")))
    except ValueError:
        return 1


class Evolution:
    """Precomputed data for one ``(state, params, truncation)``.

    Construction picks ``nmax`` from ``epsilon`` unless given, builds the
    expansion, the block grid and the overlap tables once; every later time
    evaluation is pure array arithmetic.
    """

    def __init__(self, state: InitialNoonState, params: ModelParams,
                 epsilon: float = DEFAULT_EPSILON, nmax: int | None = None):
        self.state = state
        self.params = params
        self.epsilon = epsilon
        self.nmax = choose_truncation(state, params, epsilon) if nmax is None else int(nmax)
        self.grid = BlockGrid(params, self.nmax)
        self.table = build_expansion(state, params, self.nmax, self.grid)
        self.amplitudes = self.table.amplitudes
        self.overlaps = OverlapTable(params, self.nmax)
        self._kernel = None
        self._paper = None

    @property
    def captured_weight(self) -> float:
        return self.table.captured_weight

    @property
    def kernel(self) -> EvolutionKernel:
        if self._kernel is None:
            self._kernel = build_kernel(self.state, self.table, self.params)
        return self._kernel

    def _times(self, omega_ts) -> np.ndarray:
        return np.asarray(omega_ts, dtype=float) / self.params.omega

    def basis_amplitudes(self, omega_ts) -> np.ndarray:
        """``b[t, q, N0, N1]``: components of ``psi(t)`` on the displaced tensor basis."""
        ts = self._times(omega_ts)
        phases = np.exp(-1j * ts[:, None, None, None] * self.grid.energies[None])
        return np.einsum("tjab,jab,jqab->tqab", phases, self.amplitudes, self.grid.mixing,
                         optimize=True)

    def _rho_chunk(self, omega_ts) -> np.ndarray:
        b = self.basis_amplitudes(omega_ts)
        rho = np.empty((len(b), 4, 4), dtype=complex)
        for i, j in UPPER_INDICES:
            q, qp = QUBIT_TO_BASIS[i], QUBIT_TO_BASIS[j]
            # <phi_qp | phi_q> with bra shifts of qp, ket shifts of q
            o0 = self.overlaps.matrix(0, BASIS_SHIFTS[qp][0], BASIS_SHIFTS[q][0])
            o1 = self.overlaps.matrix(1, BASIS_SHIFTS[qp][1], BASIS_SHIFTS[q][1])
            if i == j:
                val = np.sum(np.abs(b[:, q]) ** 2, axis=(1, 2))
            else:
                moved = np.einsum("mn,tnk,lk->tml", o0, b[:, q], o1, optimize=True)
                val = np.sum(np.conj(b[:, qp]) * moved, axis=(1, 2))
            rho[:, i, j] = val
            if i != j:
                rho[:, j, i] = np.conj(val)
        return rho

    def rho_many(self, omega_ts) -> np.ndarray:
        """Reduced density matrices, shape ``(T, 4, 4)``."""
        omega_ts = np.atleast_1d(np.asarray(omega_ts, dtype=float))
        chunks = [omega_ts[k:k + _CHUNK] for k in range(0, len(omega_ts), _CHUNK)]
        if not chunks:
            return np.empty((0, 4, 4), dtype=complex)
        threads = _thread_count()
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(self._rho_chunk, chunks))
        else:
            parts = [self._rho_chunk(c) for c in chunks]
        return np.concatenate(parts)

    def density(self, omega_t: float) -> QubitDensityMatrix:
        return QubitDensityMatrix(self.rho_many([omega_t])[0], float(omega_t))

    def paper_density(self, omega_t: float) -> QubitDensityMatrix:
        if self._paper is None:
            self._paper = _PaperFormulas(self)
        return QubitDensityMatrix(self._paper.evaluate(float(omega_t) / self.params.omega),
                                  float(omega_t))


class _PaperFormulas:
    """Element formulas written as bilinear forms over the kernel.

    Each off-diagonal element is ``sum_{N,N'} G(N;N') O(N';N) f(N) g(N')``
    summed over the phase terms of its bracket, where ``O`` is the product
    of the two displaced overlaps (an identity factor where the formula
    shares a block index between ``N`` and ``N'``).
    """

    def __init__(self, evo: Evolution):
        grid, ov = evo.grid, evo.overlaps
        K = evo.nmax + 1
        eye = np.eye(K)
        G = evo.kernel.matrix
        self.G_diag = np.real(np.diag(G))

        def weighted(o0, o1):
            # W[N, N'] = G[N, N'] * o0[N0', N0] * o1[N1', N1]
            return G * np.kron(o0, o1).T

        self.W = {
            "mm_mp": weighted(ov.matrix(0, 0, -2), ov.matrix(1, -2, 0)),
            "mm_pm": weighted(ov.matrix(0, 0, -2), ov.matrix(1, 2, 0)),
            "mm_pp": weighted(ov.matrix(0, 2, -2), eye),
            "mp_pm": weighted(eye, ov.matrix(1, 2, -2)),
            "mp_pp": weighted(ov.matrix(0, 2, 0), ov.matrix(1, 0, -2)),
            "pm_pp": weighted(ov.matrix(0, 2, 0), ov.matrix(1, 0, 2)),
        }
        self.E0, self.E1, self.Ep, self.Em = (e.ravel() for e in grid.energies)
        # (chi -+ Gamma_-)/chi and Lambda/chi in terms of the mixing amplitudes,
        # finite at chi = 0
        self.u2 = grid.u.ravel() ** 2
        self.v2 = grid.v.ravel() ** 2
        sign = np.where(grid.lambda_N < 0, -1.0, 1.0)
        self.lchi = (0.5 * sign * grid.u * grid.v).ravel()
        self.gchi = 0.5 * (self.v2 - self.u2)
        N0 = np.repeat(np.arange(K), K)
        self.Omega0_N0 = evo.params.Omega0 * N0

    @staticmethod
    def _form(W, terms):
        return sum(f @ W @ g for f, g in terms)

    def evaluate(self, t: float) -> np.ndarray:
        ex = lambda e: np.exp(-1j * e * t)  # noqa: E731
        exc = lambda e: np.exp(1j * e * t)  # noqa: E731
        E0, Ep, Em = self.E0, self.Ep, self.Em
        u2, v2, lchi, gchi = self.u2, self.v2, self.lchi, self.gchi
        Gd = self.G_diag
        rho = np.zeros((4, 4), dtype=complex)

        cpm = np.cos((Ep - Em) * t)
        c0p = np.cos((E0 - Ep) * t)
        c0m = np.cos((E0 - Em) * t)
        common = gchi ** 2 + 4.0 * lchi ** 2 * cpm
        rest = u2 * c0p + v2 * c0m  # (2/chi)((chi-G)cos + (chi+G)cos) / 2
        rho[0, 0] = 3 / 8 + np.sum(Gd * (common + 2.0 * rest)) / 8
        rho[3, 3] = 3 / 8 + np.sum(Gd * (common - 2.0 * rest)) / 8
        rho[1, 1] = rho[2, 2] = 0.5 * np.sum(Gd * lchi ** 2 * (1.0 - cpm))

        # rows of the first two off-diagonal forms: Lambda'/chi' sits on N'
        bracket_a = [
            (u2 * ex(Ep), lchi * exc(Ep)),
            (-v2 * ex(Em), lchi * exc(Em)),
            (2.0 * ex(E0), lchi * exc(Ep)),
            (-2.0 * ex(E0), lchi * exc(Em)),
            (-u2 * ex(Ep), lchi * exc(Em)),
            (v2 * ex(Em), lchi * exc(Ep)),
        ]
        rho[0, 1] = self._form(self.W["mm_mp"], bracket_a) / 8
        rho[0, 2] = self._form(self.W["mm_pm"], bracket_a) / 8

        # N' = (N0', N1): primed factors evaluated on the flattened N' index
        bracket_b = [
            (ex(self.Omega0_N0), exc(self.Omega0_N0)),
            (0.5 * v2 * ex(Em), exc(E0)),
            (0.5 * u2 * ex(Ep), exc(E0)),
            (-ex(E0), 0.5 * v2 * exc(Em)),
            (-ex(E0), 0.5 * u2 * exc(Ep)),
            (-0.25 * v2 * ex(Em), v2 * exc(Em)),
            (-0.25 * v2 * ex(Em), u2 * exc(Ep)),
            (-0.25 * u2 * ex(Ep), v2 * exc(Em)),
            (-0.25 * u2 * ex(Ep), u2 * exc(Ep)),
        ]
        rho[0, 3] = -self._form(self.W["mm_pp"], bracket_b) / 4

        # transcribed as printed: the second and fourth terms coincide and cancel
        bracket_c = [
            (lchi * ex(Ep), lchi * exc(Ep)),
            (lchi * ex(Em), lchi * exc(Ep)),
            (-lchi * ex(Ep), lchi * exc(Em)),
            (-lchi * ex(Em), lchi * exc(Ep)),
        ]
        rho[1, 2] = self._form(self.W["mp_pm"], bracket_c) / 4

        bracket_d = [
            (lchi * ex(Ep), u2 * exc(Ep)),
            (-lchi * ex(Em), v2 * exc(Em)),
            (-2.0 * lchi * ex(Ep), exc(E0)),
            (2.0 * lchi * ex(Em), exc(E0)),
            (lchi * ex(Ep), v2 * exc(Em)),
            (-lchi * ex(Em), u2 * exc(Ep)),
        ]
        rho[1, 3] = self._form(self.W["mp_pp"], bracket_d) / 8
        rho[2, 3] = self._form(self.W["pm_pp"], bracket_d) / 8

        for i, j in UPPER_INDICES:
            if i != j:
                rho[j, i] = np.conj(rho[i, j])
        return rho


@lru_cache(maxsize=16)
def get_evolution(state: InitialNoonState, params: ModelParams,
                  epsilon: float = DEFAULT_EPSILON, nmax: int | None = None) -> Evolution:
    return Evolution(state, params, epsilon, nmax)


def reduced_density(state: InitialNoonState, params: ModelParams, omega_t: float,
                    method: str = "firstPrinciples", epsilon: float = DEFAULT_EPSILON,
                    nmax: int | None = None) -> QubitDensityMatrix:
    """Two-qubit reduced density matrix at time ``omega_t``."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    evo = get_evolution(state, params, epsilon, nmax)
    if method == "firstPrinciples":
        return evo.density(omega_t)
    return evo.paper_density(omega_t)


@dataclass(frozen=True)
class TraceRow:
    omega_t: float
    concurrence: float
    rho: np.ndarray


def concurrence_trace(state: InitialNoonState, params: ModelParams, omega_ts,
                      epsilon: float = DEFAULT_EPSILON, nmax: int | None = None) -> list[TraceRow]:
    omega_ts = np.asarray(omega_ts, dtype=float)
    if omega_ts.ndim != 1 or not np.all(np.isfinite(omega_ts)):
        raise ValueError("time grid must be a finite 1-d sequence")
    if np.any(np.diff(omega_ts) < 0):
        raise ValueError("time grid must be ascending")
    evo = get_evolution(state, params, epsilon, nmax)
    rhos = evo.rho_many(omega_ts)
    return [TraceRow(float(t), concurrence(r), r) for t, r in zip(omega_ts, rhos)]


@dataclass(frozen=True)
class CrosscheckReport:
    max_deviation: float
    diagonal_deviation: float
    element_deviation: np.ndarray  # (4, 4) max over samples
    samples: int

    def rows(self):
        """``(row, col, max deviation)`` for the ten independent elements."""
        return [(QUBIT_LABELS[i], QUBIT_LABELS[j], float(self.element_deviation[i, j]))
                for i, j in UPPER_INDICES]


def crosscheck_formulas(state: InitialNoonState, params: ModelParams, omega_ts,
                        epsilon: float = DEFAULT_EPSILON, nmax: int | None = None) -> CrosscheckReport:
    evo = get_evolution(state, params, epsilon, nmax)
    omega_ts = np.atleast_1d(np.asarray(omega_ts, dtype=float))
    fp = evo.rho_many(omega_ts)
    dev = np.zeros((4, 4))
    for t, rho in zip(omega_ts, fp):
        dev = np.maximum(dev, np.abs(rho - evo.paper_density(t).elements))
    return CrosscheckReport(
        max_deviation=float(dev.max()),
        diagonal_deviation=float(np.max(np.diag(dev))),
        element_deviation=dev,
        samples=len(omega_ts),
    )


def trace_columns() -> list[str]:
    cols = ["omega_t", "concurrence"]
    for i, j in UPPER_INDICES:
        tag = f"{i}{j}"
        cols += [f"rho_re_{tag}", f"rho_im_{tag}"]
    return cols


def trace_record(row: TraceRow) -> list[float]:
    rec = [row.omega_t, row.concurrence]
    for i, j in UPPER_INDICES:
        rec += [float(row.rho[i, j].real), float(row.rho[i, j].imag)]
    return rec


def hermitian_part_norm(rho) -> float:
    rho = np.asarray(rho)
    return float(math.sqrt(np.sum(np.abs(rho) ** 2)))
