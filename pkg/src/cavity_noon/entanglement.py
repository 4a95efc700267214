"""Two-qubit entanglement: Wootters concurrence, sudden-death intervals
and the nearest pure state in the generalized Bell basis.

Density matrices are 4x4 over the ordered basis
``|-1,-1>, |-1,+1>, |+1,-1>, |+1,+1>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# (sigma_y x sigma_y)[a, 3 - a] = _FLIP_SIGN[a]; the operator is antidiagonal
_FLIP_SIGN = np.array([-1.0, 1.0, 1.0, -1.0])
_FLIP_INDEX = np.array([3, 2, 1, 0])

_H = 1.0 / math.sqrt(2.0)
#: rows: phi+, phi-, psi+, psi- with phi+- = (|1,1> +- i|-1,-1>)/sqrt2,
#: psi+- = (|1,-1> +- i|-1,1>)/sqrt2
BELL_BASIS = np.array([
    [1j * _H, 0, 0, _H],
    [-1j * _H, 0, 0, _H],
    [0, 1j * _H, _H, 0],
    [0, -1j * _H, _H, 0],
])
BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


class MalformedDensityMatrix(ValueError):
    pass


def _as_matrix(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit matrix, got shape {rho.shape}")
    return rho


def spin_flip(rho) -> np.ndarray:
    """``(sy x sy) rho* (sy x sy)`` as a fixed index permutation with signs."""
    rho = _as_matrix(rho)
    signs = np.outer(_FLIP_SIGN, _FLIP_SIGN)
    return signs * np.conj(rho[np.ix_(_FLIP_INDEX, _FLIP_INDEX)])


def concurrence(rho, tol: float = 1e-8) -> float:
    """Wootters concurrence ``max(0, s1 - s2 - s3 - s4)``.

    ``s_i`` are square roots of the eigenvalues of ``rho @ spin_flip(rho)``
    in descending order. With ``rho = A A^H`` they equal the singular values
    of ``A^T (sy x sy) A``, which avoids taking square roots of eigenvalues
    that are zero up to rounding (rank-deficient states).
    """
    rho = _as_matrix(rho)
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise MalformedDensityMatrix("input is not Hermitian")
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w[0] < -tol * max(1.0, w[-1]):
        raise MalformedDensityMatrix(f"negative eigenvalue {w[0]:.3g}; input is not a valid state")
    A = v * np.sqrt(np.clip(w, 0.0, None))
    flip = _FLIP_SIGN[:, None] * np.eye(4)[_FLIP_INDEX]
    roots = np.linalg.svd(A.T @ flip @ A, compute_uv=False)
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))


@dataclass(frozen=True)
class SuddenDeathReport:
    intervals: tuple  # ((t_start, t_end), ...)
    longest_duration: float


def detect_sudden_death(trace: Sequence[tuple[float, float]], zero_tol: float = 1e-6,
                        min_samples: int = 3,
                        refine: Callable[[float], float] | None = None,
                        refine_steps: int = 40) -> SuddenDeathReport:
    """Maximal runs of samples with concurrence ``<= zero_tol``.

    Runs shorter than ``min_samples`` are dropped. With a ``refine``
    callback (time -> concurrence) each interior endpoint is bisected
    against its neighbouring nonzero sample.
    """
    ts = np.array([row[0] for row in trace], dtype=float)
    cs = np.array([row[1] for row in trace], dtype=float)
    if ts.size and np.any(np.diff(ts) < 0):
        raise ValueError("trace must be ascending in time")
    dead = cs <= zero_tol
    intervals = []
    i = 0
    while i < len(ts):
        if not dead[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(ts) and dead[j + 1]:
            j += 1
        if j - i + 1 >= min_samples:
            start, end = ts[i], ts[j]
            if refine is not None:
                if i > 0:
                    start = _bisect_edge(refine, ts[i - 1], ts[i], zero_tol, refine_steps)
                if j + 1 < len(ts):
                    end = _bisect_edge(refine, ts[j + 1], ts[j], zero_tol, refine_steps)
            intervals.append((float(start), float(end)))
        i = j + 1
    longest = max((b - a for a, b in intervals), default=0.0)
    return SuddenDeathReport(tuple(intervals), float(longest))


def _bisect_edge(fn, alive, dead, zero_tol, steps):
    for _ in range(steps):
        mid = 0.5 * (alive + dead)
        if fn(mid) <= zero_tol:
            dead = mid
        else:
            alive = mid
    return dead


@dataclass(frozen=True)
class BellFit:
    coefficients: np.ndarray  # (alpha, beta, gamma, delta) over phi+, phi-, psi+, psi-
    distance: float
    dominant_label: str
    top_eigenvalue: float
    degenerate: bool

    @property
    def dominant_magnitude(self) -> float:
        return float(np.max(np.abs(self.coefficients)))


def bell_fit(rho, gap_tol: float = 1e-10) -> BellFit:
    """Pure state in the generalized Bell basis closest to ``rho`` in Hilbert-Schmidt distance.

    ``d^2 = Tr rho^2 + 1 - 2 <Phi|rho|Phi>`` is minimized by the eigenvector
    of the largest eigenvalue. Its global phase is fixed so that the
    largest coefficient is real and positive.
    """
    rho = _as_matrix(rho)
    herm = 0.5 * (rho + rho.conj().T)
    evals, evecs = np.linalg.eigh(herm)
    top = evecs[:, -1]
    coeffs = BELL_BASIS.conj() @ top
    k = int(np.argmax(np.abs(coeffs)))
    coeffs = coeffs * np.exp(-1j * np.angle(coeffs[k]))
    purity = float(np.real(np.trace(herm @ herm)))
    d2 = purity + 1.0 - 2.0 * float(evals[-1])
    return BellFit(
        coefficients=coeffs,
        distance=math.sqrt(max(d2, 0.0)),
        dominant_label=BELL_LABELS[k],
        top_eigenvalue=float(evals[-1]),
        degenerate=bool(evals[-1] - evals[-2] < gap_tol),
    )


def hilbert_schmidt_distance(rho, phi) -> float:
    """``sqrt(Tr (rho - |phi><phi|)^2)`` for a state vector ``phi``."""
    rho = _as_matrix(rho)
    phi = np.asarray(phi, dtype=complex)
    diff = rho - np.outer(phi, phi.conj())
    return float(np.sqrt(max(np.real(np.trace(diff @ diff.conj().T)), 0.0)))


def bell_state(coefficients) -> np.ndarray:
    """State vector for coefficients over ``(phi+, phi-, psi+, psi-)``."""
    return np.asarray(coefficients, dtype=complex) @ BELL_BASIS
