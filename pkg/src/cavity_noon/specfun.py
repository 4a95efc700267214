"""Special functions: Laguerre polynomials, terminating 2F0 sums and
overlaps of displaced number states of the delocalized oscillators.

Displaced states are labelled by a shift ``s`` in {-2, 0, +2}; the state
``|N_{j,s}>`` is the number state ``|N>`` of mode ``j`` displaced by
``-s * lambda / (sqrt(2) * Omega_j)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SHIFTS = (-2, 0, 2)


def laguerre(n, x):
    """Laguerre polynomial ``L_n(x)`` by the three-term recurrence.

    ``x`` may be a scalar or an array; the result has the same shape.
    """
    if n < 0:
        raise ValueError(f"Laguerre degree must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def _laguerre_and_derivative(n, x):
    lk, lkm1 = laguerre(n, x), laguerre(n - 1, x)
    return lk, n * (lk - lkm1) / x


@lru_cache(maxsize=None)
def laguerre_zeros(n: int) -> tuple[float, ...]:
    """All zeros of ``L_n`` in ascending order.

    The zeros of ``L_n`` interlace those of ``L_{n-1}``, which gives one
    sign-changing bracket per zero. Each bracket is bisected and the
    result polished with Newton steps.
    """
    if n < 1:
        return ()
    if n == 1:
        return (1.0,)
    inner = laguerre_zeros(n - 1)
    # every zero of L_n lies below 4n + 2
    edges = (0.0, *inner, 4.0 * n + 2.0)
    zeros = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        flo = laguerre(n, lo)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fmid = laguerre(n, mid)
            if fmid == 0.0:
                lo = hi = mid
                break
            if (fmid > 0) == (flo > 0):
                lo, flo = mid, fmid
            else:
                hi = mid
            if hi - lo <= 1e-9 * hi:
                break
        x = 0.5 * (lo + hi)
        for _ in range(4):
            f, df = _laguerre_and_derivative(n, x)
            if df == 0.0:
                break
            step = f / df
            x -= step
            if abs(step) <= 1e-15 * x:
                break
        zeros.append(x)
    return tuple(zeros)


def laguerre_zero(n: int, k: int) -> float:
    """The ``k``-th smallest zero (1-based) of ``L_n``."""
    if n < 1:
        raise ValueError(f"L_{n} has no zeros")
    if not 1 <= k <= n:
        raise IndexError(f"zero index {k} out of range 1..{n}")
    return laguerre_zeros(n)[k - 1]


def hyp2f0_terminating(m: int, n: int, tau: float) -> float:
    """``2F0(-m, -n; ; tau)`` for non-negative integers ``m``, ``n``.

    The series terminates after ``min(m, n)`` terms; terms are summed with
    ``math.fsum`` so cancellation between alternating terms is exact up to
    the rounding of the individual terms.
    """
    if m < 0 or n < 0:
        raise ValueError("upper parameters must be non-positive integers")
    terms = []
    term = 1.0
    for ell in range(min(m, n) + 1):
        terms.append(term)
        term *= (ell - m) * (ell - n) * tau / (ell + 1)
    return math.fsum(terms)


def scaled_hyp2f0(m: int, n: int, r: float, log_shift: float = 0.0) -> float:
    """``r**(m+n) * 2F0(-m, -n; ; -1/r**2) * exp(-log_shift)`` without overflow.

    Term ``l`` equals ``m! n! / ((m-l)! (n-l)! l!) * (-1)**l * r**(m+n-2l)``,
    and ``m + n - 2l >= 0`` always, so the limit ``r -> 0`` is regular.
    ``log_shift`` is subtracted inside each exponent so callers can fold in
    large normalizations such as ``sqrt(m! n!)``.
    """
    terms = []
    for ell in range(min(m, n) + 1):
        power = m + n - 2 * ell
        if r == 0.0 and power > 0:
            continue
        log_mag = (math.lgamma(m + 1) + math.lgamma(n + 1) - math.lgamma(m - ell + 1)
                   - math.lgamma(n - ell + 1) - math.lgamma(ell + 1) - log_shift)
        if power:
            log_mag += power * math.log(abs(r))
        sign = -1.0 if ell % 2 else 1.0
        if r < 0 and power % 2:
            sign = -sign
        terms.append(sign * math.exp(log_mag))
    return math.fsum(terms)


@dataclass(frozen=True)
class OverlapKey:
    """Index of the scalar product ``<M_{j,bra_shift} | N_{j,ket_shift}>``."""

    M: int
    N: int
    bra_shift: int
    ket_shift: int
    mode: int

    def __post_init__(self):
        if self.M < 0 or self.N < 0:
            raise ValueError("quantum numbers must be non-negative")
        if self.bra_shift not in SHIFTS or self.ket_shift not in SHIFTS:
            raise ValueError(
                f"shifts must be in {SHIFTS}, got ({self.bra_shift}, {self.ket_shift})")
        if self.mode not in (0, 1):
            raise ValueError(f"mode must be 0 or 1, got {self.mode}")


def _shift_amplitude(lam: float, omega_j: float) -> float:
    # |displacement| of a one-sided (0, +-2) shift
    return math.sqrt(2.0) * lam / omega_j


def displaced_overlap_value(M: int, N: int, bra_shift: int, ket_shift: int,
                            lam: float, omega_j: float) -> float:
    """Scalar product of displaced number states of one delocalized mode."""
    if bra_shift not in SHIFTS or ket_shift not in SHIFTS:
        raise ValueError(f"shifts must be in {SHIFTS}")
    if omega_j <= 0:
        raise ValueError("mode frequency must be positive")
    if bra_shift == ket_shift or lam == 0.0:
        return 1.0 if M == N else 0.0
    alpha = _shift_amplitude(lam, omega_j)
    if abs(bra_shift - ket_shift) == 4:
        # <M_{-2}|N_{+2}> = (-1)^M e^{-4l^2/W^2} (2 sqrt2 l/W)^{M+N} 2F0(-M,-N;;-W^2/8l^2)/sqrt(M!N!)
        a = 2.0 * alpha
    else:
        # <M_0|N_{+2}> = (-1)^M e^{-l^2/W^2} (sqrt2 l/W)^{M+N} 2F0(-M,-N;;-W^2/2l^2)/sqrt(M!N!)
        a = alpha
    value = scaled_hyp2f0(M, N, a, 0.5 * a * a + 0.5 * (math.lgamma(M + 1) + math.lgamma(N + 1)))
    if M % 2:
        value = -value
    if bra_shift > ket_shift and (M + N) % 2:
        # reversed orientation: (+2,-2), (+2,0) and (0,-2)
        value = -value
    return value


def displaced_overlap(key: OverlapKey, params) -> float:
    """``<M_{j,bra}|N_{j,ket}>`` for the mode selected by ``key.mode``."""
    omega_j = params.Omega0 if key.mode == 0 else params.Omega1
    return displaced_overlap_value(key.M, key.N, key.bra_shift, key.ket_shift,
                                   params.lam, omega_j)


class OverlapTable:
    """Read-only cache of displaced-state overlaps up to ``nmax`` per mode.

    All nine shift pairs of both modes are computed up front; the returned
    matrices are ``(nmax+1, nmax+1)`` arrays indexed ``[M, N]`` with the
    write flag cleared.
    """

    def __init__(self, params, nmax: int):
        self.params = params
        self.nmax = nmax
        self._mats = {}
        size = nmax + 1
        for mode, omega_j in ((0, params.Omega0), (1, params.Omega1)):
            for bra in SHIFTS:
                for ket in SHIFTS:
                    mat = np.empty((size, size))
                    for M in range(size):
                        for N in range(size):
                            mat[M, N] = displaced_overlap_value(M, N, bra, ket, params.lam, omega_j)
                    mat.flags.writeable = False
                    self._mats[mode, bra, ket] = mat

    def matrix(self, mode: int, bra_shift: int, ket_shift: int) -> np.ndarray:
        return self._mats[mode, bra_shift, ket_shift]

    def get(self, key: OverlapKey) -> float:
        if max(key.M, key.N) > self.nmax:
            raise KeyError(f"{key} beyond table size {self.nmax}")
        return float(self._mats[key.mode, key.bra_shift, key.ket_shift][key.M, key.N])
