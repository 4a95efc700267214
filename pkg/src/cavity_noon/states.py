"""Expansion of localized number states in the adiabatic energy eigenbasis.

A localized state ``|n0, m0; n1, m1>`` has overlaps with the displaced
tensor basis given by products ``C_j * F_j``: ``C_j`` collects the Gaussian
and power-law prefactors, ``F_j`` is a double sum of terminating 2F0
series. The eigenbasis coefficients follow from the block mixing matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .model import BlockGrid, ModelParams
from .specfun import hyp2f0_terminating, scaled_hyp2f0

DEFAULT_EPSILON = 1e-12
TRUNCATION_CAP = 256


class TruncationError(RuntimeError):
    """The requested accuracy needs more blocks than the hard cap allows."""


@dataclass(frozen=True)
class InitialNoonState:
    """``(|n,-1; 0,-1> + c |0,-1; n,-1>) / sqrt(1 + |c|^2)``."""

    n: int
    c: complex = 0j

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"photon number must be non-negative, got {self.n}")
        object.__setattr__(self, "c", complex(self.c))
        if not (math.isfinite(self.c.real) and math.isfinite(self.c.imag)):
            raise ValueError("c must be finite")
        if self.n == 0 and self.c != 0:
            # both components are |0,0>; the 1/sqrt(1+|c|^2) prefactor would not normalize
            raise ValueError("n = 0 requires c = 0")

    @property
    def norm_factor(self) -> float:
        return 1.0 / math.sqrt(1.0 + abs(self.c) ** 2)

    qubit_config = (-1, -1)


def _mode_omega(params: ModelParams, mode: int) -> float:
    if mode not in (0, 1):
        raise ValueError(f"mode must be 0 or 1, got {mode}")
    return params.Omega0 if mode == 0 else params.Omega1


def coeff_C(mode: int, n0: int, n1: int, block, sign: int, params: ModelParams) -> float:
    """Prefactor ``C_j(+-lambda)`` of the localized/displaced projection."""
    N0, N1 = block
    r = params.lam / _mode_omega(params, mode)
    power = n0 + n1 + N0 + N1
    if r == 0.0:
        return 1.0 / math.sqrt(2.0 ** (N0 + N1) * math.factorial(n0) * math.factorial(n1)
                               * math.factorial(N0) * math.factorial(N1)) if power == 0 else 0.0
    log_c = (-r * r + power * math.log(r) - 0.5 * (N0 + N1) * math.log(2.0)
             - 0.5 * (math.lgamma(n0 + 1) + math.lgamma(n1 + 1)
                      + math.lgamma(N0 + 1) + math.lgamma(N1 + 1)))
    value = math.exp(log_c)
    return -value if sign < 0 and power % 2 else value


@lru_cache(maxsize=None)
def _binomial_weights(N0: int, N1: int, mode: int) -> tuple[int, ...]:
    """Integer coefficients ``w(s)`` grouping the double sum by ``s = k + l``.

    Mode 0 carries ``(-1)^l`` (coefficients of ``(1+z)^N0 (1-z)^N1``),
    mode 1 carries ``(-1)^k`` (coefficients of ``(1-z)^N0 (1+z)^N1``).
    """
    if N1 == 0:
        return tuple((-1 if mode == 1 and k % 2 else 1) * math.comb(N0, k) for k in range(N0 + 1))
    prev = _binomial_weights(N0, N1 - 1, mode)
    step = -1 if mode == 0 else 1
    return tuple((prev[s] if s < len(prev) else 0) + (step * prev[s - 1] if s else 0)
                 for s in range(len(prev) + 1))


def weight_F(mode: int, n0: int, n1: int, block, params: ModelParams) -> float:
    """Double hypergeometric sum ``F_0`` (mode 0) or ``F_1`` (mode 1)."""
    if params.lam == 0.0:
        raise ValueError("F is singular at lambda = 0; use projection() for the limit")
    N0, N1 = block
    tau = -(_mode_omega(params, mode) / params.lam) ** 2
    terms = []
    for k in range(N0 + 1):
        for ell in range(N1 + 1):
            sgn = -1.0 if (ell if mode == 0 else k) % 2 else 1.0
            terms.append(sgn * math.comb(N0, k) * math.comb(N1, ell)
                         * hyp2f0_terminating(n0, k + ell, tau)
                         * hyp2f0_terminating(n1, N0 + N1 - k - ell, tau))
    return math.fsum(terms)


@lru_cache(maxsize=64)
def _scaled_table(m: int, smax: int, r: float) -> tuple[float, ...]:
    # entries carry 1/sqrt(m! s!) so large photon numbers stay in range
    return tuple(scaled_hyp2f0(m, s, r, 0.5 * (math.lgamma(m + 1) + math.lgamma(s + 1)))
                 for s in range(smax + 1))


def projection(mode: int, n0: int, n1: int, block, sign: int, params: ModelParams) -> float:
    """The product ``C_j(sign*lambda) * F_j`` evaluated as one scaled sum.

    Powers of ``lambda/Omega_j`` are distributed into the 2F0 terms, so the
    result stays finite and exact in the limit ``lambda -> 0``.
    """
    N0, N1 = block
    r = sign * params.lam / _mode_omega(params, mode)
    Ntot = N0 + N1
    h0 = _scaled_table(n0, Ntot, r)
    h1 = _scaled_table(n1, Ntot, r)
    w = _binomial_weights(N0, N1, mode)
    base = -r * r - 0.5 * Ntot * math.log(2.0) - 0.5 * (math.lgamma(N0 + 1) + math.lgamma(N1 + 1))
    terms = []
    for s in range(Ntot + 1):
        if not w[s]:
            continue
        log_c = (base + math.log(abs(w[s]))
                 + 0.5 * (math.lgamma(s + 1) + math.lgamma(Ntot - s + 1)))
        coef = math.exp(log_c)
        terms.append((coef if w[s] > 0 else -coef) * h0[s] * h1[Ntot - s])
    return math.fsum(terms)


def _projection_grid(mode: int, n0: int, n1: int, params: ModelParams, nmax: int) -> np.ndarray:
    K = nmax + 1
    out = np.empty((K, K))
    for N0 in range(K):
        for N1 in range(K):
            out[N0, N1] = projection(mode, n0, n1, (N0, N1), 1, params)
    return out


def _selector_signs(n0, m0, n1, m1, N0, N1):
    """Sign/selector factors of the two symmetric and two mixed-spin channels."""
    same_up = (-1) ** (n0 + n1 + N1) if (m0, m1) == (1, 1) else 0
    same_dn = (-1) ** N0 if (m0, m1) == (-1, -1) else 0
    mixed_ud = (-1) ** (n0 + N0) if (m0, m1) == (1, -1) else 0
    mixed_du = (-1) ** (n1 + N1) if (m0, m1) == (-1, 1) else 0
    return same_up, same_dn, mixed_ud, mixed_du


def _check_spins(m0, m1):
    if m0 not in (-1, 1) or m1 not in (-1, 1):
        raise ValueError(f"qubit labels must be +-1, got ({m0}, {m1})")


def expansion_coeffs(n0: int, m0: int, n1: int, m1: int, block, params: ModelParams):
    """Coefficients ``(c0, c1, c+, c-)`` of ``|n0,m0;n1,m1>`` in block ``(N0, N1)``."""
    _check_spins(m0, m1)
    N0, N1 = block
    spec = BlockGrid(params, max(N0, N1))
    u, v = spec.u[N0, N1], spec.v[N0, N1]
    sgn = -1.0 if spec.lambda_N[N0, N1] < 0 else 1.0
    up, dn, ud, du = _selector_signs(n0, m0, n1, m1, N0, N1)
    p0 = projection(0, n0, n1, block, 1, params) if (up or dn) else 0.0
    p1 = projection(1, n0, n1, block, 1, params) if (ud or du) else 0.0
    h = 1.0 / math.sqrt(2.0)
    c0 = h * (up - dn) * p0
    c1 = h * (ud - du) * p1
    cp = 0.5 * u * (up + dn) * p0 + 0.5 * sgn * v * (ud + du) * p1
    cm = 0.5 * v * (up + dn) * p0 - 0.5 * sgn * u * (ud + du) * p1
    return float(c0), float(c1), float(cp), float(cm)


def expansion_array(n0: int, m0: int, n1: int, m1: int, params: ModelParams, nmax: int,
                    grid: BlockGrid | None = None) -> np.ndarray:
    """All coefficients of ``|n0,m0;n1,m1>`` for blocks up to ``nmax``, shape ``(4, K, K)``."""
    _check_spins(m0, m1)
    grid = grid if grid is not None else BlockGrid(params, nmax)
    K = nmax + 1
    N0, N1 = np.meshgrid(np.arange(K), np.arange(K), indexing="ij")
    sel = [np.zeros((K, K)) for _ in range(4)]
    for N0_ in range(K):
        for N1_ in range(K):
            for i, s in enumerate(_selector_signs(n0, m0, n1, m1, N0_, N1_)):
                sel[i][N0_, N1_] = s
    up, dn, ud, du = sel
    p0 = _projection_grid(0, n0, n1, params, nmax) if m0 == m1 else np.zeros((K, K))
    p1 = _projection_grid(1, n0, n1, params, nmax) if m0 != m1 else np.zeros((K, K))
    sgn = np.where(grid.lambda_N[:K, :K] < 0, -1.0, 1.0)
    u, v = grid.u[:K, :K], grid.v[:K, :K]
    h = 1.0 / math.sqrt(2.0)
    out = np.empty((4, K, K))
    out[0] = h * (up - dn) * p0
    out[1] = h * (ud - du) * p1
    out[2] = 0.5 * u * (up + dn) * p0 + 0.5 * sgn * v * (ud + du) * p1
    out[3] = 0.5 * v * (up + dn) * p0 - 0.5 * sgn * u * (ud + du) * p1
    return out


@dataclass(frozen=True)
class ExpansionTable:
    """Eigenbasis coefficients of a N00N-type state over a square block range.

    ``first`` and ``second`` hold the real coefficients of ``|n,-1;0,-1>``
    and ``|0,-1;n,-1>``; the complex amplitudes of the superposition are
    assembled on demand.
    """

    nmax: int
    state: InitialNoonState
    first: np.ndarray
    second: np.ndarray

    @property
    def amplitudes(self) -> np.ndarray:
        s = self.state
        return s.norm_factor * (self.first + s.c * self.second)

    @property
    def captured_weight(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def weight_within(self, nmax: int) -> float:
        a = self.amplitudes[:, : nmax + 1, : nmax + 1]
        return float(np.sum(np.abs(a) ** 2))

    def entries(self):
        """Mapping ``(N0, N1) -> (c0, c1, c+, c-)`` of the complex amplitudes."""
        a = self.amplitudes
        K = self.nmax + 1
        return {(i, j): tuple(a[:, i, j]) for i in range(K) for j in range(K)}


def build_expansion(state: InitialNoonState, params: ModelParams, nmax: int,
                    grid: BlockGrid | None = None) -> ExpansionTable:
    grid = grid if grid is not None else BlockGrid(params, nmax)
    first = expansion_array(state.n, -1, 0, -1, params, nmax, grid)
    if state.n == 0:
        second = np.zeros_like(first)
    else:
        second = expansion_array(0, -1, state.n, -1, params, nmax, grid)
    return ExpansionTable(nmax, state, first, second)


def choose_truncation(state: InitialNoonState, params: ModelParams,
                      epsilon: float = DEFAULT_EPSILON, cap: int | None = None) -> int:
    """Smallest ``nmax`` whose square block range captures weight ``>= 1 - epsilon``.

    Doubles ``nmax`` until the target is met, then bisects within the last
    (largest) table, which contains every smaller square range.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    cap = TRUNCATION_CAP if cap is None else cap
    target = 1.0 - epsilon
    lo, hi = -1, 0
    while True:
        table = build_expansion(state, params, hi)
        if table.captured_weight >= target:
            break
        if hi >= cap:
            raise TruncationError(
                f"captured weight {table.captured_weight:.3e} below 1-{epsilon:g} at cap nmax={cap}")
        lo, hi = hi, min(cap, max(1, 2 * hi))
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if table.weight_within(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def weight_S(n0: int, n1: int, N0: int, N1: int, x: float) -> float:
    """Bipartite weight ``S_{n0,n1}(N0, N1)`` at argument ``-1/x`` (float)."""
    tau = -1.0 / x
    terms = []
    for k in range(N0 + 1):
        for ell in range(N1 + 1):
            sgn = -1.0 if k % 2 else 1.0
            terms.append(sgn * math.comb(N0, k) * math.comb(N1, ell)
                         * hyp2f0_terminating(n0, k + ell, tau)
                         * hyp2f0_terminating(n1, N0 + N1 - k - ell, tau))
    return math.fsum(terms)


def _scaled_hyp2f0_int(m: int, s: int, P: int, Q: int) -> int:
    """``P**m * 2F0(-m, -s; ; -Q/P)`` as an exact integer."""
    total = 0
    for ell in range(min(m, s) + 1):
        coef = math.perm(m, ell) * math.comb(s, ell)
        total += (-1) ** ell * coef * Q ** ell * P ** (m - ell)
    return total


@lru_cache(maxsize=64)
def _exact_S_table(n0: int, n1: int, P: int, Q: int, nmax: int):
    # entries are P**(n0+n1) * S_{n0,n1}(N0, N1) for x = P/Q
    smax = 2 * nmax
    h0 = [_scaled_hyp2f0_int(n0, s, P, Q) for s in range(smax + 1)]
    h1 = [_scaled_hyp2f0_int(n1, s, P, Q) for s in range(smax + 1)]
    table = {}
    for N0 in range(nmax + 1):
        for N1 in range(nmax + 1):
            w = _binomial_weights(N0, N1, 1)
            Ntot = N0 + N1
            table[N0, N1] = sum(w[s] * h0[s] * h1[Ntot - s] for s in range(Ntot + 1) if w[s])
    return table


@lru_cache(maxsize=8)
def _exact_identity_weights(P: int, Q: int, nmax: int):
    # (x/2)^N / (N0! N1!) over the common denominator (2Q)^(2 nmax) (nmax!)^2
    fmax = math.factorial(nmax)
    weights = {}
    for N0 in range(nmax + 1):
        for N1 in range(nmax + 1):
            Ntot = N0 + N1
            weights[N0, N1] = (P ** Ntot * (2 * Q) ** (2 * nmax - Ntot)
                               * (fmax // math.factorial(N0)) * (fmax // math.factorial(N1)))
    return weights, (2 * Q) ** (2 * nmax) * fmax * fmax


def hypergeometric_identity_check(n0: int, n1: int, n0p: int, n1p: int, x: float, nmax: int):
    """Truncated left side and closed-form right side of the S-weight identity.

    ``sum_{N0,N1<=nmax} S_{n0,n1} S_{n0',n1'} (x/2)^{N0+N1} / (N0! N1!)``
    against ``n0! n1! x^{-(n0+n1)} exp(2x) delta delta``. The left side is
    accumulated in exact rational arithmetic (``x`` is taken as the exact
    binary value of the float), so the only error is the truncation.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    P, Q = Fraction(x).as_integer_ratio()
    s_a = _exact_S_table(n0, n1, P, Q, nmax)
    s_b = _exact_S_table(n0p, n1p, P, Q, nmax)
    wts, denom = _exact_identity_weights(P, Q, nmax)
    numer = sum(wts[key] * s_a[key] * s_b[key] for key in wts)
    lhs = Fraction(numer, denom * P ** (n0 + n1 + n0p + n1p))
    if (n0, n1) == (n0p, n1p):
        rhs = math.factorial(n0) * math.factorial(n1) / x ** (n0 + n1) * math.exp(2.0 * x)
    else:
        rhs = 0.0
    return float(lhs), rhs
