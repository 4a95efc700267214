"""Model parameters and the adiabatic block spectrum.

In the adiabatic approximation the Hamiltonian splits into 4x4 blocks
labelled by the delocalized photon numbers ``(N0, N1)``. Each block acts on
the displaced tensor basis, ordered as

    0: |N0_{+2}, N1;     +1, +1>
    1: |N0_{-2}, N1;     -1, -1>
    2: |N0,      N1_{+2}; +1, -1>
    3: |N0,      N1_{-2}; -1, +1>

and its eigenstates are ordered ``(E0, E1, E+, E-)``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .specfun import laguerre, laguerre_zeros

log = logging.getLogger(__name__)

#: the adiabatic regime assumes a qubit splitting well below the oscillator frequency
ADIABATIC_DELTA_RATIO = 0.25

#: displacement shifts (mode 0, mode 1) of each tensor-basis vector
BASIS_SHIFTS = ((2, 0), (-2, 0), (0, 2), (0, -2))
#: qubit configuration (m0, m1) of each tensor-basis vector
BASIS_SPINS = ((1, 1), (-1, -1), (1, -1), (-1, 1))
EIGEN_LABELS = ("E0", "E1", "E+", "E-")


class PhysicsDomainError(ValueError):
    """Parameters outside the physical domain of the model."""


@dataclass(frozen=True)
class ModelParams:
    """Oscillator frequency, qubit splitting, coupling and hopping (hbar = 1)."""

    omega: float
    delta: float
    lam: float
    nu: float

    def __post_init__(self):
        for name in ("omega", "delta", "lam", "nu"):
            if not math.isfinite(getattr(self, name)):
                raise PhysicsDomainError(f"{name} must be finite")
        if self.omega <= 0:
            raise PhysicsDomainError(f"omega must be positive, got {self.omega}")
        if self.delta < 0:
            raise PhysicsDomainError(f"delta must be non-negative, got {self.delta}")
        if self.lam < 0:
            raise PhysicsDomainError(f"lambda must be non-negative, got {self.lam}")
        if abs(self.nu) >= self.omega:
            raise PhysicsDomainError(
                f"|nu| must be below omega so both delocalized modes are stable "
                f"(nu={self.nu}, omega={self.omega})")
        if not self.adiabatic_ok:
            warnings.warn(
                f"delta/omega = {self.delta / self.omega:.3g} exceeds "
                f"{ADIABATIC_DELTA_RATIO}; adiabatic approximation may be poor",
                stacklevel=3)

    @property
    def Omega0(self) -> float:
        return self.omega + self.nu

    @property
    def Omega1(self) -> float:
        return self.omega - self.nu

    @property
    def adiabatic_ok(self) -> bool:
        return self.delta / self.omega <= ADIABATIC_DELTA_RATIO

    @property
    def gamma_plus(self) -> float:
        return self.lam ** 2 * (1.0 / self.Omega0 + 1.0 / self.Omega1)

    @property
    def gamma_minus(self) -> float:
        return self.lam ** 2 * (1.0 / self.Omega0 - 1.0 / self.Omega1)

    def with_lambda(self, lam: float) -> "ModelParams":
        return replace(self, lam=lam)

    def as_dict(self) -> dict:
        return {"omega": self.omega, "delta": self.delta, "lambda": self.lam, "nu": self.nu,
                "Omega0": self.Omega0, "Omega1": self.Omega1}


class BlockIndex(NamedTuple):
    N0: int
    N1: int


@dataclass(frozen=True)
class BlockSpectrum:
    block: BlockIndex
    calN: float
    gamma_plus: float
    gamma_minus: float
    lambda_N: float
    chi_N: float
    energies: tuple  # (E0, E1, E+, E-)
    mixing: np.ndarray  # rows: eigenstates, columns: tensor basis
    parities: tuple
    degenerate: bool  # Lambda_N == 0, so Lambda/|Lambda| was set to +1


def _lambda_core(params: ModelParams, N0, N1):
    x0 = 2.0 * params.lam ** 2 / params.Omega0 ** 2
    x1 = 2.0 * params.lam ** 2 / params.Omega1 ** 2
    # Gaussian factor of <N0_{-2}|N0> <N1|N1_{-2}>: exp(-(x0 + x1) / 2)
    return -0.5 * params.delta * math.exp(-0.5 * (x0 + x1)) * laguerre(N0, x0) * laguerre(N1, x1)


def lambda_of_block(params: ModelParams, block) -> float:
    """Off-diagonal element of the block Hamiltonian.

    ``-Delta/2 * exp(-lam^2/Omega0^2 - lam^2/Omega1^2) * L_N0(2 lam^2/Omega0^2) * L_N1(2 lam^2/Omega1^2)``,
    i.e. ``-Delta/2`` times the product of the two same-level displaced overlaps.
    """
    N0, N1 = block
    return float(_lambda_core(params, N0, N1))


class BlockGrid:
    """Vectorized block data for all ``0 <= N0, N1 <= nmax``.

    Arrays are indexed ``[..., N0, N1]``: ``energies`` has shape
    ``(4, K, K)`` and ``mixing`` shape ``(4, 4, K, K)`` with
    ``mixing[j, b]`` the amplitude of tensor-basis vector ``b`` in
    eigenstate ``j``.
    """

    def __init__(self, params: ModelParams, nmax: int):
        self.params = params
        self.nmax = nmax
        K = nmax + 1
        x0 = 2.0 * params.lam ** 2 / params.Omega0 ** 2
        x1 = 2.0 * params.lam ** 2 / params.Omega1 ** 2
        lag0 = np.array([laguerre(k, x0) for k in range(K)])
        lag1 = np.array([laguerre(k, x1) for k in range(K)])
        N0, N1 = np.meshgrid(np.arange(K), np.arange(K), indexing="ij")
        self.calN = params.Omega0 * N0 + params.Omega1 * N1
        self.lambda_N = -0.5 * params.delta * math.exp(-0.5 * (x0 + x1)) * np.outer(lag0, lag1)
        gp, gm = params.gamma_plus, params.gamma_minus
        self.chi = np.sqrt(4.0 * self.lambda_N ** 2 + gm ** 2)
        self.degenerate = self.lambda_N == 0.0
        self.energies = np.stack([
            self.calN - 2.0 * params.lam ** 2 / params.Omega0,
            self.calN - 2.0 * params.lam ** 2 / params.Omega1,
            self.calN - gp + self.chi,
            self.calN - gp - self.chi,
        ])
        with np.errstate(invalid="ignore", divide="ignore"):
            u2 = np.where(self.chi > 0, (self.chi - gm) / self.chi, 1.0)
            v2 = np.where(self.chi > 0, (self.chi + gm) / self.chi, 1.0)
        # clip rounding below zero when |Gamma_-| == chi
        self.u = np.sqrt(np.clip(u2, 0.0, 2.0))
        self.v = np.sqrt(np.clip(v2, 0.0, 2.0))
        sign = np.where(self.lambda_N < 0, -1.0, 1.0)
        h = 1.0 / math.sqrt(2.0)
        mix = np.zeros((4, 4, K, K))
        mix[0, 0], mix[0, 1] = h, -h
        mix[1, 2], mix[1, 3] = h, -h
        mix[2, 0] = mix[2, 1] = 0.5 * self.u
        mix[2, 2] = mix[2, 3] = 0.5 * sign * self.v
        mix[3, 0] = mix[3, 1] = 0.5 * self.v
        mix[3, 2] = mix[3, 3] = -0.5 * sign * self.u
        self.mixing = mix
        base = np.where((N0 + N1) % 2 == 0, 1, -1)
        self.parities = np.stack([base, base, -base, -base])

    def block(self, N0: int, N1: int) -> BlockSpectrum:
        p = self.params
        return BlockSpectrum(
            block=BlockIndex(N0, N1),
            calN=float(self.calN[N0, N1]),
            gamma_plus=p.gamma_plus,
            gamma_minus=p.gamma_minus,
            lambda_N=float(self.lambda_N[N0, N1]),
            chi_N=float(self.chi[N0, N1]),
            energies=tuple(float(e) for e in self.energies[:, N0, N1]),
            mixing=self.mixing[:, :, N0, N1].copy(),
            parities=tuple(int(s) for s in self.parities[:, N0, N1]),
            degenerate=bool(self.degenerate[N0, N1]),
        )


def block_spectrum(params: ModelParams, block) -> BlockSpectrum:
    """Energies, eigenvector mixing and parities of one ``(N0, N1)`` block."""
    N0, N1 = block
    if N0 < 0 or N1 < 0:
        raise ValueError("block indices must be non-negative")
    return BlockGrid(params, max(N0, N1)).block(N0, N1)


def degeneracy_points(omega: float, nu: float, block, lambda_max: float):
    """Couplings in ``(0, lambda_max]`` where the block's ``Lambda`` vanishes.

    Returns ``(lam, mode, order, k)`` tuples sorted by ``lam``, where the
    zero is the ``k``-th zero of ``L_order`` in the variable
    ``2 lam^2 / Omega_mode^2``.
    """
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    omegas = (omega + nu, omega - nu)
    points = []
    for mode, order in enumerate(block):
        for k, x in enumerate(laguerre_zeros(order), start=1):
            lam = omegas[mode] * math.sqrt(x / 2.0)
            if lam <= lambda_max:
                points.append((lam, mode, order, k))
    points.sort()
    unique = []
    for pt in points:
        if unique and abs(pt[0] - unique[-1][0]) <= 1e-12:
            continue
        unique.append(pt)
    return unique


def degeneracy_couplings(omega: float, nu: float, block, lambda_max: float) -> list[float]:
    """Sorted couplings at which ``E+ = E0`` and ``E- = E1`` in ``block``."""
    return [pt[0] for pt in degeneracy_points(omega, nu, block, lambda_max)]


class SweepRow(NamedTuple):
    lam: float
    E0: float
    E1: float
    Eplus: float
    Eminus: float
    parities: tuple


def energy_sweep(omega: float, delta: float, nu: float, block, lambdas) -> list[SweepRow]:
    """Block energies along a grid of couplings (Fig. 1 style data)."""
    rows = []
    for lam in lambdas:
        params = ModelParams(omega, delta, float(lam), nu)
        spec = block_spectrum(params, block)
        e0, e1, ep, em = spec.energies
        if nu > 0 and not (ep >= e0 >= e1 >= em):
            log.warning("energy hierarchy violated at lambda=%g, block=%s", lam, tuple(block))
        rows.append(SweepRow(float(lam), e0, e1, ep, em, spec.parities))
    return rows
