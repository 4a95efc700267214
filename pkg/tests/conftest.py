import math

import numpy as np
import pytest
from scipy.special import eval_genlaguerre

from cavity_noon.model import ModelParams

TABLE1 = ModelParams(omega=1.0, delta=0.15, lam=0.1, nu=0.5)


@pytest.fixture
def table1_params():
    return TABLE1


def displacement_element(beta, M, N):
    """``<M|D(beta)|N>`` for real ``beta`` via associated Laguerre polynomials."""
    if M >= N:
        return (math.sqrt(math.factorial(N) / math.factorial(M)) * beta ** (M - N)
                * math.exp(-beta ** 2 / 2) * eval_genlaguerre(N, M - N, beta ** 2))
    return (math.sqrt(math.factorial(M) / math.factorial(N)) * (-beta) ** (N - M)
            * math.exp(-beta ** 2 / 2) * eval_genlaguerre(M, N - M, beta ** 2))


def random_density(rng, rank=4):
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_unitary2(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_report(request):
    """Collects one summary line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])
    return lines.append


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
