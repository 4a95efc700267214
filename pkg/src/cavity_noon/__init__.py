"""Two coupled cavities with ultrastrongly coupled qubits: adiabatic spectrum,
N00N-state dynamics, qubit entanglement and an exact Fock-space reference."""

__version__ = "0.1.0"

from .model import ModelParams, PhysicsDomainError, block_spectrum, degeneracy_couplings  # noqa: E402
from .states import InitialNoonState, TruncationError  # noqa: E402
from .dynamics import reduced_density, concurrence_trace, crosscheck_formulas  # noqa: E402
from .entanglement import concurrence, bell_fit, detect_sudden_death  # noqa: E402

__all__ = [
    "ModelParams", "PhysicsDomainError", "block_spectrum", "degeneracy_couplings",
    "InitialNoonState", "TruncationError", "reduced_density", "concurrence_trace",
    "crosscheck_formulas", "concurrence", "bell_fit", "detect_sudden_death",
]
