"""Quantum-Hamiltonian toolkit for the current-conditioned ASEP on a ring.

Exact (Laurent-polynomial) and numeric construction of weighted
generators, quantum-algebra operators and shock/antishock measures,
plus executable checks of the associated duality relations.
"""

from .scalar import ExactField, LaurentPoly, NumericField, q_factorial, q_number
from .statespace import Configuration, PositionList, SectorBasis, basis
from .sparse import StateVector, TensorOperator
from .operators import GeneratorSpec, build_generator, uq_generator
from .measures import SAMSpec, duality_function, sam_fugacities, sam_vector
from .evolution import DrivingSpec, decompose_onto_sams, expm_action, transition_table
from .verify import VerificationReport, run_suite

__all__ = [
    "ExactField", "LaurentPoly", "NumericField", "q_factorial", "q_number",
    "Configuration", "PositionList", "SectorBasis", "basis",
    "StateVector", "TensorOperator",
    "GeneratorSpec", "build_generator", "uq_generator",
    "SAMSpec", "duality_function", "sam_fugacities", "sam_vector",
    "DrivingSpec", "decompose_onto_sams", "expm_action", "transition_table",
    "VerificationReport", "run_suite",
]
__version__ = "0.1.0"
