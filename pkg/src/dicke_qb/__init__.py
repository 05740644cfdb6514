"""Simulation of a three-level (ladder) Dicke quantum battery charged by a cavity mode."""
__version__ = "0.1.0"

from .errors import (
    AccuracyWarning, BasisMismatchError, DickeQBError, IntegrationError, InvalidParameterError,
    InvalidStateError, NumericalError, StaleStateError, TruncationError,
)
from .model import ModelParams, build_system, initial_joint_state
from .dynamics import TimeGrid, propagate_krylov, propagate_spectral
from .observables import ObservableRecord, TrajectorySummary, record, summarize
from .groundstate import PhasePoint, ground_energy, phase_scan, diagonal_scan
from .phasespace import PhaseGrid, photon_distribution, wigner

__all__ = [
    "__version__",
    "DickeQBError", "InvalidParameterError", "BasisMismatchError", "TruncationError", "StaleStateError",
    "InvalidStateError", "NumericalError", "IntegrationError", "AccuracyWarning",
    "ModelParams", "build_system", "initial_joint_state",
    "TimeGrid", "propagate_spectral", "propagate_krylov",
    "ObservableRecord", "TrajectorySummary", "record", "summarize",
    "PhasePoint", "ground_energy", "phase_scan", "diagonal_scan",
    "PhaseGrid", "photon_distribution", "wigner",
]
