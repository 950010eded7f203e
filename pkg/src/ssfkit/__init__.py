"""Spectral shift functions of half-line Schrodinger operators and their box truncations."""

from . import counting, limits, phase, potentials, ssf
from .errors import (
    FloorIntegrationError,
    InadmissiblePotentialError,
    InconclusiveError,
    JumpAmbiguityError,
    NumericalError,
    SingularIntegrationError,
    SlowConvergenceError,
    SsfError,
    TailTooSlowError,
)
from .potentials import PotentialSpec

__version__ = "0.1.0"

__all__ = [
    "PotentialSpec",
    "counting",
    "limits",
    "phase",
    "potentials",
    "ssf",
    "SsfError",
    "InadmissiblePotentialError",
    "NumericalError",
    "SingularIntegrationError",
    "TailTooSlowError",
    "SlowConvergenceError",
    "InconclusiveError",
    "JumpAmbiguityError",
    "FloorIntegrationError",
]
