"""Cavity-magnon polariton modelling, fitting and bias-field sensitivity tools."""

from .constants import CONSTANTS, MUB_H
from .errors import DomainError, FitError, PolaritonError, ValidationError
from .model import (
    HybridModel,
    Linear,
    Polynomial,
    SmoothTurnover,
    cmp_transition,
    cmp_transition_full,
    dispersion_derivatives,
    hopfield_oracle,
    hybrid_eigenfrequencies,
    hybrid_eigenfrequencies_rwa,
    magnon_frequency,
)

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "MUB_H",
    "DomainError",
    "FitError",
    "PolaritonError",
    "ValidationError",
    "HybridModel",
    "Linear",
    "Polynomial",
    "SmoothTurnover",
    "cmp_transition",
    "cmp_transition_full",
    "dispersion_derivatives",
    "hopfield_oracle",
    "hybrid_eigenfrequencies",
    "hybrid_eigenfrequencies_rwa",
    "magnon_frequency",
]
