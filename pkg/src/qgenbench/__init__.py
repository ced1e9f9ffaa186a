"""Barren-plateau-free continuous quantum generative circuits: simulation,
verification, and classical-simulability benchmarks."""

__version__ = "0.1.0"

from .circuits import (Circuit, GenerativeSpec, LayerGraph, build_generative,
                       build_trainable, concatenate, resolve_tau2, sample_er_graph)
from .pauli import PauliString, PauliSum, PauliTerm
from .propagation import PropagationReport, TruncationPolicy, propagate
from .statevector import StateVector, expectation, parameter_shift_gradient, run

__all__ = [
    "Circuit", "GenerativeSpec", "LayerGraph", "PauliString", "PauliSum",
    "PauliTerm", "PropagationReport", "StateVector", "TruncationPolicy",
    "build_generative", "build_trainable", "concatenate", "expectation",
    "parameter_shift_gradient", "propagate", "resolve_tau2", "run",
    "sample_er_graph",
]
