"""Dense exact simulation for n <= ~24 qubits.

Qubit 0 is the least-significant bit of the amplitude index.  This engine is
the ground-truth oracle for the propagation, shadow, and experiment modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Set

import numpy as np

from .circuits import Circuit, Gate
from .pauli import PauliString, PauliSum

_MAX_QUBITS = 24


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        if n > _MAX_QUBITS:
            raise ValueError(f"statevector engine caps at {_MAX_QUBITS} qubits")
        amps = np.zeros(2**n, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())


def _apply_1q(amps: np.ndarray, n: int, q: int, mat: np.ndarray) -> np.ndarray:
    view = amps.reshape(2 ** (n - q - 1), 2, 2**q)
    return np.einsum("ab,xbz->xaz", mat, view).reshape(-1)


def apply_pauli(amps: np.ndarray, p: PauliString) -> np.ndarray:
    """P|psi> via index arithmetic: P = i^{#Y} (prod X)(prod Z)."""
    idx = np.arange(len(amps), dtype=np.uint64)
    src = idx ^ np.uint64(p.x)
    parity = np.bitwise_count(src & np.uint64(p.z)) & 1
    phase = (1j) ** ((p.x & p.z).bit_count() % 4)
    out = amps[src] * phase
    out[parity == 1] *= -1
    return out


_1Q_ROT = {
    "RX": lambda g: np.array([[math.cos(g), -1j * math.sin(g)],
                              [-1j * math.sin(g), math.cos(g)]]),
    "RY": lambda g: np.array([[math.cos(g), -math.sin(g)],
                              [math.sin(g), math.cos(g)]], dtype=complex),
    "RZ": lambda g: np.array([[np.exp(-1j * g), 0], [0, np.exp(1j * g)]]),
}


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Unitary action of one gate; convention R(g) = exp(-i*g*G)."""
    amps = state.amplitudes
    if gate.kind in _1Q_ROT:
        amps = _apply_1q(amps, state.n, gate.qubits[0], _1Q_ROT[gate.kind](gate.angle))
    elif gate.kind in ("RXX", "RYY", "RZZ"):
        g = gate.angle
        gen = gate.generator(state.n)
        amps = math.cos(g) * amps - 1j * math.sin(g) * apply_pauli(amps, gen)
    elif gate.kind == "CZ":
        a, b = gate.qubits
        idx = np.arange(len(amps))
        mask = ((idx >> a) & 1) & ((idx >> b) & 1)
        amps = amps.copy()
        amps[mask == 1] *= -1
    else:
        raise ValueError(f"unknown gate kind {gate.kind!r}")
    return StateVector(state.n, amps)


def run(circuit: Circuit, theta: Optional[Sequence[float]] = None) -> StateVector:
    """Apply all layers in order to |0...0>."""
    state = StateVector.zero(circuit.n)
    for gate in circuit.gates(None if theta is None else np.asarray(theta, float)):
        state = apply_gate(state, gate)
    return state


def expectation(state: StateVector, observable: PauliSum) -> float:
    val = 0.0
    for term in observable:
        val += term.coefficient * np.vdot(state.amplitudes,
                                          apply_pauli(state.amplitudes, term.string)).real
    return float(val)


def reduced_density_matrix(state: StateVector, subsystem: Iterable[int]) -> np.ndarray:
    """Partial trace down to `subsystem` (|subsystem| <= 12), Hermitian, trace 1."""
    keep = sorted(set(subsystem))
    if len(keep) > 12:
        raise ValueError("subsystem too large for a dense reduced state")
    n = state.n
    # axis k of the reshaped tensor is qubit n-1-k
    tensor = state.amplitudes.reshape((2,) * n)
    keep_axes = [n - 1 - q for q in reversed(keep)]  # highest kept qubit first
    rest = [ax for ax in range(n) if ax not in keep_axes]
    mat = tensor.transpose(keep_axes + rest).reshape(2 ** len(keep), -1)
    rho = mat @ mat.conj().T
    return 0.5 * (rho + rho.conj().T)


def expectation_via_rdm(rho: np.ndarray, op: np.ndarray) -> float:
    return float(np.trace(rho @ op).real)


def parameter_shift_gradient(circuit: Circuit, param: int, observable: PauliSum,
                             theta: Optional[np.ndarray] = None) -> float:
    """d<O>/d(theta_param) via two shifted runs (exact for Pauli generators)."""
    th = np.array(circuit.theta if theta is None else theta, dtype=float)
    shift = math.pi / 4
    vals = []
    for s in (shift, -shift):
        th2 = th.copy()
        th2[param] += s
        vals.append(expectation(run(circuit, th2), observable))
    return vals[0] - vals[1]


def dense_pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense 2^n matrix of a Pauli string (test oracle; keep n small)."""
    mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.array([[1, 0], [0, -1]], dtype=complex)}
    out = np.eye(1, dtype=complex)
    # qubit 0 is the LSB, so it is the rightmost kron factor
    for q in range(p.n - 1, -1, -1):
        out = np.kron(out, mats["IXYZ"[["I", "X", "Y", "Z"].index(p.label()[q])]])
    return out
