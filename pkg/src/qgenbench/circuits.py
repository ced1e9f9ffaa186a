"""Layered gate IR plus builders for the two circuit halves.

The generative half is L repetitions of [random-angle RX layer, Erdos-Renyi CZ
layer] followed by a final RX and a final RY layer, all angles i.i.d.
N(0, tau^2).  The trainable half is a 1-D brick ansatz of fully parameterised
two-qubit gates, each decomposed into 15 Pauli rotations so the parameter-shift
rule applies to every parameter.

All builders are pure functions of (spec, seed); serialization is canonical so
repeated builds produce byte-identical JSON.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from .pauli import PauliString
from .seeding import rng_for

TAU2_CONSTANT = 0.2499  # strictly below the 1/4 ceiling

ROTATION_KINDS = ("RX", "RY", "RZ", "RXX", "RYY", "RZZ")

# Per-brick rotation template (applied in list order): a KAK-style
# pre-rotation on each qubit, the three entangling axes, a post-rotation
# on each qubit.  15 parameters per brick.
_BRICK_TEMPLATE: Tuple[Tuple[str, int], ...] = (
    ("RZ", 0), ("RY", 0), ("RZ", 0),
    ("RZ", 1), ("RY", 1), ("RZ", 1),
    ("RXX", 2), ("RYY", 2), ("RZZ", 2),
    ("RZ", 0), ("RY", 0), ("RZ", 0),
    ("RZ", 1), ("RY", 1), ("RZ", 1),
)
BRICK_PARAMS = len(_BRICK_TEMPLATE)


@dataclass(frozen=True)
class Gate:
    kind: str  # RX, RY, RZ, RXX, RYY, RZZ, CZ
    qubits: Tuple[int, ...]
    angle: Optional[float] = None
    role: str = "gen"  # "gen" or "train"
    param_id: Optional[int] = None

    def generator(self, n: int) -> PauliString:
        """Pauli generator G of a rotation gate R = exp(-i*angle*G)."""
        if self.kind not in ROTATION_KINDS:
            raise ValueError(f"{self.kind} is not a rotation gate")
        letter = self.kind[1]
        x = z = 0
        for q in self.qubits:
            if letter in ("X", "Y"):
                x |= 1 << q
            if letter in ("Y", "Z"):
                z |= 1 << q
        return PauliString(n, x, z)


@dataclass(frozen=True)
class RotationLayer:
    axis: str  # X, Y, Z
    role: str
    angles: Tuple[float, ...]

    kind = "rot"


@dataclass(frozen=True)
class CZLayer:
    edges: Tuple[Tuple[int, int], ...]

    kind = "cz"

    def __post_init__(self):
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError("CZ self-loop")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError("duplicate CZ edge")
            seen.add(key)


@dataclass(frozen=True)
class BrickLayer:
    pairs: Tuple[Tuple[int, int], ...]
    param_ids: Tuple[Tuple[int, ...], ...]  # 15 ids per brick

    kind = "brick"

    def __post_init__(self):
        used: Set[int] = set()
        for a, b in self.pairs:
            if a in used or b in used or a == b:
                raise ValueError("brick supports must be pairwise disjoint")
            used.update((a, b))
        for ids in self.param_ids:
            if len(ids) != BRICK_PARAMS:
                raise ValueError(f"each brick takes {BRICK_PARAMS} parameters")


Layer = object  # RotationLayer | CZLayer | BrickLayer


@dataclass(frozen=True)
class LayerGraph:
    """Simple undirected graph on qubits; edges stored as sorted pairs."""

    n: int
    edges: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        for a, b in self.edges:
            if not (0 <= a < b < self.n):
                raise ValueError("edges must be sorted pairs inside the register")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edge")

    def neighbors(self, v: int) -> Set[int]:
        out = set()
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out


@dataclass(frozen=True)
class GenerativeSpec:
    n: int
    layers: int
    p: float
    tau2: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("edge probability must lie in [0, 1]")
        if self.tau2 <= 0:
            raise ValueError("tau2 must be positive")


@dataclass
class Circuit:
    n: int
    layers: Tuple[Layer, ...]
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        seen = set()
        for layer in self.layers:
            if isinstance(layer, BrickLayer):
                for ids in layer.param_ids:
                    for pid in ids:
                        if pid in seen or not 0 <= pid < len(self.theta):
                            raise ValueError(f"bad or reused param_id {pid}")
                        seen.add(pid)

    @property
    def num_params(self) -> int:
        return len(self.theta)

    def with_theta(self, theta: Sequence[float]) -> "Circuit":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != self.theta.shape:
            raise ValueError("theta length mismatch")
        return Circuit(self.n, self.layers, theta)

    def gates(self, theta: Optional[np.ndarray] = None) -> Iterator[Gate]:
        """All gates in application order, trainable angles resolved."""
        th = self.theta if theta is None else np.asarray(theta, dtype=float)
        for layer in self.layers:
            if isinstance(layer, RotationLayer):
                for q, ang in enumerate(layer.angles):
                    yield Gate("R" + layer.axis, (q,), ang, layer.role)
            elif isinstance(layer, CZLayer):
                for a, b in layer.edges:
                    yield Gate("CZ", (a, b))
            elif isinstance(layer, BrickLayer):
                for pair, ids in zip(layer.pairs, layer.param_ids):
                    for (kind, which), pid in zip(_BRICK_TEMPLATE, ids):
                        qubits = pair if which == 2 else (pair[which],)
                        yield Gate(kind, qubits, float(th[pid]), "train", pid)
            else:
                raise TypeError(f"unknown layer {layer!r}")


def resolve_tau2(preset: str, n: int, layers: int, max_weight: int = 1) -> float:
    """Angle-variance presets.

    "constant" stays just under the 1/4 ceiling; "theorem" scales as
    ln(n) / (16 * S * (L+2)) with S the largest observable weight, capped at
    the constant preset.
    """
    if preset == "constant":
        return TAU2_CONSTANT
    if preset == "theorem":
        return min(TAU2_CONSTANT, math.log(n) / (16.0 * max_weight * (layers + 2)))
    raise ValueError(f"unknown tau2 preset {preset!r}")


def sample_er_graph(n: int, p: float, seed: int) -> LayerGraph:
    """G(n, p): each of the C(n,2) edges kept independently with probability p."""
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    keep = rng_for(seed).random(len(pairs)) < p
    return LayerGraph(n, tuple(pair for pair, k in zip(pairs, keep) if k))


def build_generative(spec: GenerativeSpec) -> Circuit:
    """L x [RX layer, CZ layer] then a final RX and RY layer."""
    tau2 = spec.tau2
    if tau2 >= 0.25:
        warnings.warn(
            f"tau2={tau2} is outside the small-angle regime; clamping to {TAU2_CONSTANT}",
            stacklevel=2,
        )
        tau2 = TAU2_CONSTANT
    tau = math.sqrt(tau2)
    rng = rng_for(spec.seed)
    layers: List[Layer] = []
    for _ in range(spec.layers):
        angles = tuple(float(a) for a in rng.normal(0.0, tau, spec.n))
        layers.append(RotationLayer("X", "gen", angles))
        graph = sample_er_graph(spec.n, spec.p, int(rng.integers(0, 2**63)))
        layers.append(CZLayer(graph.edges))
    for axis in ("X", "Y"):
        angles = tuple(float(a) for a in rng.normal(0.0, tau, spec.n))
        layers.append(RotationLayer(axis, "gen", angles))
    return Circuit(spec.n, tuple(layers))


def brick_pairs(n: int, layer_index: int) -> Tuple[Tuple[int, int], ...]:
    offset = layer_index % 2
    return tuple((i, i + 1) for i in range(offset, n - 1, 2))


def default_depth(n: int) -> int:
    return max(1, math.ceil(math.log2(n)))


def build_trainable(n: int, depth: Optional[int] = None, seed: int = 0,
                    init: str = "uniform") -> Circuit:
    """Brick ansatz on a 1-D chain with alternating pair offsets."""
    if depth is None:
        depth = default_depth(n)
    layers: List[Layer] = []
    next_id = 0
    for l in range(depth):
        pairs = brick_pairs(n, l)
        ids = []
        for _ in pairs:
            ids.append(tuple(range(next_id, next_id + BRICK_PARAMS)))
            next_id += BRICK_PARAMS
        layers.append(BrickLayer(pairs, tuple(ids)))
    if init == "uniform":
        theta = rng_for(seed).uniform(-math.pi, math.pi, next_id)
    elif init == "zeros":
        theta = np.zeros(next_id)
    else:
        raise ValueError(f"unknown init {init!r}")
    return Circuit(n, tuple(layers), theta)


def concatenate(first: Circuit, second: Circuit) -> Circuit:
    """Full model: run `first` then `second`; theta comes from `second`."""
    if first.n != second.n:
        raise ValueError("qubit counts differ")
    if first.num_params:
        raise ValueError("first circuit must be parameter-free")
    return Circuit(first.n, first.layers + second.layers, second.theta)


def brick_lightcone(n: int, depth: int, support: Set[int]) -> Set[int]:
    """Backward light cone of an observable through `depth` brick layers."""
    cone = set(support)
    for l in range(depth - 1, -1, -1):
        for a, b in brick_pairs(n, l):
            if a in cone or b in cone:
                cone.update((a, b))
    return cone


def backward_lightcone(circuit: Circuit, support: Set[int]) -> Tuple[List[Set[int]], Set[int]]:
    """Grow the support backwards through the layers (last layer first).

    CZ and brick layers grow the set by gate adjacency; rotation layers do
    not.  Returns the set after each processed layer plus the final set.
    """
    cone = set(support)
    history: List[Set[int]] = []
    for layer in reversed(circuit.layers):
        if isinstance(layer, CZLayer):
            grown = set(cone)
            for a, b in layer.edges:
                if a in cone:
                    grown.add(b)
                if b in cone:
                    grown.add(a)
            cone = grown
        elif isinstance(layer, BrickLayer):
            for a, b in layer.pairs:
                if a in cone or b in cone:
                    cone.update((a, b))
        history.append(set(cone))
    return history, cone


def circuit_to_json_obj(circuit: Circuit) -> dict:
    layers = []
    for layer in circuit.layers:
        if isinstance(layer, RotationLayer):
            layers.append({"type": "rot", "axis": layer.axis, "role": layer.role,
                           "angles": list(layer.angles)})
        elif isinstance(layer, CZLayer):
            layers.append({"type": "cz", "edges": [list(e) for e in layer.edges]})
        elif isinstance(layer, BrickLayer):
            layers.append({"type": "brick", "pairs": [list(p) for p in layer.pairs],
                           "param_ids": [list(i) for i in layer.param_ids]})
        else:
            raise TypeError(f"unknown layer {layer!r}")
    return {"n": circuit.n, "theta": [float(t) for t in circuit.theta], "layers": layers}


def circuit_from_json_obj(obj: dict) -> Circuit:
    layers: List[Layer] = []
    for d in obj["layers"]:
        if d["type"] == "rot":
            layers.append(RotationLayer(d["axis"], d["role"], tuple(d["angles"])))
        elif d["type"] == "cz":
            layers.append(CZLayer(tuple(tuple(e) for e in d["edges"])))
        elif d["type"] == "brick":
            layers.append(BrickLayer(tuple(tuple(p) for p in d["pairs"]),
                                     tuple(tuple(i) for i in d["param_ids"])))
        else:
            raise ValueError(f"unknown layer type {d['type']!r}")
    return Circuit(obj["n"], tuple(layers), np.asarray(obj["theta"], dtype=float))


def circuit_to_json(circuit: Circuit) -> str:
    """Canonical (byte-stable) JSON encoding."""
    return json.dumps(circuit_to_json_obj(circuit), sort_keys=True, separators=(",", ":"))


def circuit_from_json(text: str) -> Circuit:
    return circuit_from_json_obj(json.loads(text))
