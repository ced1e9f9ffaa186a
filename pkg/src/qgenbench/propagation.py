"""Heisenberg-picture Pauli propagation with configurable truncation.

The observable (a real-coefficient Pauli sum) is conjugated gate-by-gate from
the last circuit gate to the first; the final expectation is read off on
|0...0>.  Terms are held in flat numpy arrays keyed by (x, z) bitmasks, so a
merge step is a single ``np.unique`` pass.  Truncation runs after each
rotation gate and merge; CZ gates create no new terms.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .circuits import (Circuit, GenerativeSpec, ROTATION_KINDS, build_generative,
                       build_trainable, concatenate)
from .pauli import COEFF_EPS, PauliString, PauliSum, PauliTerm, _MUL_TABLE
from .seeding import derive_seed

_MAX_PROP_QUBITS = 32  # merge keys pack (x, z) into one uint64

# exponent of i in the single-qubit product a*b, indexed [a_letter][b_letter]
_PHASE_EXP = np.zeros((4, 4), dtype=np.int64)
for (_a, _b), (_k, _) in _MUL_TABLE.items():
    _PHASE_EXP[_a, _b] = _k


class ResourceLimitError(RuntimeError):
    """Raised when exact-mode term count exceeds max_terms; carries the
    partial report collected so far."""

    def __init__(self, message: str, report: "PropagationReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class TruncationPolicy:
    sine_cutoff: Optional[int] = None
    coeff_threshold: Optional[float] = None
    weight_cutoff: Optional[int] = None
    max_terms: Optional[int] = None
    dynamic_schedule: Optional[Dict[int, "TruncationPolicy"]] = None
    exact: bool = False

    def __post_init__(self):
        criteria = (self.sine_cutoff, self.coeff_threshold, self.weight_cutoff,
                    self.max_terms)
        if not self.exact and all(c is None for c in criteria):
            raise ValueError("set at least one truncation criterion or exact=True")

    @classmethod
    def exact_mode(cls, max_terms: Optional[int] = None) -> "TruncationPolicy":
        return cls(exact=True, max_terms=max_terms)

    def at_step(self, step: int) -> "TruncationPolicy":
        """Policy in force at a given processing step (0 = last circuit gate).

        The dynamic schedule maps a step index to a full replacement policy,
        active for all steps >= that index; the largest applicable key wins.
        """
        if not self.dynamic_schedule:
            return self
        best = None
        for k in self.dynamic_schedule:
            if k <= step and (best is None or k > best):
                best = k
        if best is None:
            return self
        return self.dynamic_schedule[best]


@dataclass
class PropagationReport:
    expectation: float
    terms_per_step: List[int] = field(default_factory=list)
    peak_terms: int = 0
    dropped_mass: float = 0.0
    wall_time: float = 0.0
    final_terms: int = 0


class _TermArrays:
    """Flat storage: x/z masks (uint64), coefficients, sine counts."""

    def __init__(self, x, z, c, s):
        self.x = np.asarray(x, dtype=np.uint64)
        self.z = np.asarray(z, dtype=np.uint64)
        self.c = np.asarray(c, dtype=np.float64)
        self.s = np.asarray(s, dtype=np.int64)

    def __len__(self):
        return len(self.c)

    @classmethod
    def from_sum(cls, obs: PauliSum) -> "_TermArrays":
        terms = list(obs)
        return cls([t.string.x for t in terms], [t.string.z for t in terms],
                   [t.coefficient for t in terms], [t.sine_count for t in terms])

    def to_sum(self, n: int) -> PauliSum:
        out = PauliSum(n)
        for x, z, c, s in zip(self.x, self.z, self.c, self.s):
            out.add(PauliTerm(float(c), PauliString(n, int(x), int(z)), int(s)))
        return out


def _merge(t: _TermArrays) -> _TermArrays:
    keys = (t.x << np.uint64(32)) | t.z
    uniq, inv = np.unique(keys, return_inverse=True)
    c = np.zeros(len(uniq))
    np.add.at(c, inv, t.c)
    s = np.full(len(uniq), np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(s, inv, t.s)
    keep = np.abs(c) >= COEFF_EPS
    return _TermArrays(uniq[keep] >> np.uint64(32), uniq[keep] & np.uint64(0xFFFFFFFF),
                       c[keep], s[keep])


_XZ_TO_LETTER = np.array([0, 1, 3, 2], dtype=np.int64)  # index 2*z + x


def _letters(x: np.ndarray, z: np.ndarray, q: int) -> np.ndarray:
    """Letter indices (I=0 X=1 Y=2 Z=3) at qubit q for each term."""
    xb = ((x >> np.uint64(q)) & np.uint64(1)).astype(np.int64)
    zb = ((z >> np.uint64(q)) & np.uint64(1)).astype(np.int64)
    return _XZ_TO_LETTER[2 * zb + xb]


def _apply_rotation(t: _TermArrays, gen: PauliString, angle: float) -> _TermArrays:
    gx, gz = np.uint64(gen.x), np.uint64(gen.z)
    anti = ((np.bitwise_count(t.x & gz) + np.bitwise_count(t.z & gx)) & 1).astype(bool)
    if not anti.any():
        return t
    c2, s2 = math.cos(2 * angle), math.sin(2 * angle)
    ax, az, ac, asn = t.x[anti], t.z[anti], t.c[anti], t.s[anti]
    # sign of the sine branch: real part of i * phase(G P)
    k = np.ones(len(ac), dtype=np.int64)  # the leading factor of i
    for q in range(gen.n):
        gl = gen.letter_index(q)
        if gl:
            k += _PHASE_EXP[gl, _letters(ax, az, q)]
    sign = np.where(k % 4 == 0, 1.0, -1.0)
    nx = np.concatenate([t.x[~anti], ax, ax ^ gx])
    nz = np.concatenate([t.z[~anti], az, az ^ gz])
    nc = np.concatenate([t.c[~anti], ac * c2, ac * s2 * sign])
    ns = np.concatenate([t.s[~anti], asn, asn + 1])
    return _merge(_TermArrays(nx, nz, nc, ns))


def _apply_cz(t: _TermArrays, a: int, b: int) -> _TermArrays:
    one = np.uint64(1)
    xa = (t.x >> np.uint64(a)) & one
    xb = (t.x >> np.uint64(b)) & one
    za = (t.z >> np.uint64(a)) & one
    zb = (t.z >> np.uint64(b)) & one
    flip = (xa & xb & (za ^ zb)).astype(bool)
    c = t.c.copy()
    c[flip] *= -1
    z = t.z ^ (xb << np.uint64(a)) ^ (xa << np.uint64(b))
    return _TermArrays(t.x, z, c, t.s)


def _truncate(t: _TermArrays, pol: TruncationPolicy, report: PropagationReport) -> _TermArrays:
    if pol.exact:
        if pol.max_terms is not None and len(t) > pol.max_terms:
            report.final_terms = len(t)
            raise ResourceLimitError(
                f"exact mode exceeded max_terms={pol.max_terms} ({len(t)} terms)", report)
        return t
    drop = np.zeros(len(t), dtype=bool)
    if pol.sine_cutoff is not None:
        drop |= t.s > pol.sine_cutoff
    if pol.coeff_threshold is not None:
        drop |= np.abs(t.c) < pol.coeff_threshold
    if pol.weight_cutoff is not None:
        drop |= np.bitwise_count(t.x | t.z) > pol.weight_cutoff
    if drop.any():
        report.dropped_mass += float(np.sum(np.abs(t.c[drop])))
        t = _TermArrays(t.x[~drop], t.z[~drop], t.c[~drop], t.s[~drop])
    if pol.max_terms is not None and len(t) > pol.max_terms:
        order = np.argsort(-np.abs(t.c), kind="stable")
        keep, lose = order[:pol.max_terms], order[pol.max_terms:]
        report.dropped_mass += float(np.sum(np.abs(t.c[lose])))
        keep.sort()
        t = _TermArrays(t.x[keep], t.z[keep], t.c[keep], t.s[keep])
    return t


def propagate(circuit: Circuit, observable: PauliSum,
              policy: TruncationPolicy) -> PropagationReport:
    """Conjugate `observable` back through `circuit` and evaluate on |0...0>."""
    if circuit.n > _MAX_PROP_QUBITS:
        raise ValueError(f"propagation engine caps at {_MAX_PROP_QUBITS} qubits")
    for term in observable:
        if term.string.n != circuit.n:
            raise ValueError("observable qubit count differs from circuit")
    gates = list(circuit.gates())
    report = PropagationReport(expectation=0.0)
    t = _merge(_TermArrays.from_sum(observable))
    start = time.monotonic()
    step = 0
    for gate in reversed(gates):
        if gate.kind == "CZ":
            t = _apply_cz(t, *gate.qubits)
        elif gate.kind in ROTATION_KINDS:
            t = _apply_rotation(t, gate.generator(circuit.n), gate.angle)
            t = _truncate(t, policy.at_step(step), report)
        else:
            raise ValueError(f"unknown gate kind {gate.kind!r}")
        step += 1
        report.terms_per_step.append(len(t))
        report.peak_terms = max(report.peak_terms, len(t))
    report.wall_time = time.monotonic() - start
    zmask = t.x == 0
    report.expectation = float(np.sum(t.c[zmask]))
    report.final_terms = len(t)
    return report


def sine_cutoff_default(n: int) -> int:
    """ceil(log2 n) sine factors; a single qubit gets 0."""
    if n < 1:
        raise ValueError("n must be positive")
    return max(0, math.ceil(math.log2(n)))


def benchmark_propagation(ns, policy: Optional[TruncationPolicy], trials: int, seed: int, *,
                          layers: Optional[int] = None, p: Optional[float] = None,
                          tau2: Optional[float] = None, trainable_depth: int = 0,
                          observable_qubit: int = 0,
                          exact_check_max_n: int = 12) -> List[dict]:
    """Propagation scaling study over system sizes.

    Defaults per n: layers = ceil(ln n), p = ln(n)/n, tau2 just under 1/4,
    and (when `policy` is None) a sine cutoff of ceil(log2 n).  For
    n <= `exact_check_max_n` the statevector error is recorded.  Returns one
    CSV-ready row dict per (n, trial).
    """
    from . import statevector as sv
    from .circuits import TAU2_CONSTANT

    rows = []
    for n in ns:
        pol = policy if policy is not None else TruncationPolicy(sine_cutoff=sine_cutoff_default(n))
        policy_id = _policy_id(pol)
        L = layers if layers is not None else max(1, math.ceil(math.log(n)))
        pn = p if p is not None else math.log(n) / n
        t2 = tau2 if tau2 is not None else TAU2_CONSTANT
        obs = PauliSum(n, [PauliTerm(1.0, PauliString.single(n, observable_qubit, "Z"))])
        for trial in range(trials):
            spec = GenerativeSpec(n, L, pn, t2, derive_seed(seed, n, trial, 0))
            circ = build_generative(spec)
            if trainable_depth > 0:
                train = build_trainable(n, trainable_depth,
                                        derive_seed(seed, n, trial, 1), "uniform")
                circ = concatenate(circ, train)
            report = propagate(circ, obs, pol)
            err = None
            if n <= exact_check_max_n:
                exact = sv.expectation(sv.run(circ), obs)
                err = abs(report.expectation - exact)
            rows.append({
                "n": n, "trial": trial, "policy_id": policy_id,
                "expectation": report.expectation,
                "error_vs_exact": err,
                "peak_terms": report.peak_terms,
                "final_terms": report.final_terms,
                "dropped_mass": report.dropped_mass,
                "wall_time_s": report.wall_time,
            })
    return rows


def _policy_id(policy: TruncationPolicy) -> str:
    if policy.exact:
        return "exact"
    parts = []
    if policy.sine_cutoff is not None:
        parts.append(f"sine{policy.sine_cutoff}")
    if policy.coeff_threshold is not None:
        parts.append(f"coeff{policy.coeff_threshold:g}")
    if policy.weight_cutoff is not None:
        parts.append(f"w{policy.weight_cutoff}")
    if policy.max_terms is not None:
        parts.append(f"max{policy.max_terms}")
    if policy.dynamic_schedule:
        parts.append("dyn")
    return "-".join(parts)
