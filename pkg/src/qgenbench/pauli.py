"""Exact Pauli-string algebra on bitmask-encoded operators.

Strings are encoded as a pair of n-bit masks (x, z): bit q of ``x`` set means
an X component on qubit q, bit q of ``z`` a Z component.  (x,z) per qubit maps
to a letter as (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z.  Phases are never stored on
strings; they live in term coefficients.

Rotation gates follow the generator convention R(g) = exp(-i*g*G) with G a
Pauli, so conjugating an anticommuting string P gives
cos(2g)*P + sin(2g)*(iGP).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Tuple

# |coefficient| below this is treated as exact zero and dropped on merge.
COEFF_EPS = 1e-15

_LETTERS = "IXYZ"
_LETTER_TO_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

# Single-qubit product table: (a_idx, b_idx) -> (phase exponent k with
# phase = i**k, result letter index).  Letter index: I=0, X=1, Y=2, Z=3.
_MUL_TABLE = {}
for _a in range(4):
    for _b in range(4):
        if _a == 0:
            _MUL_TABLE[(_a, _b)] = (0, _b)
        elif _b == 0:
            _MUL_TABLE[(_a, _b)] = (0, _a)
        elif _a == _b:
            _MUL_TABLE[(_a, _b)] = (0, 0)
        else:
            _c = 6 - _a - _b  # the remaining non-identity letter
            # cyclic X->Y->Z->X picks up +i, anti-cyclic -i
            _cyclic = (_a, _b) in ((1, 2), (2, 3), (3, 1))
            _MUL_TABLE[(_a, _b)] = (1 if _cyclic else 3, _c)


class PauliDimensionError(ValueError):
    """Raised when operands act on different qubit counts."""


class UnsupportedGeneratorError(ValueError):
    """Raised when a rotation generator is not a valid Pauli string."""


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli string without phase."""

    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("mask bits outside the n-qubit register")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse a letter string, qubit 0 leftmost (e.g. ``"XZIIY"``)."""
        x = z = 0
        for q, ch in enumerate(label):
            try:
                xb, zb = _LETTER_TO_XZ[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r}") from None
            x |= xb << q
            z |= zb << q
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n: int, q: int, letter: str) -> "PauliString":
        xb, zb = _LETTER_TO_XZ[letter]
        return cls(n, xb << q, zb << q)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    def letter_index(self, q: int) -> int:
        xb = (self.x >> q) & 1
        zb = (self.z >> q) & 1
        return [0, 1, 3, 2][2 * zb + xb]  # (x,z): 00=I 10=X 01=Z 11=Y

    def label(self) -> str:
        return "".join(_LETTERS[self.letter_index(q)] for q in range(self.n))

    @property
    def support(self) -> int:
        return self.x | self.z

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def is_z_type(self) -> bool:
        """True iff every letter is I or Z."""
        return self.x == 0

    def __str__(self) -> str:
        return self.label()


def _check_same_n(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise PauliDimensionError(f"qubit counts differ: {p.n} vs {q.n}")


def multiply(p: PauliString, q: PauliString) -> Tuple[complex, PauliString]:
    """Product PQ as ``(phase, string)`` with phase in {1, -1, 1j, -1j}."""
    _check_same_n(p, q)
    k = 0
    both = (p.x | p.z) & (q.x | q.z)
    m = both
    while m:
        b = m & -m
        qi = b.bit_length() - 1
        k += _MUL_TABLE[(p.letter_index(qi), q.letter_index(qi))][0]
        m ^= b
    return 1j ** (k % 4), PauliString(p.n, p.x ^ q.x, p.z ^ q.z)


def commutes(p: PauliString, q: PauliString) -> bool:
    """True iff PQ = QP (symplectic inner product is even)."""
    _check_same_n(p, q)
    return ((p.x & q.z).bit_count() + (p.z & q.x).bit_count()) % 2 == 0


def conjugate_cz(p: PauliString, edge: Tuple[int, int]) -> Tuple[int, PauliString]:
    """CZ_{ab} P CZ_{ab} as ``(sign, string)``; Z-type strings are fixed."""
    a, b = edge
    if a == b:
        raise ValueError("CZ needs two distinct qubits")
    xa = (p.x >> a) & 1
    xb = (p.x >> b) & 1
    za = (p.z >> a) & 1
    zb = (p.z >> b) & 1
    z = p.z ^ (xb << a) ^ (xa << b)
    sign = -1 if (xa & xb & (za ^ zb)) else 1
    return sign, PauliString(p.n, p.x, z)


def z_substitute(p: PauliString) -> PauliString:
    """Replace every non-identity letter with Z; support is unchanged."""
    return PauliString(p.n, 0, p.x | p.z)


@dataclass(frozen=True)
class PauliTerm:
    """A real-coefficient term with its accumulated sine-factor count."""

    coefficient: float
    string: PauliString
    sine_count: int = 0

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")
        if self.sine_count < 0:
            raise ValueError("sine_count must be nonnegative")


class PauliSum:
    """A merged map from PauliString to PauliTerm (no duplicates, no zeros)."""

    def __init__(self, n: int, terms: Iterable[PauliTerm] = ()):
        self.n = n
        self.terms: Dict[PauliString, PauliTerm] = {}
        for t in terms:
            self.add(t)

    @classmethod
    def from_label(cls, coefficient: float, label: str) -> "PauliSum":
        s = PauliString.from_label(label)
        return cls(s.n, [PauliTerm(coefficient, s)])

    def add(self, term: PauliTerm) -> None:
        if term.string.n != self.n:
            raise PauliDimensionError("term qubit count differs from sum")
        prev = self.terms.get(term.string)
        if prev is None:
            c, sc = term.coefficient, term.sine_count
        else:
            c = prev.coefficient + term.coefficient
            sc = min(prev.sine_count, term.sine_count)
        if abs(c) < COEFF_EPS:
            self.terms.pop(term.string, None)
        else:
            self.terms[term.string] = PauliTerm(c, term.string, sc)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self.terms.values())

    def l2_norm_sq(self) -> float:
        return sum(t.coefficient**2 for t in self)

    def to_json_obj(self) -> list:
        return [
            {"coeff": t.coefficient, "pauli": t.string.label(), "sines": t.sine_count}
            for t in sorted(self, key=lambda t: (t.string.x, t.string.z))
        ]

    @classmethod
    def from_json_obj(cls, obj: list, n: int | None = None) -> "PauliSum":
        if not obj and n is None:
            raise ValueError("qubit count needed for an empty sum")
        if n is None:
            n = len(obj[0]["pauli"])
        s = cls(n)
        for d in obj:
            s.add(PauliTerm(d["coeff"], PauliString.from_label(d["pauli"]), d.get("sines", 0)))
        return s


def conjugate_rotation(s: PauliSum, generator: PauliString, angle: float) -> PauliSum:
    """Heisenberg image exp(igG) S exp(-igG) of a Pauli sum.

    Generators are Pauli strings of weight 1 or 2 (single-qubit rotations and
    the XX/YY/ZZ bricks).  Commuting terms pass through; an anticommuting term
    P splits into cos(2g) P + sin(2g) (iGP), incrementing sine_count on the
    sine branch.
    """
    if generator.weight() not in (1, 2):
        raise UnsupportedGeneratorError("generator must be a weight-1 or weight-2 Pauli")
    if generator.n != s.n:
        raise PauliDimensionError("generator qubit count differs from sum")
    c2, s2 = math.cos(2 * angle), math.sin(2 * angle)
    out = PauliSum(s.n)
    for t in s:
        if commutes(generator, t.string):
            out.add(t)
            continue
        out.add(PauliTerm(t.coefficient * c2, t.string, t.sine_count))
        phase, gp = multiply(generator, t.string)
        sign = (1j * phase).real  # real +-1 because {G, P} = 0
        out.add(PauliTerm(t.coefficient * s2 * sign, gp, t.sine_count + 1))
    return out


def conjugate_cz_sum(s: PauliSum, edge: Tuple[int, int]) -> PauliSum:
    out = PauliSum(s.n)
    for t in s:
        sign, p = conjugate_cz(t.string, edge)
        out.add(PauliTerm(sign * t.coefficient, p, t.sine_count))
    return out


def expectation_zero_state(s: PauliSum) -> float:
    """<0...0| S |0...0>: sum of coefficients of Z-type strings."""
    return sum(t.coefficient for t in s if t.string.is_z_type())
