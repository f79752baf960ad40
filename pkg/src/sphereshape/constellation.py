"""ASK alphabets, Gray amplitude labeling and energy sets.

A 2^m-ASK constellation {±1, ±3, ..., ±(2^m − 1)} factorizes into a sign
in {−1, +1} and an amplitude in {1, 3, ..., 2^m − 1}. Amplitudes carry a
binary reflected Gray code (BRGC) label of m−1 bits; the sign is a separate
bit-level (bit 0 maps to +1, bit 1 to −1, fixed project-wide).
"""

from __future__ import annotations

from dataclasses import dataclass, field


class InvalidParameterError(ValueError):
    """A structural parameter is outside its allowed range."""


@dataclass(frozen=True)
class AskAlphabet:
    """Amplitude half of a 2^m-ASK constellation."""

    m: int
    amplitudes: tuple[int, ...]
    signs: tuple[int, int] = (-1, 1)

    @property
    def size(self) -> int:
        return len(self.amplitudes)

    def energies(self) -> "EnergySet":
        return EnergySet(tuple(a * a for a in self.amplitudes))


def build_alphabet(m: int) -> AskAlphabet:
    """Return the 2^m-ASK alphabet (amplitudes {1, 3, ..., 2^m − 1})."""
    if m < 2:
        raise InvalidParameterError(f"need m >= 2, got {m}")
    return AskAlphabet(m=m, amplitudes=tuple(range(1, 2**m, 2)))


@dataclass(frozen=True)
class AmplitudeLabeling:
    """Bijection between odd amplitudes and fixed-length bit tuples.

    ``table[amplitude]`` is the label with its most significant bit first.
    """

    num_bits: int
    table: dict[int, tuple[int, ...]]
    _inverse: dict[tuple[int, ...], int] = field(init=False, repr=False)

    def __post_init__(self):
        inv = {bits: a for a, bits in self.table.items()}
        if len(inv) != len(self.table):
            raise InvalidParameterError("labeling is not a bijection")
        object.__setattr__(self, "_inverse", inv)

    def label_of(self, amplitude: int) -> tuple[int, ...]:
        return self.table[amplitude]

    def amplitude_of(self, bits: tuple[int, ...]) -> int:
        return self._inverse[tuple(bits)]


def brgc_labels(num_bits: int) -> AmplitudeLabeling:
    """BRGC labeling of the 2^num_bits smallest odd amplitudes.

    The i-th amplitude (in increasing order) gets the Gray code i ^ (i >> 1),
    most significant bit first. For num_bits = 3 this is the standard 16-ASK
    amplitude labeling (1 -> 000, 3 -> 001, ..., 15 -> 100).
    """
    if num_bits < 1:
        raise InvalidParameterError(f"need num_bits >= 1, got {num_bits}")
    table = {}
    for i in range(2**num_bits):
        gray = i ^ (i >> 1)
        bits = tuple((gray >> (num_bits - 1 - j)) & 1 for j in range(num_bits))
        table[2 * i + 1] = bits
    return AmplitudeLabeling(num_bits=num_bits, table=table)


@dataclass(frozen=True)
class EnergySet:
    """Strictly increasing amplitude (or amplitude-group) energies."""

    energies: tuple[int, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.energies, self.energies[1:])):
            raise InvalidParameterError("energies must be strictly increasing")


def pair_energy_set(base: EnergySet, level: int) -> EnergySet:
    """Average energies of consecutive amplitude pairs.

    Pairing the amplitudes of an alphabet with energies e maps each energy to
    4e + 1: the l-th pair {4l−3, 4l−1} has mean energy ((4l−3)² + (4l−1)²)/2
    = 4(2l−1)² + 1. Level 0 is the identity.
    """
    if level == 0:
        return base
    if level == 1:
        return EnergySet(tuple(4 * e + 1 for e in base.energies))
    raise InvalidParameterError(f"unsupported pairing level {level}")
