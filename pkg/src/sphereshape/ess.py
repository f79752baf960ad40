"""Bounded-energy enumerative sphere shaping.

A sphere code is the set of length-N amplitude sequences with total energy
at most e_max. Path counts T_n^e (number of valid completions from
dimension n at accumulated energy e) are held on a dense (N+1) x L grid:
column n covers the energies {n, n+8, ..., n+8(L-1)} because every odd
square is 1 mod 8, so level index i = (e - n) / 8. Shaping/deshaping is
lexicographic unranking/ranking over this grid with exact big integers, or
with round-down bounded-precision counts (mantissa/exponent storage) that
stay decodable because every stored count never exceeds the sum of its
already-rounded children.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constellation import InvalidParameterError
from .distributions import AmplitudePmf, InfeasibleError


class InvalidIndexError(ValueError):
    """Shaping index outside [0, |sphere|)."""


class InvalidSequenceError(ValueError):
    """Sequence not representable in the trellis."""


class PrecisionError(ValueError):
    """Bounded-precision parameters cannot represent the trellis."""


def _check_amplitudes(amplitudes: Sequence[int]) -> tuple[int, ...]:
    amps = tuple(amplitudes)
    if not amps or any(a < 1 or a % 2 == 0 for a in amps):
        raise InvalidParameterError("amplitudes must be positive odd integers")
    if any(b <= a for a, b in zip(amps, amps[1:])):
        raise InvalidParameterError("amplitudes must be strictly increasing")
    return amps


def num_energy_levels(n: int, e_max: int) -> int:
    """Number of final energy levels L = floor((e_max - N)/8) + 1."""
    return (e_max - n) // 8 + 1


@dataclass(frozen=True)
class EssTrellis:
    """Path-count grid of a sphere code.

    counts[n][i] = T_n^{n+8i}, exact arbitrary-size integers. Bounded-
    precision instances keep the same layout with rounded-down counts and
    carry (n_m, n_p); see build_bounded_trellis.
    """

    n_dims: int
    amplitudes: tuple[int, ...]
    e_max: int
    counts: tuple[tuple[int, ...], ...]
    n_m: int | None = None
    n_p: int | None = None

    @property
    def num_levels(self) -> int:
        return len(self.counts[0])

    @property
    def sphere_size(self) -> int:
        return self.counts[0][0]

    @property
    def num_input_bits(self) -> int:
        """k = floor(log2 |sphere|), the shaper input length in bits."""
        return self.sphere_size.bit_length() - 1

    @property
    def shaping_rate(self) -> float:
        import math
        return math.log2(self.sphere_size) / self.n_dims

    @property
    def is_bounded(self) -> bool:
        return self.n_m is not None

    def _offsets(self) -> tuple[int, ...]:
        return tuple((a * a - 1) // 8 for a in self.amplitudes)


def _build_counts(n: int, amps: tuple[int, ...], L: int,
                  round_count=None) -> tuple[tuple[int, ...], ...]:
    offsets = [(a * a - 1) // 8 for a in amps]
    rows = [None] * (n + 1)
    rows[n] = tuple([1] * L)
    nxt = rows[n]
    for col in range(n - 1, -1, -1):
        row = []
        for i in range(L):
            total = 0
            for off in offsets:
                j = i + off
                if j < L:
                    total += nxt[j]
            if round_count is not None and total:
                total = round_count(total)
            row.append(total)
        nxt = tuple(row)
        rows[col] = nxt
    return tuple(rows)


def build_trellis(n: int, amplitudes: Sequence[int], e_max: int) -> EssTrellis:
    """Exact path-count trellis: T_N^e = 1, T_n^e = sum_a T_{n+1}^{e+a^2}."""
    amps = _check_amplitudes(amplitudes)
    if e_max < n * amps[0] ** 2:
        raise InfeasibleError(f"e_max={e_max} below minimum sequence energy")
    L = num_energy_levels(n, e_max)
    return EssTrellis(n, amps, e_max, _build_counts(n, amps, L))


def _round_down(value: int, n_m: int) -> int:
    """Keep the top n_m significant bits, truncating the rest."""
    shift = value.bit_length() - n_m
    if shift <= 0:
        return value
    return (value >> shift) << shift


def mantissa_exponent(value: int, n_m: int) -> tuple[int, int]:
    """(mantissa, exponent) with value = mantissa * 2^exponent."""
    shift = max(0, value.bit_length() - n_m)
    return value >> shift, shift


def build_bounded_trellis(n: int, amplitudes: Sequence[int], e_max: int,
                          n_m: int, n_p: int) -> EssTrellis:
    """Round-down trellis with counts stored on n_m + n_p bits.

    Each column sum over already-rounded children is truncated to its top
    n_m bits, so every stored count is <= the exact count and <= the sum of
    its stored children, which keeps shaping/deshaping mutually inverse.
    """
    amps = _check_amplitudes(amplitudes)
    if n_m < 2:
        raise InvalidParameterError("need n_m >= 2")
    if e_max < n * amps[0] ** 2:
        raise InfeasibleError(f"e_max={e_max} below minimum sequence energy")
    L = num_energy_levels(n, e_max)
    counts = _build_counts(n, amps, L, round_count=lambda v: _round_down(v, n_m))
    max_exp = max(0, counts[0][0].bit_length() - n_m)
    if max_exp >= 2**n_p:
        raise PrecisionError(
            f"exponent {max_exp} needs more than n_p={n_p} bits")
    return EssTrellis(n, amps, e_max, counts, n_m=n_m, n_p=n_p)


def shape(index: int, trellis: EssTrellis) -> tuple[int, ...]:
    """Amplitude sequence with the given lexicographic rank.

    Amplitudes are ordered 1 < 3 < 5 < ...; at each position candidate
    amplitudes are scanned in increasing order, subtracting child counts
    until the residual index falls inside a child's range.
    """
    if index < 0 or index >= trellis.sphere_size:
        raise InvalidIndexError(f"index {index} outside sphere of size "
                                f"{trellis.sphere_size}")
    offsets = trellis._offsets()
    L = trellis.num_levels
    seq = []
    level = 0
    for col in range(trellis.n_dims):
        nxt = trellis.counts[col + 1]
        for a, off in zip(trellis.amplitudes, offsets):
            j = level + off
            child = nxt[j] if j < L else 0
            if index < child:
                seq.append(a)
                level = j
                break
            index -= child
        else:  # counts are consistent by construction
            raise AssertionError("index not consumed; trellis inconsistent")
    return tuple(seq)


def deshape(seq: Sequence[int], trellis: EssTrellis) -> int:
    """Lexicographic rank of a sequence; inverse of shape."""
    if len(seq) != trellis.n_dims:
        raise InvalidSequenceError(f"expected {trellis.n_dims} amplitudes")
    energy = sum(a * a for a in seq)
    if energy > trellis.e_max:
        raise InvalidSequenceError(f"sequence energy {energy} exceeds "
                                   f"e_max={trellis.e_max}")
    offsets = dict(zip(trellis.amplitudes, trellis._offsets()))
    L = trellis.num_levels
    index = 0
    level = 0
    for col, a in enumerate(seq):
        if a not in offsets:
            raise InvalidSequenceError(f"amplitude {a} not in alphabet")
        nxt = trellis.counts[col + 1]
        for b in trellis.amplitudes:
            if b == a:
                break
            j = level + offsets[b]
            if j < L:
                index += nxt[j]
        level += offsets[a]
    return index


def _float_log2_sphere(n: int, amps: tuple[int, ...], e_max: int) -> float:
    """Fast float64 estimate of log2 |sphere| (vectorized column recursion)."""
    L = num_energy_levels(n, e_max)
    offsets = [(a * a - 1) // 8 for a in amps]
    scale = 0.0
    row = np.ones(L)
    for _ in range(n):
        new = np.zeros(L)
        for off in offsets:
            if off < L:
                new[: L - off] += row[off:]
        top = new.max()
        if top > 1e250:  # renormalize to dodge overflow
            new /= top
            scale += np.log2(top)
        row = new
    return float(np.log2(row[0])) + scale if row[0] > 0 else -np.inf


def _exact_k(n: int, amps: tuple[int, ...], e_max: int) -> int:
    """floor(log2 T_0^0) with exact integers, rolling two columns."""
    L = num_energy_levels(n, e_max)
    offsets = [(a * a - 1) // 8 for a in amps]
    row = [1] * L
    for _ in range(n):
        row = [sum(row[i + off] for off in offsets if i + off < L)
               for i in range(L)]
    return row[0].bit_length() - 1


def find_emax(n: int, amplitudes: Sequence[int], k: int) -> int:
    """Smallest e_max on the grid {N, N+8, ...} with floor(log2 |sphere|) >= k.

    A float64 trellis brackets the answer (log2 |sphere| is nondecreasing in
    e_max); exact big-integer counts confirm the boundary.
    """
    amps = _check_amplitudes(amplitudes)
    import math
    if k > n * math.log2(len(amps)):
        raise InfeasibleError(f"k={k} exceeds {n} symbols over "
                              f"{len(amps)} amplitudes")
    g_max = (n * amps[-1] ** 2 - n) // 8

    def log2_at(g):
        return _float_log2_sphere(n, amps, n + 8 * g)

    lo, hi = 0, g_max
    while lo < hi:
        mid = (lo + hi) // 2
        if log2_at(mid) >= k:
            hi = mid
        else:
            lo = mid + 1
    # confirm exactly; the float estimate can be off near the boundary
    g = lo
    while g > 0 and _exact_k(n, amps, n + 8 * (g - 1)) >= k:
        g -= 1
    while _exact_k(n, amps, n + 8 * g) < k:
        g += 1
        if g > g_max:
            raise InfeasibleError(f"k={k} unattainable")
    return n + 8 * g


def induced_stats(trellis: EssTrellis) -> tuple[dict[int, int], float, AmplitudePmf]:
    """(energy histogram, average symbol energy, amplitude marginal).

    Statistics are over all |sphere| sequences, computed from forward path
    counts; no enumeration.
    """
    if trellis.is_bounded:
        raise InvalidParameterError("induced_stats needs an exact trellis")
    n, L = trellis.n_dims, trellis.num_levels
    offsets = trellis._offsets()
    fwd = [[0] * L for _ in range(n + 1)]
    fwd[0][0] = 1
    occurrences = [0] * len(trellis.amplitudes)
    for col in range(n):
        nxt_counts = trellis.counts[col + 1]
        row = fwd[col]
        nxt = fwd[col + 1]
        for i in range(L):
            f = row[i]
            if not f:
                continue
            for ai, off in enumerate(offsets):
                j = i + off
                if j < L:
                    nxt[j] += f
                    occurrences[ai] += f * nxt_counts[j]
    hist = {n + 8 * i: fwd[n][i] for i in range(L) if fwd[n][i]}
    total = trellis.sphere_size
    denom = total * n
    avg_energy = float(sum(e * c for e, c in hist.items()) / denom)
    # big-int ratios: scale to 18 digits before the float conversion
    probs = np.array([float(o * 10**18 // denom) / 1e18 for o in occurrences])
    probs /= probs.sum()
    pmf = AmplitudePmf(trellis.amplitudes, probs)
    return hist, avg_energy, pmf


@dataclass(frozen=True)
class ComplexityReport:
    exact_storage_bits: int
    bounded_storage_bits: int
    exact_bit_ops_per_dim: int
    bounded_bit_ops_per_dim: int

    @property
    def bounded_storage_kb(self) -> float:
        return self.bounded_storage_bits / 8000.0

    @property
    def exact_storage_kb(self) -> float:
        return self.exact_storage_bits / 8000.0


def complexity_report(num_levels: int, n: int, n_m: int, n_p: int,
                      alphabet_size: int, shaping_rate: float) -> ComplexityReport:
    """Storage and indexing cost of exact and bounded trellis forms.

    Exact form: L(N+1)ceil(N R_s) bits and (|A|-1)ceil(N R_s) bit
    operations per dimension; bounded form replaces ceil(N R_s) with
    n_m + n_p.
    """
    import math
    if min(num_levels, n, n_m, n_p, alphabet_size) <= 0 or shaping_rate <= 0:
        raise InvalidParameterError("all complexity parameters must be positive")
    width_exact = math.ceil(n * shaping_rate)
    width_bounded = n_m + n_p
    return ComplexityReport(
        exact_storage_bits=num_levels * (n + 1) * width_exact,
        bounded_storage_bits=num_levels * (n + 1) * width_bounded,
        exact_bit_ops_per_dim=(alphabet_size - 1) * width_exact,
        bounded_bit_ops_per_dim=(alphabet_size - 1) * width_bounded,
    )


_MAGIC = b"ESST"
_VERSION = 1


def save_trellis(trellis: EssTrellis, path) -> None:
    """Versioned binary dump: header then row-major variable-length counts."""
    with open(path, "wb") as fh:
        mode = 1 if trellis.is_bounded else 0
        fh.write(_MAGIC)
        fh.write(struct.pack("<BBHHIQH", _VERSION, mode,
                             trellis.n_m or 0, trellis.n_p or 0,
                             trellis.n_dims, trellis.e_max,
                             len(trellis.amplitudes)))
        fh.write(struct.pack(f"<{len(trellis.amplitudes)}H", *trellis.amplitudes))
        for row in trellis.counts:
            for value in row:
                blob = value.to_bytes((value.bit_length() + 7) // 8 or 1, "little")
                fh.write(struct.pack("<I", len(blob)))
                fh.write(blob)


def load_trellis(path) -> EssTrellis:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise InvalidParameterError("not a trellis file")
        version, mode, n_m, n_p, n, e_max, n_amp = struct.unpack(
            "<BBHHIQH", fh.read(struct.calcsize("<BBHHIQH")))
        if version != _VERSION:
            raise InvalidParameterError(f"unsupported trellis version {version}")
        amps = struct.unpack(f"<{n_amp}H", fh.read(2 * n_amp))
        L = num_energy_levels(n, e_max)
        rows = []
        for _ in range(n + 1):
            row = []
            for _ in range(L):
                (size,) = struct.unpack("<I", fh.read(4))
                row.append(int.from_bytes(fh.read(size), "little"))
            rows.append(tuple(row))
    return EssTrellis(n, tuple(amps), int(e_max), tuple(rows),
                      n_m=n_m or None, n_p=n_p or None)
