"""Partial enumerative sphere shaping.

An enumerative shaper runs on the reduced 2^(s+1)-ASK amplitude alphabet
(2^s amplitudes). Its outputs are relabeled with the s-bit BRGC and become
the top s amplitude bit-levels of the full 2^m-ASK constellation; u = m-1-s
uniform data bit-levels are appended as the lowest BRGC levels. With u = 0
this degenerates to plain ESS.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .constellation import (AmplitudeLabeling, InvalidParameterError,
                            brgc_labels, build_alphabet)
from .distributions import AmplitudePmf
from .ess import (EssTrellis, InvalidIndexError, InvalidSequenceError,
                  build_bounded_trellis, build_trellis, deshape,
                  induced_stats, shape)


@dataclass(frozen=True)
class PessConfig:
    """Shaping geometry of a (possibly partial) enumerative shaper.

    s shaped plus u uniform amplitude bit-levels with s + u = m - 1; the
    shaper alphabet is the amplitude half of 2^(s+1)-ASK.
    """

    m: int
    s: int
    n: int
    e_max: int
    n_m: int | None = None  # bounded-precision mantissa bits, None = exact
    n_p: int | None = None
    trellis: EssTrellis = field(init=False, repr=False, compare=False)
    shaper_labeling: AmplitudeLabeling = field(init=False, repr=False, compare=False)
    full_labeling: AmplitudeLabeling = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.s < 1 or self.s > self.m - 1:
            raise InvalidParameterError(f"need 1 <= s <= m-1, got s={self.s}")
        shaper_amps = build_alphabet(self.s + 1).amplitudes
        if self.n_m is not None:
            trellis = build_bounded_trellis(self.n, shaper_amps, self.e_max,
                                            self.n_m, self.n_p)
        else:
            trellis = build_trellis(self.n, shaper_amps, self.e_max)
        object.__setattr__(self, "trellis", trellis)
        object.__setattr__(self, "shaper_labeling", brgc_labels(self.s))
        object.__setattr__(self, "full_labeling", brgc_labels(self.m - 1))

    @property
    def u(self) -> int:
        return self.m - 1 - self.s

    @property
    def k(self) -> int:
        """Shaper input length in bits."""
        return self.trellis.num_input_bits

    @property
    def full_amplitudes(self) -> tuple[int, ...]:
        return build_alphabet(self.m).amplitudes


def pess_shape(message: int, uniform_levels, config: PessConfig) -> tuple[int, ...]:
    """Map a message index plus u uniform bit-level sequences to amplitudes.

    The shaped s-bit sub-label of each symbol is the BRGC label of the
    shaper output; the uniform bits fill the last u label positions; the
    combined (m-1)-bit label selects the full-alphabet amplitude.
    """
    if message < 0 or message >= 2**config.k:
        raise InvalidIndexError(f"message {message} outside [0, 2^{config.k})")
    levels = [np.asarray(lv).astype(int) for lv in uniform_levels]
    if len(levels) != config.u or any(lv.shape != (config.n,) for lv in levels):
        raise InvalidParameterError(
            f"expected {config.u} uniform level sequences of length {config.n}")
    shaped = shape(message, config.trellis)
    out = []
    for j, a_red in enumerate(shaped):
        bits = config.shaper_labeling.label_of(a_red) + tuple(
            int(lv[j]) for lv in levels)
        out.append(config.full_labeling.amplitude_of(bits))
    return tuple(out)


def pess_deshape(seq, config: PessConfig) -> tuple[int, list[np.ndarray]]:
    """Invert pess_shape: recover (message index, uniform level sequences)."""
    if len(seq) != config.n:
        raise InvalidSequenceError(f"expected {config.n} amplitudes")
    reduced = []
    levels = [np.zeros(config.n, dtype=np.uint8) for _ in range(config.u)]
    for j, a in enumerate(seq):
        try:
            bits = config.full_labeling.label_of(int(a))
        except KeyError:
            raise InvalidSequenceError(f"amplitude {a} not in alphabet") from None
        reduced.append(config.shaper_labeling.amplitude_of(bits[: config.s]))
        for i in range(config.u):
            levels[i][j] = bits[config.s + i]
    message = deshape(reduced, config.trellis)
    return message, levels


@lru_cache(maxsize=32)
def pess_induced_pmf(config: PessConfig) -> AmplitudePmf:
    """Operational amplitude distribution of the P-ESS block.

    The shaper marginal (over all sphere sequences) is spread uniformly over
    the 2^u full amplitudes sharing each shaped sub-label.
    """
    if config.trellis.is_bounded:
        exact = build_trellis(config.n, config.trellis.amplitudes, config.e_max)
    else:
        exact = config.trellis
    _, _, shaper_pmf = induced_stats(exact)
    spread = 2**config.u
    probs = np.empty(2 ** (config.m - 1))
    full = config.full_amplitudes
    for a_red, p in zip(shaper_pmf.amplitudes, shaper_pmf.probs):
        sub = config.shaper_labeling.label_of(a_red)
        for a, bits in config.full_labeling.table.items():
            if bits[: config.s] == sub:
                probs[full.index(a)] = p / spread
    return AmplitudePmf(full, probs)
