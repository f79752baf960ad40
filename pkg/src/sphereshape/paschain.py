"""Probabilistic amplitude shaping transceiver and FER harness.

Transmitter: data -> (partial) enumerative shaping -> BRGC amplitude labels
-> systematic LDPC encoding -> sign assignment (parity plus, for code rates
above (m-1)/m, a gamma*N-bit slice of extra data) -> ASK modulation.
Receiver: prior-aware LLR demapping -> belief propagation -> label
extraction -> deshaping. The Monte Carlo harness derives one counter-based
RNG stream per frame so results do not depend on batching or worker count.

Encoder input ordering: symbol-major amplitude label bits (B2..Bm per
symbol), then the gamma*N extra data bits. Sign vector: extra data bits
first, then parity; sign bit 0 maps to +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .constellation import InvalidParameterError, brgc_labels
from .distributions import AmplitudePmf
from .ess import InvalidSequenceError
from .fec import QcLdpcCode, decode_batch, encode, load_code
from .pess import PessConfig, pess_deshape, pess_induced_pmf, pess_shape


@dataclass(frozen=True)
class PasConfig:
    """One end-to-end PAS configuration (or the uniform baseline)."""

    name: str
    m: int
    n_symbols: int
    code_rate: Fraction
    pess: PessConfig | None  # None: uniform signaling, no shaper

    def __post_init__(self):
        if self.pess is not None:
            if self.pess.m != self.m or self.pess.n != self.n_symbols:
                raise InvalidParameterError("shaper geometry disagrees with chain")
        gamma_n = self.code_rate * self.m * self.n_symbols \
            - (self.m - 1) * self.n_symbols
        if gamma_n < 0 or gamma_n.denominator != 1:
            raise InvalidParameterError(
                f"code rate {self.code_rate} incompatible with m={self.m}, "
                f"N={self.n_symbols}")

    @property
    def gamma(self) -> Fraction:
        return self.code_rate * self.m - (self.m - 1)

    @property
    def num_label_bits(self) -> int:
        return (self.m - 1) * self.n_symbols

    @property
    def num_extra_bits(self) -> int:
        return int(self.gamma * self.n_symbols)

    @property
    def shaper_bits(self) -> int:
        return self.pess.k if self.pess is not None else 0

    @property
    def uniform_level_bits(self) -> int:
        return self.pess.u * self.n_symbols if self.pess is not None else 0

    @property
    def num_data_bits(self) -> int:
        if self.pess is None:
            return self.num_label_bits + self.num_extra_bits
        return self.shaper_bits + self.uniform_level_bits + self.num_extra_bits

    @property
    def target_rate(self) -> float:
        return self.num_data_bits / self.n_symbols

    def priors(self) -> AmplitudePmf:
        if self.pess is None:
            amps = tuple(range(1, 2**self.m, 2))
            return AmplitudePmf(amps, np.full(len(amps), 1.0 / len(amps)))
        return pess_induced_pmf(self.pess)

    def avg_symbol_energy(self) -> float:
        p = self.priors()
        return float((p.probs * np.asarray(p.amplitudes, dtype=float) ** 2).sum())


STANDARD_CONFIGS = {
    "uniform": dict(s=None, e_max=None, code_rate=Fraction(3, 4)),
    "ess": dict(s=3, e_max=6514, code_rate=Fraction(5, 6)),
    "pess-u1": dict(s=2, e_max=1626, code_rate=Fraction(5, 6)),
    "pess-u2": dict(s=1, e_max=402, code_rate=Fraction(5, 6)),
}

_CONFIG_CACHE: dict[str, PasConfig] = {}


def make_config(name: str, m: int = 4, n_symbols: int = 162) -> PasConfig:
    """Build one of the standard 16-ASK, N=162, 3 bit/1-D configurations."""
    if name not in STANDARD_CONFIGS:
        raise InvalidParameterError(f"unknown configuration '{name}'")
    key = f"{name}:{m}:{n_symbols}"
    if key not in _CONFIG_CACHE:
        params = STANDARD_CONFIGS[name]
        pess = None
        if params["s"] is not None:
            pess = PessConfig(m=m, s=params["s"], n=n_symbols, e_max=params["e_max"])
        _CONFIG_CACHE[key] = PasConfig(name=name, m=m, n_symbols=n_symbols,
                                       code_rate=params["code_rate"], pess=pess)
    return _CONFIG_CACHE[key]


def _bits_to_index(bits: np.ndarray) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def _index_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - j)) & 1 for j in range(width)],
                    dtype=np.uint8)


def transmit(data: np.ndarray, config: PasConfig, code: QcLdpcCode) -> np.ndarray:
    """Map one data frame to a channel input sequence x^N."""
    data = np.asarray(data, dtype=np.uint8)
    if data.shape != (config.num_data_bits,):
        raise InvalidParameterError(
            f"expected {config.num_data_bits} data bits, got {data.shape}")
    n_sym = config.n_symbols
    labeling = brgc_labels(config.m - 1)

    if config.pess is None:
        label_bits = data[: config.num_label_bits]
        extra = data[config.num_label_bits:]
        amplitudes = np.array([
            labeling.amplitude_of(tuple(label_bits[3 * j: 3 * j + config.m - 1]))
            for j in range(n_sym)])
    else:
        k = config.shaper_bits
        u = config.pess.u
        message = _bits_to_index(data[:k])
        levels = [data[k + i * n_sym: k + (i + 1) * n_sym] for i in range(u)]
        extra = data[k + u * n_sym:]
        amplitudes = np.array(pess_shape(message, levels, config.pess))
        label_bits = np.concatenate(
            [labeling.label_of(int(a)) for a in amplitudes]).astype(np.uint8)

    info = np.concatenate([label_bits, extra])
    codeword = encode(info, code)
    sign_bits = codeword[config.num_label_bits:]
    signs = 1.0 - 2.0 * sign_bits[:n_sym].astype(float)
    return signs * amplitudes


def awgn(x: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """y = x + z with z ~ N(0, sigma^2) i.i.d."""
    if sigma <= 0:
        raise InvalidParameterError("sigma must be positive")
    return x + sigma * rng.standard_normal(x.shape)


def demap(y: np.ndarray, priors: AmplitudePmf, sigma: float, m: int) -> np.ndarray:
    """Prior-aware bitwise LLRs in codeword order, batched over rows.

    For each bit-level, LLR = log sum_{x: b=0} P_X(x) phi(y-x) - log(same
    for b=1) with P_X(x) = priors(|x|)/2; positive favors bit 0. Sign LLRs
    of symbol j land at position (m-1)*N + j, amplitude label bits
    symbol-major in front.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    batch, n_sym = y.shape
    amps = np.asarray(priors.amplitudes, dtype=float)
    points = np.concatenate([amps, -amps])
    logp = np.log(np.concatenate([priors.probs, priors.probs]) / 2.0 + 1e-300)
    labeling = brgc_labels(m - 1)
    amp_labels = np.array([labeling.label_of(int(a)) for a in priors.amplitudes])
    labels = np.vstack([np.hstack([np.zeros((len(amps), 1), dtype=int), amp_labels]),
                        np.hstack([np.ones((len(amps), 1), dtype=int), amp_labels])])

    logw = logp[None, None, :] - (y[:, :, None] - points[None, None, :]) ** 2 \
        / (2.0 * sigma**2)
    peak = logw.max(axis=2, keepdims=True)

    def lse(mask):
        return (peak[:, :, 0]
                + np.log(np.exp(logw[:, :, mask] - peak).sum(axis=2) + 1e-300))

    llrs = np.empty((batch, m * n_sym))
    for i in range(m):
        level = lse(labels[:, i] == 0) - lse(labels[:, i] == 1)
        if i == 0:
            llrs[:, (m - 1) * n_sym:] = level
        else:
            llrs[:, i - 1:(m - 1) * n_sym:m - 1] = level
    return llrs


def recover_data(hard_codeword: np.ndarray, config: PasConfig):
    """Rebuild the data frame from decoded codeword bits.

    Returns (data bits, valid flag); an out-of-sphere decoded sequence
    clears the flag instead of raising.
    """
    n_sym = config.n_symbols
    labeling = brgc_labels(config.m - 1)
    label_bits = hard_codeword[: config.num_label_bits]
    extra = hard_codeword[config.num_label_bits:
                          config.num_label_bits + config.num_extra_bits]
    if config.pess is None:
        return np.concatenate([label_bits, extra]).astype(np.uint8), True
    amplitudes = [labeling.amplitude_of(tuple(label_bits[3 * j: 3 * j + config.m - 1]))
                  for j in range(n_sym)]
    try:
        message, levels = pess_deshape(amplitudes, config.pess)
    except InvalidSequenceError:
        return np.zeros(config.num_data_bits, dtype=np.uint8), False
    if message >= 2**config.shaper_bits:
        return np.zeros(config.num_data_bits, dtype=np.uint8), False
    bits = [_index_to_bits(message, config.shaper_bits)] + levels + [extra]
    return np.concatenate(bits).astype(np.uint8), True


def receive(y: np.ndarray, config: PasConfig, code: QcLdpcCode, sigma: float):
    """Demap, decode and deshape one received frame."""
    llrs = demap(y, config.priors(), sigma, config.m)
    hard, conv, _ = decode_batch(llrs, code)
    data, valid = recover_data(hard[0], config)
    return data, bool(conv[0]) and valid


@dataclass(frozen=True)
class FerResult:
    snr_db: float
    frames: int
    frame_errors: int
    bit_errors: int

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else math.nan

    @property
    def ci95(self) -> tuple[float, float]:
        if not self.frames:
            return (math.nan, math.nan)
        f = self.fer
        half = 1.96 * math.sqrt(max(f * (1.0 - f), 0.0) / self.frames)
        return (max(0.0, f - half), min(1.0, f + half))


def _frame_rng(seed: int, snr_db: float, frame_idx: int) -> np.random.Generator:
    # counter-based stream: identical frames regardless of batch split
    point_key = int(round(snr_db * 1000)) & 0xFFFFFF
    return np.random.Generator(
        np.random.Philox(key=[seed, (point_key << 40) | frame_idx]))


def simulate_point(config: PasConfig, code: QcLdpcCode, snr_db: float,
                   seed: int = 0, min_errors: int = 100,
                   max_frames: int = 1_000_000, batch: int = 256) -> FerResult:
    """Monte Carlo FER at one SNR; stops at min_errors or max_frames."""
    sigma = math.sqrt(config.avg_symbol_energy() / 10.0 ** (snr_db / 10.0))
    priors = config.priors()
    frames = errors = bit_errors = 0
    while errors < min_errors and frames < max_frames:
        size = min(batch, max_frames - frames)
        tx_data = np.empty((size, config.num_data_bits), dtype=np.uint8)
        noise = np.empty((size, config.n_symbols))
        for b in range(size):
            rng = _frame_rng(seed, snr_db, frames + b)
            tx_data[b] = rng.integers(0, 2, config.num_data_bits)
            noise[b] = rng.standard_normal(config.n_symbols)
        x = np.stack([transmit(tx_data[b], config, code) for b in range(size)])
        y = x + sigma * noise
        llrs = demap(y, priors, sigma, config.m)
        hard, conv, _ = decode_batch(llrs, code)
        for b in range(size):
            data, valid = recover_data(hard[b], config)
            wrong = int(np.count_nonzero(data != tx_data[b])) if valid \
                else config.num_data_bits
            if wrong or not valid:
                errors += 1
                bit_errors += wrong
        frames += size
    return FerResult(snr_db=snr_db, frames=frames, frame_errors=errors,
                     bit_errors=bit_errors)


def simulate(config: PasConfig, snr_list, seed: int = 0, min_errors: int = 100,
             max_frames: int = 1_000_000, batch: int = 256) -> list[FerResult]:
    """FER curve over a list of SNRs; deterministic given the master seed."""
    code = load_code(config.code_rate)
    return [simulate_point(config, code, float(s), seed=seed,
                           min_errors=min_errors, max_frames=max_frames,
                           batch=batch)
            for s in snr_list]


def snr_at_fer(config: PasConfig, target_fer: float, start_db: float,
               seed: int = 0, step_db: float = 0.25, min_errors: int = 100,
               max_frames: int = 30_000) -> float:
    """SNR (dB) where the FER curve crosses target_fer.

    Walks a step_db grid from start_db until the target is bracketed, then
    interpolates log10(FER) linearly between the bracketing points.
    """
    code = load_code(config.code_rate)

    def fer_at(snr):
        r = simulate_point(config, code, snr, seed=seed, min_errors=min_errors,
                           max_frames=max_frames)
        return max(r.fer, 0.5 / max_frames)  # guard exact zero for the log

    grid = {}
    snr = round(start_db / step_db) * step_db
    grid[snr] = fer_at(snr)
    while grid[snr] < target_fer:  # too good: walk down
        snr = round(snr - step_db, 6)
        grid[snr] = fer_at(snr)
    while grid[snr] >= target_fer:  # walk up until below target
        snr = round(snr + step_db, 6)
        if snr not in grid:
            grid[snr] = fer_at(snr)
    lo = round(snr - step_db, 6)
    f_lo, f_hi = grid[lo], grid[snr]
    t = (math.log10(f_lo) - math.log10(target_fer)) \
        / (math.log10(f_lo) - math.log10(f_hi))
    return lo + t * step_db
