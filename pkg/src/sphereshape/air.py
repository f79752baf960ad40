"""Achievable information rates for ASK over the AWGN channel.

Bit-metric decoding rate [H(X) - sum_i H(B_i|Y)]^+ for a signed ASK input
with shaped amplitudes and equiprobable signs, evaluated by Gauss-Hermite
quadrature over the conditional output densities, plus the gap-to-capacity
sweep over the input entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constellation import AmplitudeLabeling, brgc_labels
from .distributions import AmplitudePmf, InfeasibleError, fit_entropy, partial_mb_pmf

_GH_NODES = 128
_GH_T, _GH_W = np.polynomial.hermite.hermgauss(_GH_NODES)
_GH_W = _GH_W / math.sqrt(math.pi)


class NumericalError(ArithmeticError):
    """Quadrature produced a non-finite value."""


@dataclass(frozen=True)
class InputSpec:
    """Signed ASK input: P_X(x) = P_A(|x|)/2, sign bit first in the label."""

    pmf: AmplitudePmf
    labeling: AmplitudeLabeling

    def constellation(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(points, P_X, bit labels) over the full signed alphabet.

        Labels are (B_1 ... B_m) rows per point; sign bit 0 means +1.
        """
        amps = np.asarray(self.pmf.amplitudes, dtype=float)
        points = np.concatenate([amps, -amps])
        px = np.concatenate([self.pmf.probs, self.pmf.probs]) / 2.0
        amp_bits = np.array([self.labeling.label_of(a) for a in self.pmf.amplitudes])
        labels = np.vstack([
            np.hstack([np.zeros((len(amps), 1), dtype=int), amp_bits]),
            np.hstack([np.ones((len(amps), 1), dtype=int), amp_bits]),
        ])
        return points, px, labels

    def entropy(self) -> float:
        p = self.pmf.probs[self.pmf.probs > 0]
        return 1.0 + float(-(p * np.log2(p)).sum())

    def avg_energy(self) -> float:
        return float((self.pmf.probs * np.asarray(self.pmf.amplitudes) ** 2).sum())


def awgn_capacity(snr_db: float) -> float:
    """C = 1/2 log2(1 + SNR) in bits per real dimension."""
    return 0.5 * math.log2(1.0 + 10.0 ** (snr_db / 10.0))


def snr_db_for_capacity(rate: float) -> float:
    """SNR in dB at which the AWGN capacity equals rate."""
    return 10.0 * math.log10(2.0 ** (2.0 * rate) - 1.0)


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = a.max(axis=axis, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def _conditional_bit_entropies(points, px, labels, sigma, y) -> np.ndarray:
    """H(B_i|Y=y) for every y; returns (len(y), m)."""
    logpx = np.log(np.where(px > 0, px, 1e-300))
    logw = logpx - (y[:, None] - points[None, :]) ** 2 / (2.0 * sigma**2)
    total = _logsumexp(logw, axis=1)
    m = labels.shape[1]
    h = np.empty((len(y), m))
    for i in range(m):
        mask0 = labels[:, i] == 0
        l0 = _logsumexp(logw[:, mask0], axis=1)
        l1 = _logsumexp(logw[:, ~mask0], axis=1)
        p0 = np.exp(l0 - total)
        p1 = np.exp(l1 - total)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = -(p0 * np.log2(np.where(p0 > 0, p0, 1.0))
                      + p1 * np.log2(np.where(p1 > 0, p1, 1.0)))
        h[:, i] = terms
    return h


def bmd_rate(spec: InputSpec, snr_db: float) -> float:
    """Bit-metric decoding rate [H(X) - sum_i H(B_i|Y)]^+ at the given SNR.

    The Gaussian output average is taken per conditional: E_Y[f] =
    sum_x P(x) E_Z[f(x + sigma Z)] with 128-node Gauss-Hermite quadrature.
    """
    points, px, labels = spec.constellation()
    sigma = math.sqrt(spec.avg_energy() / 10.0 ** (snr_db / 10.0))
    y = (points[:, None] + math.sqrt(2.0) * sigma * _GH_T[None, :]).ravel()
    h = _conditional_bit_entropies(points, px, labels, sigma, y)
    h = h.reshape(len(points), _GH_NODES, labels.shape[1])
    cond = np.einsum("q,xqi,x->i", _GH_W, h, px)
    if not np.all(np.isfinite(cond)):
        raise NumericalError("non-finite conditional entropy")
    return max(0.0, spec.entropy() - float(cond.sum()))


def bmd_rate_monte_carlo(spec: InputSpec, snr_db: float, num_samples: int,
                         seed: int = 0) -> float:
    """Independent sampling estimate of the BMD rate.

    H(B_i|Y) is estimated as the cross entropy E[-log2 P(B_i = b|Y)] at the
    transmitted bit b, averaged over sampled (X, Y) pairs.
    """
    points, px, labels = spec.constellation()
    sigma = math.sqrt(spec.avg_energy() / 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    logpx = np.log(np.where(px > 0, px, 1e-300))
    total_ce = np.zeros(labels.shape[1])
    done = 0
    while done < num_samples:
        chunk = min(200_000, num_samples - done)
        xi = rng.choice(len(points), size=chunk, p=px)
        y = points[xi] + sigma * rng.standard_normal(chunk)
        logw = logpx - (y[:, None] - points[None, :]) ** 2 / (2.0 * sigma**2)
        total = _logsumexp(logw, axis=1)
        for i in range(labels.shape[1]):
            mask = labels[:, i] == 0
            lb = np.where(labels[xi, i] == 0,
                          _logsumexp(logw[:, mask], axis=1),
                          _logsumexp(logw[:, ~mask], axis=1))
            total_ce[i] += ((total - lb) / math.log(2)).sum()
        done += chunk
    return max(0.0, spec.entropy() - float(total_ce.sum()) / num_samples)


def symbol_mi(spec: InputSpec, snr_db: float) -> float:
    """Symbol-metric mutual information I(X;Y) = H(X) - H(X|Y)."""
    points, px, _ = spec.constellation()
    sigma = math.sqrt(spec.avg_energy() / 10.0 ** (snr_db / 10.0))
    y = (points[:, None] + math.sqrt(2.0) * sigma * _GH_T[None, :]).ravel()
    logpx = np.log(np.where(px > 0, px, 1e-300))
    logw = logpx - (y[:, None] - points[None, :]) ** 2 / (2.0 * sigma**2)
    logpost = logw - _logsumexp(logw, axis=1)[:, None]
    post = np.exp(logpost)
    h_xy = -(post * logpost / math.log(2)).sum(axis=1)
    h_xy = h_xy.reshape(len(points), _GH_NODES)
    cond = float(np.einsum("q,xq,x->", _GH_W, h_xy, px))
    if not math.isfinite(cond):
        raise NumericalError("non-finite conditional entropy")
    return max(0.0, spec.entropy() - cond)


def snr_for_symbol_mi(spec: InputSpec, target_rate: float,
                      lo_db: float = -20.0, hi_db: float = 60.0) -> float:
    """SNR in dB where the symbol-metric MI reaches target_rate."""
    if target_rate >= spec.entropy():
        raise InfeasibleError(f"rate {target_rate} not below H(X)={spec.entropy()}")
    if symbol_mi(spec, hi_db) < target_rate:
        raise InfeasibleError(f"rate {target_rate} unreachable below {hi_db} dB")
    lo, hi = lo_db, hi_db
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        r = symbol_mi(spec, mid)
        if abs(r - target_rate) < 1e-6:
            return mid
        if r < target_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def uniform_input(m: int) -> InputSpec:
    """Uniform-amplitude 2^m-ASK input with the BRGC labeling."""
    amps = tuple(range(1, 2**m, 2))
    pmf = AmplitudePmf(amps, np.full(len(amps), 1.0 / len(amps)))
    return InputSpec(pmf, brgc_labels(m - 1))


def snr_for_rate(spec: InputSpec, target_rate: float,
                 lo_db: float = -20.0, hi_db: float = 60.0) -> float:
    """SNR in dB where the BMD rate reaches target_rate (bisection)."""
    if target_rate >= spec.entropy():
        raise InfeasibleError(f"rate {target_rate} not below H(X)={spec.entropy()}")
    if bmd_rate(spec, hi_db) < target_rate:
        raise InfeasibleError(f"rate {target_rate} unreachable below {hi_db} dB")
    lo, hi = lo_db, hi_db
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        r = bmd_rate(spec, mid)
        if abs(r - target_rate) < 1e-6:
            return mid
        if r < target_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gap_to_capacity(spec: InputSpec, target_rate: float) -> float:
    """SNR penalty of this input against the Gaussian at the same rate."""
    return snr_for_rate(spec, target_rate) - snr_db_for_capacity(target_rate)


def gap_sweep(m: int, shaped_bits: int, target_rate: float,
              entropy_grid) -> list[tuple[float, float]]:
    """(H(X), delta-SNR) curve for s-bit shaped 2^m-ASK.

    Each grid entropy fixes a partial MB amplitude distribution with group
    size 2^(m-1-s); H(X) = H(A) + 1 for equiprobable signs.
    """
    amps = tuple(range(1, 2**m, 2))
    labeling = brgc_labels(m - 1)
    group = 2 ** (m - 1 - shaped_bits)
    out = []
    for h_x in entropy_grid:
        lam = fit_entropy(h_x - 1.0, amps, group)
        pmf = partial_mb_pmf(lam, amps, group)
        spec = InputSpec(pmf, labeling)
        try:
            delta = gap_to_capacity(spec, target_rate)
        except InfeasibleError:
            delta = math.inf
        out.append((float(h_x), delta))
    return out
