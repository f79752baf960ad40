"""Maxwell-Boltzmann amplitude distributions and shaping analytics.

Covers the exact MB family p(a) ∝ exp(−λa²), its "partial" variant defined
over consecutive amplitude groups (equiprobable inside a group, MB across
group mean energies), entropy/energy fitting by bisection, shaping gain,
finite-length rate loss and constant-composition (CCDM) rate/energy
analytics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constellation import InvalidParameterError


class InfeasibleError(ValueError):
    """Requested entropy/energy target is outside the achievable range."""


_LAMBDA_TOL = 1e-12
_TARGET_TOL = 1e-11


@dataclass(frozen=True)
class AmplitudePmf:
    """Probability vector over an ordered amplitude list."""

    amplitudes: tuple[int, ...]
    probs: np.ndarray
    lam: float | None = None  # MB parameter when the PMF came from a fit

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(self.amplitudes),):
            raise InvalidParameterError("probs/amplitudes length mismatch")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InvalidParameterError("probs must be a distribution")
        object.__setattr__(self, "probs", p)


@dataclass(frozen=True)
class Composition:
    """Occurrence counts #(a) of each amplitude in an N-sequence."""

    amplitudes: tuple[int, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != len(self.amplitudes):
            raise InvalidParameterError("counts/amplitudes length mismatch")
        if any(c < 0 for c in self.counts):
            raise InvalidParameterError("counts must be nonnegative")

    @property
    def n(self) -> int:
        return sum(self.counts)


def _group_energies(amplitudes: Sequence[int], group_size: int) -> np.ndarray:
    amps = np.asarray(amplitudes, dtype=float)
    if group_size < 1 or len(amps) % group_size != 0:
        raise InvalidParameterError(
            f"group size {group_size} does not divide alphabet of {len(amps)}"
        )
    return (amps**2).reshape(-1, group_size).mean(axis=1)


def partial_mb_pmf(lam: float, amplitudes: Sequence[int], group_size: int) -> AmplitudePmf:
    """MB distribution over consecutive amplitude groups.

    Amplitudes inside a group are equiprobable; the group probability is
    proportional to exp(−λ · mean group energy). group_size = 1 recovers the
    plain MB distribution.
    """
    if lam < 0:
        raise InvalidParameterError("lambda must be nonnegative")
    ge = _group_energies(amplitudes, group_size)
    w = np.exp(-lam * (ge - ge.min()))  # shift for stability; K absorbs it
    group_p = w / w.sum()
    probs = np.repeat(group_p / group_size, group_size)
    return AmplitudePmf(tuple(amplitudes), probs, lam=lam)


def mb_pmf(lam: float, amplitudes: Sequence[int]) -> AmplitudePmf:
    """Maxwell-Boltzmann PMF p(a) = K(λ) exp(−λa²)."""
    return partial_mb_pmf(lam, amplitudes, group_size=1)


def pmf_stats(pmf: AmplitudePmf) -> tuple[float, float]:
    """(entropy in bits, average energy E[A²]) of an amplitude PMF."""
    p = pmf.probs
    nz = p > 0
    entropy = float(-(p[nz] * np.log2(p[nz])).sum())
    energy = float((p * np.asarray(pmf.amplitudes, dtype=float) ** 2).sum())
    return entropy, energy


def _bisect_lambda(value, target, lo_value, amplitudes, group_size) -> float:
    """Find λ with value(λ) == target; value must be decreasing in λ.

    lo_value is value(0), the maximum of the range.
    """
    if target > lo_value + _TARGET_TOL:
        raise InfeasibleError(f"target {target} above achievable {lo_value}")
    if abs(target - lo_value) <= _TARGET_TOL:
        return 0.0
    lo, hi = 0.0, 1.0
    while value(hi) > target:
        hi *= 2.0
        if hi > 1e9:
            raise InfeasibleError(f"target {target} below achievable range")
    while hi - lo > _LAMBDA_TOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if value(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fit_entropy(target_h: float, amplitudes: Sequence[int], group_size: int = 1) -> float:
    """λ such that the (partial) MB distribution has entropy target_h bits."""
    n_groups = len(amplitudes) // max(group_size, 1)
    h_min = math.log2(n_groups) if group_size > 1 else 0.0
    if group_size > 1 and target_h < h_min - _TARGET_TOL:
        raise InfeasibleError(f"entropy {target_h} below group floor {h_min}")
    if group_size == 1 and target_h < 0:
        raise InfeasibleError("entropy must be nonnegative")

    def entropy_at(lam):
        return pmf_stats(partial_mb_pmf(lam, amplitudes, group_size))[0]

    return _bisect_lambda(entropy_at, target_h, math.log2(len(amplitudes)),
                          amplitudes, group_size)


def fit_energy(target_e: float, amplitudes: Sequence[int], group_size: int = 1) -> float:
    """λ such that the (partial) MB distribution has E[A²] == target_e."""
    ge = _group_energies(amplitudes, group_size)
    if target_e < ge.min() - _TARGET_TOL:
        raise InfeasibleError(f"energy {target_e} below minimum {ge.min()}")

    def energy_at(lam):
        return pmf_stats(partial_mb_pmf(lam, amplitudes, group_size))[1]

    uniform_e = float(ge.mean())
    return _bisect_lambda(energy_at, target_e, uniform_e, amplitudes, group_size)


def shaping_gain(rate: float, avg_energy: float) -> float:
    """Shaping gain in dB over uniform signaling at the same rate.

    G_s = 10 log10((2^(2(rate+1)) − 1) / (3 · avg_energy)); the numerator is
    the average energy of a uniform ASK constellation carrying rate+1 bits
    per symbol (amplitude rate plus the sign bit).
    """
    if rate <= 0 or avg_energy <= 0:
        raise InvalidParameterError("rate and avg_energy must be positive")
    return 10.0 * math.log10((2.0 ** (2.0 * (rate + 1.0)) - 1.0) / (3.0 * avg_energy))


def rate_loss(shaping_rate: float, induced_energy: float,
              amplitudes: Sequence[int]) -> float:
    """Entropy shortfall H(A_MB) − R_s against the energy-matched MB fit."""
    lam = fit_energy(induced_energy, amplitudes)
    h_mb, _ = pmf_stats(mb_pmf(lam, amplitudes))
    return h_mb - shaping_rate


def ccdm_analytics(comp: Composition) -> tuple[float, float]:
    """(input rate bit/amp, average symbol energy) of a CCDM composition.

    The rate is ⌊log₂ N!/∏#(a)!⌋ / N with exact integer arithmetic.
    """
    n = comp.n
    if n == 0:
        raise InvalidParameterError("empty composition")
    multinomial = math.factorial(n)
    for c in comp.counts:
        multinomial //= math.factorial(c)
    rate = (multinomial.bit_length() - 1) / n
    energy = sum(c * a * a for c, a in zip(comp.counts, comp.amplitudes)) / n
    return rate, energy


def mb_composition(pmf: AmplitudePmf, n: int) -> Composition:
    """Quantize a PMF to an integer composition summing to n.

    Largest-remainder rounding; ties go to lower-energy amplitudes.
    """
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    scaled = pmf.probs * n
    counts = np.floor(scaled).astype(int)
    short = n - int(counts.sum())
    if short > 0:
        remainders = scaled - counts
        # stable sort keeps lower-energy amplitudes first among ties
        order = np.argsort(-remainders, kind="stable")
        counts[order[:short]] += 1
    return Composition(pmf.amplitudes, tuple(int(c) for c in counts))
