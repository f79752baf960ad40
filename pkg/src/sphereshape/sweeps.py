"""Analytic sweeps: shaping-gain curves and finite-length rate-loss curves.

The shaping-gain curve measures, at a fixed transmission rate, how much SNR
an s-bit-shaped input saves against uniform signaling. The shaped side uses
the bit-metric decoding rate; the uniform reference is the coded-modulation
(symbol-metric) SNR requirement at the same rate.

Rate-loss curves compare finite-length shapers at a common amplitude rate
(default 8/3 bit/amp on 16-ASK): sphere shaping on the full or reduced
alphabet, and a constant-composition matcher with the analytically
quantized Maxwell-Boltzmann composition.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .air import (InputSpec, gap_to_capacity, snr_db_for_capacity,
                  snr_for_symbol_mi, uniform_input)
from .constellation import InvalidParameterError, brgc_labels, build_alphabet
from .distributions import (ccdm_analytics, fit_entropy, mb_composition,
                            mb_pmf, partial_mb_pmf, pmf_stats, rate_loss)
from .ess import build_trellis, find_emax, induced_stats


def uniform_gap(m: int, target_rate: float) -> float:
    """SNR gap of uniform 2^m-ASK (symbol metric) to capacity at a rate."""
    spec = uniform_input(m)
    return snr_for_symbol_mi(spec, target_rate) - snr_db_for_capacity(target_rate)


def shaping_gain_curve(m: int, shaped_bits: int, target_rate: float,
                       entropy_grid) -> list[tuple[float, float]]:
    """(H(X), gain over uniform in dB) along an input-entropy grid.

    Each entropy fixes a partial Maxwell-Boltzmann amplitude distribution
    with 2^(m-1-shaped_bits) equiprobable amplitudes per group; the gain is
    the uniform coded-modulation gap minus the shaped bit-metric gap.
    """
    base = uniform_gap(m, target_rate)
    amps = tuple(range(1, 2**m, 2))
    labeling = brgc_labels(m - 1)
    group = 2 ** (m - 1 - shaped_bits)
    out = []
    for h_x in entropy_grid:
        lam = fit_entropy(h_x - 1.0, amps, group)
        spec = InputSpec(partial_mb_pmf(lam, amps, group), labeling)
        out.append((float(h_x), base - gap_to_capacity(spec, target_rate)))
    return out


def best_shaping_gain(m: int, shaped_bits: int, target_rate: float,
                      entropy_grid) -> tuple[float, float]:
    """(argmax H(X), max gain) of the shaping-gain curve over the grid."""
    curve = shaping_gain_curve(m, shaped_bits, target_rate, entropy_grid)
    return max(curve, key=lambda p: p[1])


def _paired_energy(e_reduced: float, u: int) -> float:
    """Average energy after u rounds of amplitude pairing a -> {2a-1, 2a+1}.

    Each round maps energy e to 4e + 1 for every sequence, so the average
    transforms the same way; u rounds give 4^u e + (4^u - 1)/3.
    """
    f = 4**u
    return f * e_reduced + (f - 1) / 3.0


def sphere_rate_loss(n: int, u: int, m: int = 4,
                     amp_rate: Fraction = Fraction(8, 3)) -> float:
    """Finite-length rate loss of (partial) sphere shaping at one blocklength.

    The shaper runs on the 2^(m-u)-ASK amplitude alphabet with input length
    round(n * (amp_rate - u)) bits; u uniform bit-levels restore the full
    alphabet. The loss is measured against the energy-matched MB reference
    on the full alphabet.
    """
    if not 0 <= u <= m - 2:
        raise InvalidParameterError(f"need 0 <= u <= m-2, got u={u}")
    k = round(n * float(amp_rate - u))
    reduced = build_alphabet(m - u).amplitudes
    e_max = find_emax(n, reduced, k)
    trellis = build_trellis(n, reduced, e_max)
    _, e_red, _ = induced_stats(trellis)
    e_full = _paired_energy(e_red, u)
    full = build_alphabet(m).amplitudes
    return rate_loss(k / n + u, e_full, full)


def sphere_rate_loss_asymptote(u: int, m: int = 4,
                               amp_rate: Fraction = Fraction(8, 3)) -> float:
    """Blocklength limit of the u-level partial sphere-shaping rate loss.

    As n grows the shaper reaches the maximum-entropy (MB) distribution on
    the reduced alphabet at its own rate, so the residual loss is purely
    the pairing penalty; it vanishes for u = 0.
    """
    if not 0 <= u <= m - 2:
        raise InvalidParameterError(f"need 0 <= u <= m-2, got u={u}")
    reduced = build_alphabet(m - u).amplitudes
    lam = fit_entropy(float(amp_rate - u), reduced)
    _, e_red = pmf_stats(mb_pmf(lam, reduced))
    full = build_alphabet(m).amplitudes
    return rate_loss(float(amp_rate), _paired_energy(e_red, u), full)


def ccdm_composition_for_rate(n: int, m: int = 4,
                              amp_rate: Fraction = Fraction(8, 3)):
    """Lowest-energy MB-quantized composition reaching a matcher rate.

    Walks up the MB entropy until the largest-remainder quantization of
    the distribution admits a multinomial input rate of at least amp_rate;
    bisection narrows the entropy to 1e-9 first, then a short upward scan
    absorbs the non-monotonicity introduced by quantization.
    """
    amps = build_alphabet(m).amplitudes
    target = float(amp_rate)

    def rate_at(h):
        comp = mb_composition(mb_pmf(fit_entropy(h, amps), amps), n)
        return ccdm_analytics(comp)[0], comp

    hi = math.log2(len(amps)) - 1e-12
    if rate_at(hi)[0] < target:
        raise InvalidParameterError(
            f"rate {target} unreachable with n={n} on {len(amps)} amplitudes")
    lo = target
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if rate_at(mid)[0] >= target:
            hi = mid
        else:
            lo = mid
    h = hi
    while True:
        rate, comp = rate_at(h)
        if rate >= target:
            return comp
        h += 1e-4


def ccdm_rate_loss(n: int, m: int = 4,
                   amp_rate: Fraction = Fraction(8, 3)) -> float:
    """Finite-length rate loss of a constant-composition matcher.

    The composition is the lowest-energy MB quantization whose exact
    multinomial input rate reaches amp_rate; the loss compares that rate
    against the energy-matched MB entropy.
    """
    amps = build_alphabet(m).amplitudes
    comp = ccdm_composition_for_rate(n, m, amp_rate)
    ccdm_rate, energy = ccdm_analytics(comp)
    return rate_loss(ccdm_rate, energy, amps)


def rate_loss_crossover(u: int, n_lo: int, n_hi: int, m: int = 4,
                        amp_rate: Fraction = Fraction(8, 3),
                        coarse_step: int = 12) -> int:
    """Smallest blocklength where the CCDM loss drops below the u-level
    partial sphere-shaping loss.

    Scans multiples of 3 (exact amplitude rates for the default 8/3) with a
    coarse pass, then refines to step 3.
    """
    def diff(n):
        return ccdm_rate_loss(n, m, amp_rate) - sphere_rate_loss(n, u, m, amp_rate)

    lo = 3 * math.ceil(n_lo / 3)
    prev = lo
    if diff(prev) <= 0:
        return prev
    n = prev + coarse_step
    while n <= n_hi:
        if diff(n) <= 0:
            for fine in range(prev + 3, n + 1, 3):
                if diff(fine) <= 0:
                    return fine
        prev = n
        n += coarse_step
    raise InvalidParameterError(
        f"no crossover for u={u} in [{n_lo}, {n_hi}]")
