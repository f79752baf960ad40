"""Shared helpers: brute-force oracles the library is checked against."""

from itertools import product


def enumerate_sphere(n, amplitudes, e_max):
    """All length-n amplitude sequences with energy <= e_max, lexicographic.

    Independent oracle for the trellis: plain enumeration, no shared code.
    """
    out = [seq for seq in product(sorted(amplitudes), repeat=n)
           if sum(a * a for a in seq) <= e_max]
    out.sort()
    return out


def bit_level_marginals(pmf, labeling):
    """P(B_i = 0) for every amplitude bit-level, computed exactly from a PMF."""
    num_bits = labeling.num_bits
    marg = [0.0] * num_bits
    for a, p in zip(pmf.amplitudes, pmf.probs):
        bits = labeling.label_of(a)
        for i in range(num_bits):
            if bits[i] == 0:
                marg[i] += p
    return marg


def bit_pair_joint(pmf, labeling, i, j):
    """Joint P(B_i = b, B_j = c) table computed exactly from a PMF."""
    joint = {(b, c): 0.0 for b in (0, 1) for c in (0, 1)}
    for a, p in zip(pmf.amplitudes, pmf.probs):
        bits = labeling.label_of(a)
        joint[(bits[i], bits[j])] += p
    return joint
