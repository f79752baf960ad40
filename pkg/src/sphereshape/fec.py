"""Quasi-cyclic LDPC codes from IEEE 802.11 (648-bit block length, Z=27).

Base matrices live as plain-text data files (one row per block-row,
space-separated circulant shifts, -1 for a zero block) and are verified
against pinned checksums at load time. Encoding is systematic; parity is
obtained from a precomputed GF(2) inverse of the parity part of H.
Decoding is sum-product belief propagation with early termination on a
zero syndrome.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .constellation import InvalidParameterError

Z = 27
N_BITS = 648

_RATE_FILES = {
    Fraction(1, 2): ("wifi_n648_r12.txt",
                     "84166b364497aeb694ba67594eb8960e7c5a6cac7ed5f143faac736977639b5d"),
    Fraction(2, 3): ("wifi_n648_r23.txt",
                     "6cc42b3f122931395efbd2a66583603647c5b27c4ce4b443f2b41f998291b448"),
    Fraction(3, 4): ("wifi_n648_r34.txt",
                     "464cc9765771e992967ab1b08178c3dd11b26634bdd98ad2e1e5b240b2b9ba41"),
    Fraction(5, 6): ("wifi_n648_r56.txt",
                     "69e43177344e78a7531f0dbb921228a6bfb96f423fd7989243e5b28a83678839"),
}

LLR_CLIP = 30.0
DEFAULT_MAX_ITER = 50


def _gf2_inverse(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    a = np.concatenate([mat.astype(np.uint8) & 1, np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        pivot = col + int(np.argmax(a[col:, col]))
        if a[pivot, col] == 0:
            raise InvalidParameterError("parity part of H is singular over GF(2)")
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
        rows = np.nonzero(a[:, col])[0]
        rows = rows[rows != col]
        a[rows] ^= a[col]
    return a[:, n:]


@dataclass(frozen=True)
class QcLdpcCode:
    """Expanded 802.11 QC-LDPC code with a systematic encoder."""

    rate: Fraction
    base: np.ndarray
    h: np.ndarray  # (n-k, n) dense uint8
    _parity_solver: np.ndarray = field(repr=False)  # (n-k, k): p = S @ info

    @property
    def n(self) -> int:
        return self.h.shape[1]

    @property
    def k(self) -> int:
        return self.n - self.h.shape[0]

    def syndrome(self, words: np.ndarray) -> np.ndarray:
        """H c^T mod 2, batched over leading axes."""
        return (words.astype(np.uint8) @ self.h.T) & 1


def _expand(base: np.ndarray) -> np.ndarray:
    rows, cols = base.shape
    h = np.zeros((rows * Z, cols * Z), dtype=np.uint8)
    eye = np.eye(Z, dtype=np.uint8)
    for r in range(rows):
        for c in range(cols):
            shift = base[r, c]
            if shift >= 0:
                h[r * Z:(r + 1) * Z, c * Z:(c + 1) * Z] = np.roll(eye, shift % Z, axis=1)
    return h


def load_code(rate, n: int = N_BITS) -> QcLdpcCode:
    """Load one of the 648-bit 802.11 codes (rates 1/2, 2/3, 3/4, 5/6)."""
    if n != N_BITS:
        raise InvalidParameterError(f"only n={N_BITS} is supported")
    rate = Fraction(rate).limit_denominator(6)
    if rate not in _RATE_FILES:
        raise InvalidParameterError(f"unsupported code rate {rate}")
    fname, digest = _RATE_FILES[rate]
    raw = resources.files("sphereshape.data").joinpath(fname).read_bytes()
    if hashlib.sha256(raw).hexdigest() != digest:
        raise InvalidParameterError(f"base matrix file {fname} failed its checksum")
    base = np.array([[int(v) for v in line.split()]
                     for line in raw.decode().strip().splitlines()])
    h = _expand(base)
    k = n - h.shape[0]
    solver = _gf2_inverse(h[:, k:]) @ h[:, :k] & 1
    return QcLdpcCode(rate=rate, base=base, h=h, _parity_solver=solver.astype(np.uint8))


def encode(info_bits: np.ndarray, code: QcLdpcCode) -> np.ndarray:
    """Systematic codeword [info, parity]; supports a batch in the rows."""
    info = np.atleast_2d(np.asarray(info_bits, dtype=np.uint8))
    if info.shape[1] != code.k:
        raise InvalidParameterError(f"expected {code.k} info bits, got {info.shape[1]}")
    parity = (info @ code._parity_solver.T) & 1
    out = np.concatenate([info, parity], axis=1)
    return out[0] if np.asarray(info_bits).ndim == 1 else out


class _BpGraph:
    """Edge layout shared by all decodes of one code."""

    def __init__(self, code: QcLdpcCode):
        rows, cols = np.nonzero(code.h)
        order = np.lexsort((cols, rows))  # row-major edges
        self.row = rows[order]
        self.col = cols[order]
        self.num_edges = len(self.row)
        self.row_starts = np.searchsorted(self.row, np.arange(code.h.shape[0]))
        col_order = np.lexsort((self.row, self.col))
        self.to_col_order = col_order
        self.from_col_order = np.argsort(col_order)
        self.col_sorted_col = self.col[col_order]
        self.col_starts = np.searchsorted(self.col_sorted_col, np.arange(code.h.shape[1]))


_GRAPHS: dict[int, _BpGraph] = {}


def _graph(code: QcLdpcCode) -> _BpGraph:
    key = id(code)
    if key not in _GRAPHS:
        _GRAPHS[key] = _BpGraph(code)
    return _GRAPHS[key]


def decode_batch(llrs: np.ndarray, code: QcLdpcCode,
                 max_iter: int = DEFAULT_MAX_ITER):
    """Sum-product decoding of a batch of LLR rows.

    Positive LLR favors bit 0. Returns (hard bits, converged flags,
    iterations used per frame); non-convergence is flagged, never raised.
    """
    llrs = np.clip(np.atleast_2d(np.asarray(llrs, dtype=float)), -LLR_CLIP, LLR_CLIP)
    if not np.all(np.isfinite(llrs)):
        raise InvalidParameterError("LLRs must be finite")
    g = _graph(code)
    batch, n = llrs.shape
    hard = (llrs < 0).astype(np.uint8)
    converged = ~np.any(code.syndrome(hard), axis=1)
    iters = np.zeros(batch, dtype=int)
    active = np.nonzero(~converged)[0]
    msg = llrs[active][:, g.col]  # variable-to-check, row-major edge order
    post_active = llrs[active].copy()

    for it in range(1, max_iter + 1):
        if len(active) == 0:
            break
        t = np.tanh(0.5 * np.clip(msg, -LLR_CLIP, LLR_CLIP))
        sgn = np.where(t < 0, -1.0, 1.0)
        mag = np.log(np.abs(t) + 1e-300)
        row_sum = np.add.reduceat(mag, g.row_starts, axis=1)
        row_sgn = np.multiply.reduceat(sgn, g.row_starts, axis=1)
        ext = row_sgn[:, g.row] * sgn * np.exp(row_sum[:, g.row] - mag)
        c2v = 2.0 * np.arctanh(np.clip(ext, -1 + 1e-15, 1 - 1e-15))

        c2v_cs = c2v[:, g.to_col_order]
        col_sum = np.add.reduceat(c2v_cs, g.col_starts, axis=1)
        post = llrs[active] + col_sum
        msg = np.clip((post[:, g.col_sorted_col] - c2v_cs)[:, g.from_col_order],
                      -LLR_CLIP, LLR_CLIP)
        post_active = post

        hard_act = (post < 0).astype(np.uint8)
        ok = ~np.any(code.syndrome(hard_act), axis=1)
        hard[active] = hard_act
        iters[active] = it
        if np.any(ok):
            converged[active[ok]] = True
            keep = ~ok
            active = active[keep]
            msg = msg[keep]
            post_active = post_active[keep]
    return hard, converged, iters


def decode(llrs: np.ndarray, code: QcLdpcCode,
           max_iter: int = DEFAULT_MAX_ITER):
    """Single-frame convenience wrapper around decode_batch."""
    hard, conv, iters = decode_batch(np.asarray(llrs)[None, :], code, max_iter)
    return hard[0], bool(conv[0]), int(iters[0])
