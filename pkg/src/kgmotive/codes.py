"""Prefix-free codelengths, in bits.

Nothing here produces an actual bitstring; every function returns the ideal
codelength ``-log2 p(x)`` of some fixed distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

LN2 = math.log(2.0)

# below this, log2(n!) is computed from the exact integer factorial
_EXACT_LIMIT = 256


def length_pos_int(n: int) -> float:
    """Codelength of ``n >= 1`` under ``p(n) = 1 / (n (n+1))``."""
    if n < 1:
        raise ValueError(f"length_pos_int needs n >= 1, got {n}")
    return math.log2(n) + math.log2(n + 1)


def length_nonneg_int(n: int) -> float:
    if n < 0:
        raise ValueError(f"length_nonneg_int needs n >= 0, got {n}")
    return length_pos_int(n + 1)


def length_int(z: int) -> float:
    """One sign bit, then the positive code for negatives, the nonnegative code otherwise."""
    if z < 0:
        return 1.0 + length_pos_int(-z)
    return 1.0 + length_nonneg_int(z)


def length_int_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    a = np.where(z < 0, -z, z + 1.0)
    return 1.0 + np.log2(a) + np.log2(a + 1.0)


def log2_factorial(n: int) -> float:
    if n < 0:
        raise ValueError(f"log2_factorial needs n >= 0, got {n}")
    if n < _EXACT_LIMIT:
        return math.log2(math.factorial(n))
    return math.lgamma(n + 1) / LN2


class _FactorialTable:
    """Grow-on-demand table of log2(n!) for vectorised sums."""

    def __init__(self):
        self.table = np.array([log2_factorial(i) for i in range(_EXACT_LIMIT)])

    def ensure(self, n: int):
        size = len(self.table)
        if n < size:
            return
        new_size = max(n + 1, 2 * size)
        extra = gammaln(np.arange(size, new_size, dtype=np.float64) + 1.0) / LN2
        self.table = np.concatenate([self.table, extra])

    def __call__(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.int64)
        if values.size == 0:
            return np.zeros(0)
        self.ensure(int(values.max()))
        return self.table[values]


_LF = _FactorialTable()


def sum_log2_factorial(values) -> float:
    """``sum(log2(x!) for x in values)`` for an array of nonnegative integers."""
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0:
        return 0.0
    if values.min() < 0:
        raise ValueError("negative value in sum_log2_factorial")
    # zeros and ones contribute nothing; skipping them keeps sums order-stable
    nz = values[values > 1]
    return float(_LF(nz).sum())


@dataclass(frozen=True)
class PitmanYorConfig:
    alpha: float = 0.5
    d: float = 0.1

    def __post_init__(self):
        if not (0.0 <= self.d < 1.0):
            raise ValueError(f"Pitman-Yor discount must satisfy 0 <= d < 1, got {self.d}")
        if not self.alpha > -self.d:
            raise ValueError(f"Pitman-Yor concentration must satisfy alpha > -d, got {self.alpha}")


DEFAULT_PY = PitmanYorConfig()


def vocabulary_bits(seq) -> float:
    """Cost of the header: sequence length, vocabulary size, first member, then
    signed gaps between members in first-occurrence order."""
    arr = np.asarray(seq, dtype=np.int64).ravel()
    n = arr.size
    if n == 0:
        return length_nonneg_int(0) + length_nonneg_int(0)
    if arr.min() < 0:
        raise ValueError("Pitman-Yor sequences must hold nonnegative integers")
    uniq, first = np.unique(arr, return_index=True)
    vocab = uniq[np.argsort(first, kind="stable")]
    bits = length_nonneg_int(n) + length_nonneg_int(vocab.size) + length_nonneg_int(int(vocab[0]))
    if vocab.size > 1:
        bits += float(length_int_array(np.diff(vocab)).sum())
    return bits


def pitman_yor_sequence_bits(counts, n: int, cfg: PitmanYorConfig = DEFAULT_PY) -> float:
    """``-log2 p(S)`` for a sequence with symbol multiplicities ``counts``.

    The predictive probabilities are exchangeable, so only the counts matter:
    the j-th new symbol (j >= 1) costs ``(alpha + d j) / (i + alpha)`` and a
    repeat of a symbol seen f times costs ``(f - d) / (i + alpha)``, where i
    is the number of symbols read so far.
    """
    counts = np.asarray(counts, dtype=np.float64)
    k = counts.size
    if n == 0 or k == 0:
        return 0.0
    alpha, d = cfg.alpha, cfg.d
    ln_p = 0.0
    if k > 1:
        ln_p += float(np.log(alpha + d * np.arange(1, k)).sum())
    ln_p += float((gammaln(counts - d) - math.lgamma(1.0 - d)).sum())
    ln_p -= math.lgamma(n + alpha) - math.lgamma(1.0 + alpha)
    return max(0.0, -ln_p / LN2)


def pitman_yor_length(seq, cfg: PitmanYorConfig = DEFAULT_PY) -> float:
    """Vocabulary header plus Pitman-Yor codelength of an integer sequence."""
    arr = np.asarray(seq, dtype=np.int64).ravel()
    header = vocabulary_bits(arr)
    if arr.size == 0:
        return header
    _, counts = np.unique(arr, return_counts=True)
    return header + pitman_yor_sequence_bits(counts, arr.size, cfg)
