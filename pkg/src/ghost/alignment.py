"""Pairwise global alignment over raw bytes.

Needleman-Wunsch with a fixed traceback preference (diagonal, then a gap in
``b``, then a gap in ``a``), the gap-count dissimilarity ratio, and the
entropy-weighted wildcard scoring used to match requests against prototypes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels

GAP = -1
WILDCARD = -1


@dataclass(frozen=True)
class ScoringScheme:
    match: float
    mismatch: float
    gap: float

    def __post_init__(self):
        if not self.match > self.mismatch:
            raise ValueError("match score must exceed mismatch score")


MATCHING = ScoringScheme(1.0, -1.0, 0.0)
SUBSTITUTION = ScoringScheme(1.0, -1.0, -1.0)


@dataclass(frozen=True)
class WeightedMatchConstants:
    M: float = 1.0
    D: float = -1.0
    X: float = 0.0

    def __post_init__(self):
        if not (self.D < self.X <= self.M):
            raise ValueError("need D < X <= M")


@dataclass(frozen=True)
class Alignment:
    """Two equal-length rows of byte values, with ``GAP`` (-1) for gaps."""

    aligned_a: tuple[int, ...]
    aligned_b: tuple[int, ...]
    score: float

    def __len__(self):
        return len(self.aligned_a)

    def gaps(self) -> int:
        return self.aligned_a.count(GAP) + self.aligned_b.count(GAP)

    def render(self, gap: str = "-") -> tuple[str, str]:
        def row(r):
            return "".join(gap if c == GAP else chr(c) for c in r)
        return row(self.aligned_a), row(self.aligned_b)


def as_array(msg: bytes) -> np.ndarray:
    return np.frombuffer(bytes(msg), dtype=np.uint8)


def nw_align(a: bytes, b: bytes, scheme: ScoringScheme = MATCHING) -> Alignment:
    """Optimal global alignment of ``a`` (rows) against ``b`` (columns)."""
    A, B = as_array(a), as_array(b)
    m, n, g = float(scheme.match), float(scheme.mismatch), float(scheme.gap)
    F = _kernels.nw_fill(A, B, m, n, g)
    i, j = len(A), len(B)
    out_a: list[int] = []
    out_b: list[int] = []
    while i > 0 or j > 0:
        here = F[i, j]
        if i > 0 and j > 0 and here == F[i - 1, j - 1] + (m if A[i - 1] == B[j - 1] else n):
            i -= 1
            j -= 1
            out_a.append(int(A[i]))
            out_b.append(int(B[j]))
        elif i > 0 and here == F[i - 1, j] + g:
            i -= 1
            out_a.append(int(A[i]))
            out_b.append(GAP)
        else:
            j -= 1
            out_a.append(GAP)
            out_b.append(int(B[j]))
    out_a.reverse()
    out_b.reverse()
    return Alignment(tuple(out_a), tuple(out_b), float(F[len(A), len(B)]))


def nw_score(a: bytes, b: bytes, scheme: ScoringScheme = MATCHING) -> float:
    F = _kernels.nw_fill(as_array(a), as_array(b), float(scheme.match),
                         float(scheme.mismatch), float(scheme.gap))
    return float(F[-1, -1])


def lcs_length(a: bytes, b: bytes) -> int:
    return int(_kernels.lcs_length(as_array(a), as_array(b)))


NORMALIZATIONS = ("padded", "sum")


def ratio_from_lcs(la: int, lb: int, lcs: int, normalization: str = "padded") -> float:
    if normalization == "padded":
        # gaps needed in the shorter row, over both rows padded to the longer length
        longest = max(la, lb)
        return (longest - lcs) / (2 * longest)
    if normalization == "sum":
        return (la + lb - 2 * lcs) / (la + lb)
    raise ValueError(f"unknown normalization {normalization!r}")


def dissimilarity_ratio(a: bytes, b: bytes, normalization: str = "padded") -> float:
    """Gap-based dissimilarity in [0, 1] under the (1, -1, 0) scheme.

    With a zero gap score a mismatch column is never optimal, so every optimal
    alignment has ``lcs`` match columns and ``|a| + |b| - 2 lcs`` gaps.

    ``normalization="sum"`` divides the total gap count by ``|a| + |b|``.
    ``normalization="padded"`` (default) divides the gaps of the shorter
    sequence by twice the longer length; this is the variant that matches the
    published dissimilarity matrices.
    """
    if len(a) == 0 and len(b) == 0:
        raise ValueError("undefined ratio: both messages are empty")
    return ratio_from_lcs(len(a), len(b), lcs_length(a, b), normalization)


def _proto_arrays(symbols: Sequence[int], weights: Sequence[float]):
    s = np.asarray(symbols, dtype=np.int16)
    w = np.asarray(weights, dtype=np.float64)
    if s.shape != w.shape:
        raise ValueError("symbols and weights differ in length")
    return s, w


def weighted_prototype_score(symbols: Sequence[int], weights: Sequence[float], r: bytes,
                             k: WeightedMatchConstants = WeightedMatchConstants()) -> float:
    """Optimal alignment score of a request against a weighted prototype.

    ``symbols`` holds byte values with ``WILDCARD`` (-1) for wildcard columns.
    """
    s, w = _proto_arrays(symbols, weights)
    if len(s) == 0:
        raise ValueError("prototype has no symbols")
    return float(_kernels.weighted_score(s, w, as_array(r), float(k.M), float(k.D), float(k.X)))


def score_bounds(symbols: Sequence[int], weights: Sequence[float],
                 k: WeightedMatchConstants = WeightedMatchConstants()) -> tuple[float, float]:
    """(s_min, s_max): every column gapped vs every column matched by itself."""
    s, w = _proto_arrays(symbols, weights)
    wild = s < 0
    s_max = float(np.sum(np.where(wild, w * k.X, w * k.M)))
    s_min = float(np.sum(np.where(wild, w * k.X, w * k.D)))
    return s_min, s_max


def relative_distance(symbols: Sequence[int], weights: Sequence[float], r: bytes,
                      k: WeightedMatchConstants = WeightedMatchConstants()) -> float:
    s_min, s_max = score_bounds(symbols, weights, k)
    if not s_max > s_min:
        raise ValueError("degenerate prototype: no concrete column to match")
    s = weighted_prototype_score(symbols, weights, r, k)
    d = 1.0 - (s - s_min) / (s_max - s_min)
    return min(1.0, max(0.0, d))
