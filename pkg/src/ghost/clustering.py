"""Dissimilarity matrices, VAT reordering (Prim and BEA), images, partitioning."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .alignment import NORMALIZATIONS
from .trace import TraceLibrary


class Basis(enum.Enum):
    REQUEST = "request"
    RESPONSE = "response"


@dataclass(frozen=True)
class DissimilarityMatrix:
    values: np.ndarray
    basis: Basis = Basis.RESPONSE

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("dissimilarity matrix must be square")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def permuted(self, perm: Sequence[int]) -> np.ndarray:
        p = np.asarray(perm)
        return self.values[np.ix_(p, p)]

    def sub(self, indices: Sequence[int]) -> "DissimilarityMatrix":
        return DissimilarityMatrix(self.permuted(indices), self.basis)


@dataclass(frozen=True)
class Cluster:
    members: tuple[int, ...]
    centroid: int | None = None


@dataclass(frozen=True)
class ClusterSet:
    clusters: tuple[Cluster, ...] = ()

    def __post_init__(self):
        seen: set[int] = set()
        for c in self.clusters:
            if seen.intersection(c.members):
                raise ValueError("clusters overlap")
            seen.update(c.members)

    def __len__(self):
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    def __getitem__(self, i) -> Cluster:
        return self.clusters[i]

    @classmethod
    def of(cls, groups: Sequence[Sequence[int]]) -> "ClusterSet":
        return cls(tuple(Cluster(tuple(int(m) for m in g)) for g in groups))


def pairwise_ratios(messages: Sequence[bytes], normalization: str = "padded") -> np.ndarray:
    """Full symmetric matrix of dissimilarity ratios, one DP per unordered pair."""
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}")
    n = len(messages)
    lens = np.array([len(m) for m in messages], dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(lens)
    buf = np.frombuffer(b"".join(messages), dtype=np.uint8) if n else np.zeros(0, np.uint8)
    iu, ju = np.triu_indices(n, k=1)
    lcs = np.zeros(len(iu), dtype=np.int64)
    _kernels.lcs_matrix(buf, offsets, iu.astype(np.int64), ju.astype(np.int64), lcs)
    la, lb = lens[iu], lens[ju]
    if normalization == "padded":
        longest = np.maximum(la, lb)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = np.where(longest > 0, (longest - lcs) / (2.0 * longest), 0.0)
    else:
        total = la + lb
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = np.where(total > 0, (total - 2.0 * lcs) / total, 0.0)
    out = np.zeros((n, n))
    out[iu, ju] = vals
    out[ju, iu] = vals
    return out


def build_matrix(lib: TraceLibrary, basis: Basis = Basis.RESPONSE,
                 normalization: str = "padded") -> DissimilarityMatrix:
    """Pairwise dissimilarities over requests or responses.

    With the response basis, any pair involving a no-response interaction is
    measured on the requests instead.
    """
    basis = Basis(basis)
    if len(lib) < 2:
        raise ValueError("need at least two interactions to build a matrix")
    req = pairwise_ratios(lib.requests, normalization)
    if basis is Basis.REQUEST:
        return DissimilarityMatrix(req, basis)
    res = pairwise_ratios([x.response for x in lib], normalization)
    silent = np.array([x.is_no_response for x in lib])
    fallback = silent[:, None] | silent[None, :]
    return DissimilarityMatrix(np.where(fallback, req, res), basis)


def _values(dm) -> np.ndarray:
    return dm.values if isinstance(dm, DissimilarityMatrix) else np.asarray(dm, dtype=np.float64)


def vat_reorder_prim(dm) -> list[int]:
    """VAT ordering: seed at the largest entry, then grow by nearest neighbour."""
    d = _values(dm)
    n = d.shape[0]
    if n == 0:
        return []
    seed = int(np.argmax(d)) // n  # row-major argmax: lowest row, then lowest column
    order = [seed]
    done = np.zeros(n, dtype=bool)
    done[seed] = True
    nearest = d[seed].copy()
    for _ in range(n - 1):
        cand = np.where(done, np.inf, nearest)
        k = int(np.argmin(cand))
        order.append(k)
        done[k] = True
        nearest = np.minimum(nearest, d[k])
    return order


def bond(sim: np.ndarray, x: int, y: int) -> float:
    """Bond of two columns of a similarity matrix; -1 stands for the virtual border."""
    if x < 0 or y < 0:
        return 0.0
    return float(sim[:, x] @ sim[:, y])


def contribution(sim: np.ndarray, left: int, k: int, right: int) -> float:
    return 2 * bond(sim, left, k) + 2 * bond(sim, k, right) - 2 * bond(sim, left, right)


def global_measure(sim: np.ndarray, order: Sequence[int]) -> float:
    return sum(bond(sim, a, b) for a, b in zip(order, order[1:]))


def bea_reorder(dm) -> list[int]:
    """Bond energy ordering on the similarity 1 - d.

    Columns are inserted one at a time in index order at the position with the
    largest contribution; the earliest position wins ties.
    """
    d = _values(dm)
    n = d.shape[0]
    if n < 2:
        raise ValueError("bond energy ordering needs n >= 2")
    sim = 1.0 - d
    order = [0, 1]
    for k in range(2, n):
        best_pos, best = 0, -math.inf
        for pos in range(len(order) + 1):
            left = order[pos - 1] if pos > 0 else -1
            right = order[pos] if pos < len(order) else -1
            c = contribution(sim, left, k, right)
            if c > best:
                best_pos, best = pos, c
        order.insert(best_pos, k)
    return order


def render_image(dm, perm: Sequence[int] | None = None) -> np.ndarray:
    """Grayscale intensities 0..255, black for identical, white for the maximum."""
    d = _values(dm)
    if perm is not None:
        d = d[np.ix_(perm, perm)]
    dmax = d.max() if d.size else 0.0
    if dmax <= 0:
        return np.zeros(d.shape, dtype=np.uint8)
    return np.floor(255.0 * d / dmax + 0.5).astype(np.uint8)


def write_pgm(image: np.ndarray, stream) -> None:
    h, w = image.shape
    stream.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
    stream.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def read_pgm(data: bytes) -> np.ndarray:
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only 8-bit PGM supported")
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


@dataclass(frozen=True)
class PartitionConfig:
    """Either explicit block boundaries (positions in the permuted order) or auto mode.

    Auto mode walks the permuted order and keeps extending the current block
    while the candidate's mean distance to the block is small enough. With
    ``alpha=None`` "small enough" is the fixed threshold ``tau`` (default half
    the global mean distance). With a number, blocks of at least ``min_block``
    members use ``alpha`` times their own mean internal distance instead and
    smaller blocks use ``tau`` (default the global mean), so tight blocks of
    short messages and loose blocks of long ones are both kept whole.
    """

    boundaries: tuple[int, ...] | None = None
    auto: bool = False
    tau: float | None = None
    alpha: float | None = 1.5
    min_block: int = 3

    def __post_init__(self):
        if self.boundaries is None and not self.auto:
            object.__setattr__(self, "boundaries", ())
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.min_block < 2:
            raise ValueError("min_block must be >= 2")


def mean_off_diagonal(dm) -> float:
    d = _values(dm)
    n = d.shape[0]
    return float(d.sum() / (n * (n - 1))) if n >= 2 else 0.0


def default_tau(dm) -> float:
    return 0.5 * mean_off_diagonal(dm)


def partition(dm, perm: Sequence[int], cfg: PartitionConfig = PartitionConfig()) -> ClusterSet:
    d = _values(dm)
    perm = [int(p) for p in perm]
    n = len(perm)
    if sorted(perm) != list(range(d.shape[0])):
        raise ValueError("perm is not a permutation of the matrix indices")
    if not cfg.auto:
        cuts = list(cfg.boundaries or ())
        if any(b <= 0 or b >= n for b in cuts) or any(b2 <= b1 for b1, b2 in zip(cuts, cuts[1:])):
            raise ValueError(f"boundaries must be strictly increasing within (0, {n}): {cuts}")
        edges = [0] + cuts + [n]
        return ClusterSet.of([perm[a:b] for a, b in zip(edges, edges[1:])])
    if cfg.alpha is None:
        tau = default_tau(d) if cfg.tau is None else cfg.tau
    else:
        tau = mean_off_diagonal(d) if cfg.tau is None else cfg.tau
    blocks: list[list[int]] = []
    internal = 0.0  # sum of pairwise distances inside the current block
    for k in perm:
        if blocks:
            block = blocks[-1]
            row = d[k, block]
            m = float(row.mean())
            size = len(block)
            if cfg.alpha is None or size < cfg.min_block:
                limit = tau
            else:
                limit = cfg.alpha * internal / (size * (size - 1) / 2)
            if m <= limit:
                block.append(k)
                internal += float(row.sum())
                continue
        blocks.append([k])
        internal = 0.0
    return ClusterSet.of(blocks)


def centroid_sums(members: Sequence[int], request_matrix) -> np.ndarray:
    d = _values(request_matrix)
    idx = np.asarray(members)
    return d[np.ix_(idx, idx)].sum(axis=1)


def select_centroid(members: Sequence[int], request_matrix) -> int:
    """Member with the smallest summed request distance to the others (first on ties)."""
    if len(members) == 0:
        raise ValueError("empty cluster")
    sums = centroid_sums(members, request_matrix)
    return int(members[int(np.argmin(sums))])
