"""Per-cluster request prototypes.

Neighbour-joining guide tree, progressive profile alignment, consensus
extraction with wildcards and truncation, and entropy weights.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .alignment import GAP, WILDCARD, as_array

TRUNCATION = -2
_GAP_COL = 256


@dataclass(frozen=True)
class GuideTree:
    """Binary tree over leaves 0..k-1; internal node ``k + t`` is the t-th join."""

    n_leaves: int
    joins: tuple[tuple[int, int], ...] = ()

    @property
    def root(self) -> int:
        return self.n_leaves + len(self.joins) - 1 if self.joins else 0

    def children(self, node: int) -> tuple[int, int] | None:
        if node < self.n_leaves:
            return None
        return self.joins[node - self.n_leaves]

    def leaves(self, node: int | None = None) -> list[int]:
        node = self.root if node is None else node
        kids = self.children(node)
        if kids is None:
            return [node]
        return self.leaves(kids[0]) + self.leaves(kids[1])


def nj_q_matrix(d: np.ndarray) -> np.ndarray:
    n = d.shape[0]
    r = d.sum(axis=1)
    return (n - 2) * d - r[:, None] - r[None, :]


def build_guide_tree(distances) -> GuideTree:
    """Neighbour joining; the lowest (i, j) pair wins ties, new nodes go last."""
    d = np.array(distances, dtype=np.float64)
    k = d.shape[0]
    if k == 0:
        raise ValueError("no sequences")
    if k == 1:
        return GuideTree(1)
    active = list(range(k))
    joins: list[tuple[int, int]] = []
    while len(active) > 2:
        n = len(active)
        q = nj_q_matrix(d)
        iu, ju = np.triu_indices(n, k=1)
        pick = int(np.argmin(q[iu, ju]))  # row-major over the upper triangle
        i, j = int(iu[pick]), int(ju[pick])
        dij = d[i, j]
        new = 0.5 * (d[i] + d[j] - dij)
        keep = [t for t in range(n) if t not in (i, j)]
        nd = np.zeros((n - 1, n - 1))
        nd[: n - 2, : n - 2] = d[np.ix_(keep, keep)]
        nd[n - 2, : n - 2] = new[keep]
        nd[: n - 2, n - 2] = new[keep]
        joins.append((active[i], active[j]))
        active = [active[t] for t in keep] + [k + len(joins) - 1]
        d = nd
    joins.append((active[0], active[1]))
    return GuideTree(k, tuple(joins))


@dataclass(frozen=True)
class MsaScoring:
    """Profile alignment scores with affine gaps (a run of g gaps costs open + (g-1)*extend).

    Column pairs score the mean over row pairs of match/mismatch; pairs that
    involve an existing gap score 0. ``MsaScoring(1, -1, 0, 0)`` is the plain
    (1, -1, 0) scheme.
    """

    match: float = 3.0
    mismatch: float = 0.0
    gap_open: float = -2.0
    gap_extend: float = -0.75

    def __post_init__(self):
        if not self.match > self.mismatch:
            raise ValueError("match score must exceed mismatch score")


_NEG = -1e300


@njit(cache=True)
def _affine_fill(sub, o, e):
    la, lb = sub.shape
    M = np.full((la + 1, lb + 1), _NEG)
    X = np.full((la + 1, lb + 1), _NEG)  # last column consumes a (gap in b)
    Y = np.full((la + 1, lb + 1), _NEG)  # last column consumes b (gap in a)
    M[0, 0] = 0.0
    for i in range(1, la + 1):
        X[i, 0] = o + (i - 1) * e
    for j in range(1, lb + 1):
        Y[0, j] = o + (j - 1) * e
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            best = M[i - 1, j - 1]
            if X[i - 1, j - 1] > best:
                best = X[i - 1, j - 1]
            if Y[i - 1, j - 1] > best:
                best = Y[i - 1, j - 1]
            M[i, j] = best + sub[i - 1, j - 1]
            best = M[i - 1, j] + o
            if X[i - 1, j] + e > best:
                best = X[i - 1, j] + e
            if Y[i - 1, j] + o > best:
                best = Y[i - 1, j] + o
            X[i, j] = best
            best = M[i, j - 1] + o
            if Y[i, j - 1] + e > best:
                best = Y[i, j - 1] + e
            if X[i, j - 1] + o > best:
                best = X[i, j - 1] + o
            Y[i, j] = best
    return M, X, Y


@njit(cache=True)
def _affine_traceback(M, X, Y, o, e):
    """Column pairs of the first optimal path, preferring diagonal, then up, then left."""
    i, j = M.shape[0] - 1, M.shape[1] - 1
    cols_a = np.empty(i + j, dtype=np.int64)
    cols_b = np.empty(i + j, dtype=np.int64)
    state = 0
    top = M[i, j]
    if X[i, j] > top:
        state, top = 1, X[i, j]
    if Y[i, j] > top:
        state = 2
    k = 0
    while i > 0 or j > 0:
        if state == 0:
            i -= 1
            j -= 1
            cols_a[k], cols_b[k] = i, j
            prev = M[i, j]
            state = 0
            if X[i, j] > prev:
                state, prev = 1, X[i, j]
            if Y[i, j] > prev:
                state = 2
        elif state == 1:
            here = X[i, j]
            i -= 1
            cols_a[k], cols_b[k] = i, -1
            if j == 0:
                state = 1
            elif M[i, j] + o == here:
                state = 0
            elif X[i, j] + e == here:
                state = 1
            else:
                state = 2
        else:
            here = Y[i, j]
            j -= 1
            cols_a[k], cols_b[k] = -1, j
            if i == 0:
                state = 2
            elif M[i, j] + o == here:
                state = 0
            elif X[i, j] + o == here:
                state = 1
            else:
                state = 2
        k += 1
    return cols_a[:k][::-1].copy(), cols_b[:k][::-1].copy()


def _composition(rows: np.ndarray) -> np.ndarray:
    """Per-column counts over 256 byte values plus a final gap bucket."""
    L = rows.shape[1]
    comp = np.zeros((L, 257))
    sym = np.where(rows == GAP, _GAP_COL, rows)
    cols = np.broadcast_to(np.arange(L), rows.shape)
    np.add.at(comp, (cols.ravel(), sym.ravel()), 1.0)
    return comp


def align_profiles(a: np.ndarray, b: np.ndarray, scoring: MsaScoring = MsaScoring()) -> np.ndarray:
    """Align two profiles (2-D arrays of symbols, GAP=-1) and stack their rows."""
    ka, kb = a.shape[0], b.shape[0]
    ca, cb = _composition(a), _composition(b)
    same = ca[:, :256] @ cb[:, :256].T
    both = np.outer(ca[:, :256].sum(axis=1), cb[:, :256].sum(axis=1))
    sub = (scoring.match * same + scoring.mismatch * (both - same)) / (ka * kb)
    o, e = float(scoring.gap_open), float(scoring.gap_extend)
    M, X, Y = _affine_fill(sub, o, e)
    cols_a, cols_b = _affine_traceback(M, X, Y, o, e)

    def expand(p, idx):
        out = np.full((p.shape[0], len(idx)), GAP, dtype=np.int16)
        keep = idx >= 0
        out[:, keep] = p[:, idx[keep]]
        return out

    return np.vstack([expand(a, cols_a), expand(b, cols_b)])


@dataclass(frozen=True)
class MsaProfile:
    rows: np.ndarray  # (k, L) int16, GAP = -1

    def __post_init__(self):
        r = np.array(self.rows, dtype=np.int16)
        r.setflags(write=False)
        object.__setattr__(self, "rows", r)

    @property
    def width(self) -> int:
        return self.rows.shape[1]

    def row_text(self, i: int, gap: str = "-") -> str:
        return "".join(gap if c == GAP else chr(c) for c in self.rows[i])

    def stripped(self, i: int) -> bytes:
        r = self.rows[i]
        return bytes(int(c) for c in r if c != GAP)


def progressive_msa(requests: Sequence[bytes], tree: GuideTree,
                    scoring: MsaScoring = MsaScoring()) -> MsaProfile:
    if tree.n_leaves != len(requests):
        raise ValueError("tree leaves do not match the requests")
    if not requests:
        raise ValueError("no requests")

    def build(node):
        kids = tree.children(node)
        if kids is None:
            return [node], as_array(requests[node]).astype(np.int16)[None, :]
        la, pa = build(kids[0])
        lb, pb = build(kids[1])
        return la + lb, align_profiles(pa, pb, scoring)

    order, rows = build(tree.root)
    out = np.empty_like(rows)
    out[np.asarray(order)] = rows
    # a column can only be all-gap if every input is empty there; drop such columns
    out = out[:, ~np.all(out == GAP, axis=0)] if out.shape[1] else out
    return MsaProfile(out)


def column_counts(profile: MsaProfile) -> list[Counter]:
    return [Counter(int(c) for c in profile.rows[:, j]) for j in range(profile.width)]


def top_symbol(counts: Counter) -> int:
    """Most frequent symbol; the lowest byte wins ties and a gap never wins one."""
    best = max(counts.values())
    tied = [s for s, c in counts.items() if c == best]
    byte_ties = [s for s in tied if s != GAP]
    return min(byte_ties) if byte_ties else GAP


def consensus_columns(profile: MsaProfile, f: float) -> list[int]:
    """Per-column symbol before truncation removal: byte, WILDCARD or TRUNCATION."""
    if not 0 < f <= 1:
        raise ValueError("f must lie in (0, 1]")
    k = profile.rows.shape[0]
    out = []
    for counts in column_counts(profile):
        c = top_symbol(counts)
        q = counts[c] / k
        if c != GAP and q >= f:
            out.append(c)
        elif c == GAP and q >= 0.5:
            out.append(TRUNCATION)
        else:
            out.append(WILDCARD)
    return out


def derive_prototype(profile: MsaProfile, f: float) -> tuple[list[int], list[int]]:
    """Prototype symbols (WILDCARD = -1) and the profile columns they came from."""
    if profile.rows.size == 0:
        raise ValueError("empty profile")
    cols = consensus_columns(profile, f)
    kept = [j for j, s in enumerate(cols) if s != TRUNCATION]
    return [cols[j] for j in kept], kept


def column_entropies(profile: MsaProfile) -> np.ndarray:
    """Natural-log Shannon index per column, gaps counted as a symbol."""
    k = profile.rows.shape[0]
    out = np.zeros(profile.width)
    for j, counts in enumerate(column_counts(profile)):
        q = np.array(sorted(counts.values()), dtype=np.float64) / k
        out[j] = float(-(q * np.log(q)).sum())
    return np.maximum(out, 0.0)


def entropy_weights(E, b: float = 1.0, c: float = 10.0) -> np.ndarray:
    if not (b > 0 and c > 0):
        raise ValueError("b and c must be positive")
    return 1.0 / (1.0 + b * np.asarray(E, dtype=np.float64)) ** c


@dataclass(frozen=True)
class ConsensusPrototype:
    symbols: tuple[int, ...]
    weights: tuple[float, ...]
    f: float = 0.8
    cluster: int = 0

    def __post_init__(self):
        if len(self.symbols) != len(self.weights):
            raise ValueError("symbols and weights differ in length")
        if any(s < WILDCARD or s > 255 for s in self.symbols):
            raise ValueError("prototype symbols must be bytes or WILDCARD")

    def render(self, wildcard: str = "?") -> str:
        return "".join(wildcard if s == WILDCARD else chr(s) for s in self.symbols)

    def __len__(self):
        return len(self.symbols)


def build_prototype(requests: Sequence[bytes], f: float = 0.8, b: float = 1.0, c: float = 10.0,
                    distances=None, cluster: int = 0, scoring: MsaScoring = MsaScoring()) -> tuple[ConsensusPrototype, MsaProfile]:
    """Guide tree, MSA, consensus and weights for one cluster of requests."""
    from .clustering import pairwise_ratios

    if distances is None:
        distances = pairwise_ratios(list(requests))
    tree = build_guide_tree(distances)
    profile = progressive_msa(requests, tree, scoring)
    symbols, kept = derive_prototype(profile, f)
    w = entropy_weights(column_entropies(profile)[kept], b, c)
    proto = ConsensusPrototype(tuple(symbols), tuple(float(x) for x in w), f, cluster)
    return proto, profile
