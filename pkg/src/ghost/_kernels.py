"""Compiled dynamic-programming kernels.

Everything here works on numpy arrays so numba can compile it. The public
wrappers live in :mod:`ghost.alignment`.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def nw_fill(a, b, m, n, g):
    rows, cols = a.shape[0], b.shape[0]
    F = np.empty((rows + 1, cols + 1), dtype=np.float64)
    F[0, 0] = 0.0
    for i in range(1, rows + 1):
        F[i, 0] = i * g
    for j in range(1, cols + 1):
        F[0, j] = j * g
    for i in range(1, rows + 1):
        ai = a[i - 1]
        for j in range(1, cols + 1):
            best = F[i - 1, j - 1] + (m if ai == b[j - 1] else n)
            up = F[i - 1, j] + g
            if up > best:
                best = up
            left = F[i, j - 1] + g
            if left > best:
                best = left
            F[i, j] = best
    return F


@njit(cache=True)
def lcs_length(a, b):
    # optimal score under (1, -1, 0) equals the LCS length
    cols = b.shape[0]
    prev = np.zeros(cols + 1, dtype=np.int32)
    cur = np.zeros(cols + 1, dtype=np.int32)
    for i in range(a.shape[0]):
        ai = a[i]
        for j in range(1, cols + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            elif prev[j] >= cur[j - 1]:
                cur[j] = prev[j]
            else:
                cur[j] = cur[j - 1]
        prev, cur = cur, prev
    return prev[cols]


@njit(cache=True)
def lcs_matrix(buf, offsets, pairs_i, pairs_j, out):
    """LCS length for each (i, j) pair of messages packed in ``buf``."""
    for k in range(pairs_i.shape[0]):
        i = pairs_i[k]
        j = pairs_j[k]
        a = buf[offsets[i]:offsets[i + 1]]
        b = buf[offsets[j]:offsets[j + 1]]
        out[k] = lcs_length(a, b)


@njit(cache=True)
def weighted_score(symbols, weights, r, M, D, X):
    """Best global score of prototype ``symbols`` (-1 = wildcard) against ``r``.

    Request bytes skipped against a gap score 0, prototype columns skipped
    score w*D (concrete) or w*X (wildcard).
    """
    P = symbols.shape[0]
    R = r.shape[0]
    prev = np.zeros(R + 1, dtype=np.float64)
    cur = np.zeros(R + 1, dtype=np.float64)
    for i in range(1, P + 1):
        s = symbols[i - 1]
        w = weights[i - 1]
        skip = w * X if s < 0 else w * D
        cur[0] = prev[0] + skip
        for j in range(1, R + 1):
            if s < 0:
                sub = w * X
            elif s == r[j - 1]:
                sub = w * M
            else:
                sub = w * D
            best = prev[j - 1] + sub
            up = prev[j] + skip
            if up > best:
                best = up
            if cur[j - 1] > best:
                best = cur[j - 1]
            cur[j] = best
        prev, cur = cur, prev
    return prev[R]


@njit(cache=True)
def lcs_against(msg, buf, offsets, idx, out):
    """LCS of one message against each packed message listed in ``idx``."""
    for t in range(idx.shape[0]):
        i = idx[t]
        out[t] = lcs_length(msg, buf[offsets[i]:offsets[i + 1]])


@njit(cache=True)
def weighted_scores(sym_buf, w_buf, offsets, r, M, D, X, out):
    """weighted_score of ``r`` against every prototype packed in the buffers."""
    for t in range(offsets.shape[0] - 1):
        a = offsets[t]
        b = offsets[t + 1]
        out[t] = weighted_score(sym_buf[a:b], w_buf[a:b], r, M, D, X)
