"""Response synthesis by copying request fields that recur in the response."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .alignment import GAP, SUBSTITUTION, Alignment, nw_align

DEFAULT_MIN_LEN = 4


@dataclass(frozen=True)
class SymmetricField:
    match: bytes
    rqpos: tuple[int, ...]
    rsppos: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.match)


@dataclass(frozen=True)
class UpdatedField:
    """A field re-read from the live request.

    ``rqpos`` is the offset in the live request, ``column`` the alignment
    column where the field starts, ``rsppos`` the target offsets in the
    response after earlier substitutions have shifted it.
    """

    match: bytes
    rqpos: int
    column: int
    rsppos: tuple[int, ...]
    original: SymmetricField

    @property
    def length(self) -> int:
        return len(self.match)


def occurrences(hay: bytes, needle: bytes) -> list[int]:
    out, start = [], hay.find(needle)
    while start != -1:
        out.append(start)
        start = hay.find(needle, start + 1)
    return out


def _diagonal_runs(a: bytes, b: bytes, min_len: int):
    """Maximal runs of equal bytes along every diagonal of the a-by-b grid."""
    la, lb = len(a), len(b)
    for shift in range(-(la - 1), lb):
        i = max(0, -shift)
        j = i + shift
        run = 0
        while i < la and j < lb:
            if a[i] == b[j]:
                run += 1
            else:
                if run >= min_len:
                    yield a[i - run:i]
                run = 0
            i += 1
            j += 1
        if run >= min_len:
            yield a[i - run:i]


def maximal_common_substrings(a: bytes, b: bytes, min_len: int = DEFAULT_MIN_LEN) -> set[bytes]:
    """Common substrings of length >= min_len not contained in a longer common substring."""
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    cands = set(_diagonal_runs(bytes(a), bytes(b), min_len))
    ranked = sorted(cands, key=len, reverse=True)
    keep: list[bytes] = []
    for s in ranked:
        if not any(len(t) > len(s) and s in t for t in keep):
            keep.append(s)
    return set(keep)


def _overlaps(spans: list[tuple[int, int]], start: int, length: int) -> bool:
    return any(start < e and s < start + length for s, e in spans)


def identify_symmetric_fields(req: bytes, res: bytes, min_len: int = DEFAULT_MIN_LEN) -> list[SymmetricField]:
    """Fields shared by a request and its response, ordered by first request offset.

    Candidates that overlap an already accepted field in the request or the
    response are dropped, longer fields first and earlier request offset on
    equal lengths.
    """
    req, res = bytes(req), bytes(res)
    cands = [(s, occurrences(req, s), occurrences(res, s))
             for s in maximal_common_substrings(req, res, min_len)]
    cands.sort(key=lambda c: (-len(c[0]), c[1][0], c[0]))
    req_spans: list[tuple[int, int]] = []
    res_spans: list[tuple[int, int]] = []
    fields = []
    for s, rq, rs in cands:
        L = len(s)
        if any(_overlaps(req_spans, p, L) for p in rq) or any(_overlaps(res_spans, p, L) for p in rs):
            continue
        # a string can overlap itself (e.g. "aaaa" in "aaaaa"); keep non-overlapping occurrences
        rq = _non_overlapping(rq, L)
        rs = _non_overlapping(rs, L)
        req_spans += [(p, p + L) for p in rq]
        res_spans += [(p, p + L) for p in rs]
        fields.append(SymmetricField(s, tuple(rq), tuple(rs)))
    fields.sort(key=lambda f: (f.rqpos[0], f.match))
    return fields


def _non_overlapping(positions: list[int], length: int) -> list[int]:
    out: list[int] = []
    for p in positions:
        if not out or p >= out[-1] + length:
            out.append(p)
    return out


def align_for_substitution(centroid_req: bytes, incoming: bytes) -> Alignment:
    return nw_align(centroid_req, incoming, SUBSTITUTION)


def _column_maps(al: Alignment):
    """Column of every centroid byte and live-request offset of every column."""
    col_of = []
    live_at = []
    pos = 0
    for c, (x, y) in enumerate(zip(al.aligned_a, al.aligned_b)):
        if x != GAP:
            col_of.append(c)
        if y != GAP:
            live_at.append(pos)
            pos += 1
        else:
            live_at.append(-1)
    return col_of, live_at


def map_span(al: Alignment, start: int, length: int) -> tuple[int, int, int]:
    """Map centroid span [start, start+length) to (first column, live start, live length).

    The span covers the columns of its first through last centroid byte, plus
    any insertion columns (centroid gap) that directly follow it. A span at
    the very start also takes leading insertions.
    """
    col_of, live_at = _column_maps(al)
    first = 0 if start == 0 else col_of[start]
    last = col_of[start + length - 1]
    ncols = len(al.aligned_a)
    while last + 1 < ncols and al.aligned_a[last + 1] == GAP:
        last += 1
    live = [live_at[c] for c in range(first, last + 1) if live_at[c] >= 0]
    if not live:
        return first, -1, 0
    return first, live[0], len(live)


def update_fields(fields: Sequence[SymmetricField], al: Alignment, incoming: bytes) -> list[UpdatedField]:
    """Re-read each field from the live request and shift response offsets.

    Only the first request occurrence of a field is mapped. Fields whose
    mapped span is empty are dropped.
    """
    incoming = bytes(incoming)
    mapped = []
    for f in fields:
        col, live_start, live_len = map_span(al, f.rqpos[0], f.length)
        if live_len == 0:
            continue
        mapped.append((f, col, live_start, incoming[live_start:live_start + live_len]))
    # every (field, occurrence) pair in response order, to apply cumulative shifts
    targets = sorted((p, k) for k, (f, *_rest) in enumerate(mapped) for p in f.rsppos)
    shift = 0
    new_pos: dict[int, list[int]] = {k: [] for k in range(len(mapped))}
    for p, k in targets:
        f, _, _, m = mapped[k]
        new_pos[k].append(p + shift)
        shift += len(m) - f.length
    return [UpdatedField(m, live_start, col, tuple(new_pos[k]), f)
            for k, (f, col, live_start, m) in enumerate(mapped)]


def substitute(centroid_res: bytes, fields: Sequence[UpdatedField]) -> bytes:
    """Overwrite every field occurrence in the response with the live value."""
    out = bytes(centroid_res)
    edits = sorted((p, k) for k, f in enumerate(fields) for p in f.rsppos)
    for p, k in edits:
        f = fields[k]
        old = f.original.length
        if p < 0 or p + old > len(out):
            raise AssertionError(f"substitution target {p}+{old} outside response of {len(out)} bytes")
        out = out[:p] + f.match + out[p + old:]
    return out


def translate(centroid_req: bytes, centroid_res: bytes, incoming: bytes,
              min_len: int = DEFAULT_MIN_LEN) -> bytes:
    fields = identify_symmetric_fields(centroid_req, centroid_res, min_len)
    if not fields:
        return bytes(centroid_res)
    al = align_for_substitution(centroid_req, incoming)
    return substitute(centroid_res, update_fields(fields, al, incoming))
