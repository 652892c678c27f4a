import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghost.alignment import GAP, WILDCARD
from ghost.consensus import (MsaProfile, build_guide_tree, build_prototype, column_entropies,
                             consensus_columns, derive_prototype, entropy_weights, progressive_msa)
from ghost.samples import directory_library

from published import ADD_PROTOTYPE, ENTROPIES, SEARCH_DISTANCES, SEARCH_MSA, SEARCH_PROTOTYPE, WEIGHTS

SEARCH = [0, 1, 5, 3, 4]  # S1..S5 in the order the alignment figure lists them
ADD = [2, 6, 7]

requests = st.lists(st.binary(min_size=1, max_size=10).map(lambda b: bytes(97 + x % 3 for x in b)),
                    min_size=1, max_size=5)


@pytest.fixture(scope="module")
def lib():
    return directory_library()


def profile_of(rows):
    return MsaProfile(np.array([[GAP if ch == "-" else ord(ch) for ch in r] for r in rows], dtype=np.int16))


def test_nj_on_printed_table_follows_q_criterion():
    tree = build_guide_tree(SEARCH_DISTANCES)
    assert tree.joins == ((1, 4), (3, 5), (0, 2), (6, 7))
    assert sorted(tree.leaves()) == list(range(5))


@pytest.mark.xfail(strict=True, reason="printed guide tree joins S1,S2 first; the Q-criterion minimum on the "
                                       "printed distance table is the S2,S5 pair")
def test_nj_printed_first_join():
    assert build_guide_tree(SEARCH_DISTANCES).joins[0] == (0, 1)


def nj_replay(d):
    """Plain-Python neighbour joining, checking every pick against all pairs."""
    d = [list(map(float, r)) for r in d]
    labels = list(range(len(d)))
    nxt = len(d)
    joins = []
    while len(d) > 2:
        n = len(d)
        r = [sum(row) for row in d]
        q = {(i, j): (n - 2) * d[i][j] - r[i] - r[j] for i in range(n) for j in range(i + 1, n)}
        best = min(q.values())
        i, j = min(p for p, v in q.items() if v == best)
        new = [0.5 * (d[i][t] + d[j][t] - d[i][j]) for t in range(n)]
        keep = [t for t in range(n) if t not in (i, j)]
        joins.append((labels[i], labels[j]))
        d = [[d[a][b] for b in keep] + [new[a]] for a in keep] + [[new[b] for b in keep] + [0.0]]
        labels = [labels[t] for t in keep] + [nxt]
        nxt += 1
    if len(d) == 2:
        joins.append((labels[0], labels[1]))
    return tuple(joins)


@st.composite
def distance_tables(draw):
    n = draw(st.integers(2, 7))
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = draw(st.integers(1, 16)) / 16
    return d


@settings(max_examples=300, deadline=None)
@given(distance_tables())
def test_nj_matches_exhaustive_q_oracle(d):
    tree = build_guide_tree(d)
    assert tree.joins == nj_replay(d)
    assert sorted(tree.leaves()) == list(range(len(d)))


def test_nj_small_cases():
    assert build_guide_tree([[0.0]]).leaves() == [0]
    assert build_guide_tree([[0, 0.3], [0.3, 0]]).joins == ((0, 1),)
    with pytest.raises(ValueError):
        build_guide_tree(np.zeros((0, 0)))


@pytest.mark.xfail(strict=True, reason="our profile alignment places Schneider with a leading gap (28 columns) "
                                       "where the printed alignment has 27 columns")
def test_printed_search_alignment(lib):
    _, prof = build_prototype([lib[i].request for i in SEARCH])
    assert [prof.row_text(i) for i in range(5)] == SEARCH_MSA


def test_search_prototype(lib):
    proto, _ = build_prototype([lib[i].request for i in SEARCH], f=0.8)
    assert proto.render() == SEARCH_PROTOTYPE


def test_add_prototype_keeps_coincidental_byte(lib):
    proto, _ = build_prototype([lib[i].request for i in ADD], f=0.8)
    assert proto.render() == ADD_PROTOTYPE
    assert proto.render().count("l") == 1


@settings(max_examples=300, deadline=None)
@given(requests)
def test_rows_strip_to_inputs(reqs):
    proto, prof = build_prototype(reqs)
    assert [prof.stripped(i) for i in range(len(reqs))] == reqs
    assert not np.any(np.all(prof.rows == GAP, axis=0))
    assert len(proto.symbols) == len(proto.weights) <= prof.width
    assert all(0 < w <= 1 for w in proto.weights)


@settings(max_examples=100, deadline=None)
@given(st.binary(min_size=1, max_size=12), st.integers(1, 5), st.floats(0.05, 1.0))
def test_identical_requests_give_themselves(req, k, f):
    proto, prof = build_prototype([req] * k, f=f)
    assert bytes(proto.symbols) == req
    assert proto.weights == (1.0,) * len(req)
    assert not np.any(prof.rows == GAP)


@settings(max_examples=200, deadline=None)
@given(requests, st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_raising_f_never_adds_concrete_bytes(reqs, f1, f2):
    lo, hi = sorted((f1, f2))
    from ghost.consensus import MsaScoring, build_guide_tree as tree_of
    from ghost.clustering import pairwise_ratios
    prof = progressive_msa(reqs, tree_of(pairwise_ratios(reqs)), MsaScoring())
    a = consensus_columns(prof, lo)
    b = consensus_columns(prof, hi)
    for x, y in zip(a, b):
        if x == WILDCARD:
            assert y == WILDCARD


def test_f_out_of_range():
    prof = profile_of(["ab"])
    with pytest.raises(ValueError):
        derive_prototype(prof, 0.0)


def test_empty_profile():
    with pytest.raises(ValueError):
        derive_prototype(MsaProfile(np.zeros((0, 0), dtype=np.int16)), 0.8)


def test_gap_majority_truncates():
    prof = profile_of(["ab-", "ab-", "abc"])
    symbols, kept = derive_prototype(prof, 0.8)
    assert symbols == [ord("a"), ord("b")] and kept == [0, 1]


def test_byte_beats_gap_on_ties():
    prof = profile_of(["a-", "ab"])
    assert consensus_columns(prof, 0.5) == [ord("a"), ord("b")]


def test_printed_alignment_entropies_and_weights():
    E = column_entropies(profile_of(SEARCH_MSA))
    for e in ENTROPIES:
        assert np.min(np.abs(E - e)) <= 0.02 * e + 1e-12
    w = entropy_weights(E)
    for target in WEIGHTS:
        assert np.min(np.abs(w / target - 1)) <= 0.02


@pytest.mark.parametrize("counts, expected", [((2, 2, 1), 1.05), ((2, 1, 1, 1), 1.33), ((1, 1, 1, 1, 1), 1.61)])
def test_entropy_examples(counts, expected):
    symbols = iter("abcde")
    column = [s for c in counts for s in [next(symbols)] * c]
    rows = [[ord(ch)] for ch in column]
    assert column_entropies(MsaProfile(np.array(rows, dtype=np.int16)))[0] == pytest.approx(expected, abs=5e-3)


@settings(max_examples=200, deadline=None)
@given(requests)
def test_entropy_from_frequencies(reqs):
    _, prof = build_prototype(reqs)
    E = column_entropies(prof)
    k = prof.rows.shape[0]
    for j in range(prof.width):
        q = [c / k for c in Counter(prof.rows[:, j].tolist()).values()]
        assert math.isclose(sum(q), 1.0)
        assert E[j] == pytest.approx(-sum(x * math.log(x) for x in q), abs=1e-12)
        assert E[j] >= 0


@settings(max_examples=200)
@given(st.lists(st.floats(0, 3), min_size=2, max_size=10))
def test_weights_decrease_with_entropy(E):
    E = sorted(E)
    w = entropy_weights(E)
    assert np.all(np.diff(w) <= 0)
    assert np.all((w > 0) & (w <= 1))


def test_weight_parameters_positive():
    with pytest.raises(ValueError):
        entropy_weights([0.5], b=0)
