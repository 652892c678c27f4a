"""Synthetic directory-service traces, the five-way response taxonomy,
k-fold cross-validation and cluster noise injection."""
from __future__ import annotations

import enum
import json
import math
import random
import re
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .alignment import dissimilarity_ratio
from .clustering import Basis, Cluster, ClusterSet, build_matrix, pairwise_ratios, select_centroid
from .consensus import build_prototype
from .engine import AnalysisConfig, ServiceModel, Strategy, analyze, respond
from .trace import TraceLibrary


# ---------------------------------------------------------------- protocol

_MESSAGE = re.compile(rb"\{id:(\d+),op:([A-Za-z]+)((?:,[A-Za-z][A-Za-z0-9]*:[^,{}]*)*)\}")


@dataclass(frozen=True)
class DirectoryMessage:
    id: int
    op: str
    fields: tuple[tuple[str, str], ...] = ()

    def serialize(self) -> bytes:
        tail = "".join(f",{k}:{v}" for k, v in self.fields)
        return f"{{id:{self.id},op:{self.op}{tail}}}".encode("ascii")

    def get(self, key: str) -> str | None:
        for k, v in self.fields:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class DirectoryProtocolSpec:
    """Grammar and op map of the toy directory protocol."""

    response_ops: Mapping[str, str] = field(default_factory=lambda: {
        "B": "BindRsp", "S": "SearchRsp", "A": "AddRsp", "U": "UnbindRsp"})
    result_field: str = "result"

    @property
    def request_ops(self) -> tuple[str, ...]:
        return tuple(self.response_ops)

    @property
    def message_types(self) -> frozenset[str]:
        return frozenset(self.response_ops) | frozenset(self.response_ops.values())

    def parse(self, data: bytes) -> DirectoryMessage | None:
        """Decode a message of this protocol; None for anything outside its grammar or vocabulary."""
        m = _MESSAGE.fullmatch(bytes(data))
        if m is None or m.group(2).decode("ascii") not in self.message_types:
            return None
        try:
            text = m.group(3).decode("ascii")
        except UnicodeDecodeError:
            return None
        pairs = tuple(tuple(p.split(":", 1)) for p in text.split(",")[1:])
        # leading zeros would break parse(serialize(msg)) == msg
        if m.group(1) != str(int(m.group(1))).encode():
            return None
        return DirectoryMessage(int(m.group(1)), m.group(2).decode("ascii"), pairs)

    def is_request(self, msg: DirectoryMessage) -> bool:
        return msg.op in self.response_ops

    def is_valid_response(self, msg: DirectoryMessage, request: DirectoryMessage) -> bool:
        return (request.op in self.response_ops and msg.op == self.response_ops[request.op]
                and msg.get(self.result_field) is not None)


DIRECTORY = DirectoryProtocolSpec()


class Category(enum.Enum):
    IDENTICAL = "identical"
    CONSISTENT = "consistent"
    PROTOCOL_CONFORMANT = "protocol_conformant"
    WELL_FORMED = "well_formed"
    MALFORMED = "malformed"


CATEGORIES = tuple(Category)
_ACCURATE = {Category.IDENTICAL, Category.CONSISTENT, Category.PROTOCOL_CONFORMANT}


def categorize(expected: bytes | None, generated: bytes | None, request: bytes,
               validator: DirectoryProtocolSpec | None = DIRECTORY) -> Category:
    """Place a generated response in exactly one accuracy category.

    ``None`` stands for "no response". The consistent category checks the id,
    the only critical field of the toy protocol.
    """
    if expected == generated:
        return Category.IDENTICAL
    if generated is None or expected is None:
        # silence where a reply was due (or the other way round) counts as garbage
        return Category.MALFORMED
    if validator is None:
        raise ValueError("a protocol validator is required beyond byte identity")
    gen = validator.parse(generated)
    if gen is None:
        return Category.MALFORMED
    req = validator.parse(request)
    if req is None or not validator.is_valid_response(gen, req):
        return Category.WELL_FORMED
    if gen.id == req.id:
        return Category.CONSISTENT
    return Category.PROTOCOL_CONFORMANT


# ---------------------------------------------------------------- generator

SURNAMES = ("Du", "Versteeg", "Schneider", "Han", "Grundy", "Will", "Hine", "Lindsey", "Durand",
            "Okafor", "Nakamura", "Kowalski", "Silva", "Moreau", "Petrov", "Haddad", "Ng",
            "Fitzgerald", "Abernathy", "Quispe", "Lund", "Tanaka", "Oyelaran", "Vasquez")
GIVEN = ("Miao", "Steve", "Jun", "John", "Wendy", "Cameron", "Vanessa", "Ana", "Ravi", "Lena",
         "Tomasz", "Ines", "Kofi", "Yuki", "Marta", "Omar", "Zoe", "Pablo", "Hana", "Iker")
STREETS = ("Venton Road", "Glenferrie Road", "High Street", "Burke Road", "Elm Way", "Bay Parade")

DEFAULT_OP_WEIGHTS = {"B": 0.15, "S": 0.4, "A": 0.3, "U": 0.15}


def _digits(rng: random.Random, lo: int, hi: int) -> str:
    return str(rng.randint(10 ** (lo - 1), 10 ** hi - 1))


def _exchange(rng: random.Random, op: str, ident: int, spec: DirectoryProtocolSpec):
    rsp_op = spec.response_ops[op]
    if op in ("B", "U"):
        return DirectoryMessage(ident, op), DirectoryMessage(ident, rsp_op, (("result", "Ok"),))
    sn = rng.choice(SURNAMES)
    gn = rng.choice(GIVEN)
    if op == "S":
        req = DirectoryMessage(ident, op, (("sn", sn),))
        if rng.random() < 0.1:
            return req, DirectoryMessage(ident, rsp_op, (("result", "NoSuchObject"),))
        extra = ("mobile", _digits(rng, 5, 9)) if rng.random() < 0.7 else \
            ("postalCode", _digits(rng, 4, 5))
        return req, DirectoryMessage(ident, rsp_op, (("result", "Ok"), ("gn", gn), ("sn", sn), extra))
    attrs = [("sn", sn), ("gn", gn)]
    if rng.random() < 0.6:
        attrs.append(("mobile", _digits(rng, 5, 9)))
    if rng.random() < 0.3:
        attrs.append(("PostalAddress1", f"{rng.randint(1, 250)} {rng.choice(STREETS)}"))
    return DirectoryMessage(ident, op, tuple(attrs)), DirectoryMessage(ident, rsp_op, (("result", "Ok"),))


def generate_library(n: int, seed: int = 0, weights: Mapping[str, float] | None = None,
                     spec: DirectoryProtocolSpec = DIRECTORY) -> TraceLibrary:
    """Seeded random directory traffic; ids grow with gaps so their width varies."""
    if n < 10:
        raise ValueError("n must be >= 10")
    weights = dict(DEFAULT_OP_WEIGHTS if weights is None else weights)
    unknown = set(weights) - set(spec.response_ops)
    if unknown:
        raise ValueError(f"unknown ops {sorted(unknown)}")
    rng = random.Random(seed)
    ops, w = zip(*sorted(weights.items()))
    ident = rng.randint(1, 9)
    pairs = []
    for _ in range(n):
        op = rng.choices(ops, w)[0]
        req, rsp = _exchange(rng, op, ident, spec)
        pairs.append((req.serialize(), rsp.serialize()))
        ident += rng.choice((1, 1, 2, 3, 7, 19, 101, 997))
    return TraceLibrary.from_pairs(pairs, capture_id=f"synthetic-directory-{n}-{seed}")


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class LatencyStats:
    mean: float
    median: float
    max: float

    @classmethod
    def of(cls, samples: Sequence[float]) -> "LatencyStats":
        if not samples:
            return cls(0.0, 0.0, 0.0)
        return cls(statistics.fmean(samples), statistics.median(samples), max(samples))


@dataclass(frozen=True)
class AccuracyReport:
    counts: dict[str, int]
    total: int
    mean_dissimilarity: float  # over non-identical responses
    max_dissimilarity: float
    matching_seconds: LatencyStats
    substitution_seconds: LatencyStats
    strategy: str = ""
    folds: int = 0
    seed: int = 0

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise ValueError("category counts do not sum to the total")

    @property
    def accuracy_ratio(self) -> float:
        good = sum(self.counts[c.value] for c in _ACCURATE)
        return good / self.total if self.total else 0.0

    def to_json(self, timings: bool = True) -> dict:
        out = asdict(self)
        out["accuracy_ratio"] = self.accuracy_ratio
        if not timings:
            del out["matching_seconds"], out["substitution_seconds"]
        return out

    def table(self) -> str:
        heads = ["Strategy", "Total", "Identical", "Consistent", "Conformant", "Well-formed",
                 "Malformed", "Accuracy Ratio"]
        row = [self.strategy or "-", str(self.total)] + \
            [str(self.counts[c.value]) for c in CATEGORIES] + [f"{100 * self.accuracy_ratio:.2f}%"]
        widths = [max(len(h), len(v)) for h, v in zip(heads, row)]
        line = "  ".join(h.rjust(w) for h, w in zip(heads, widths))
        vals = "  ".join(v.rjust(w) for v, w in zip(row, widths))
        timing = (f"matching  mean {self.matching_seconds.mean * 1e6:.1f} us  "
                  f"max {self.matching_seconds.max * 1e6:.1f} us\n"
                  f"substitution  mean {self.substitution_seconds.mean * 1e6:.1f} us  "
                  f"max {self.substitution_seconds.max * 1e6:.1f} us")
        return f"{line}\n{vals}\n{timing}"


@dataclass(frozen=True)
class Outcome:
    index: int
    category: Category
    dissimilarity: float
    match_seconds: float
    substitution_seconds: float


def report_from(outcomes: Sequence[Outcome], strategy: str = "", folds: int = 0,
                seed: int = 0) -> AccuracyReport:
    counts = {c.value: 0 for c in CATEGORIES}
    for o in outcomes:
        counts[o.category.value] += 1
    off = [o.dissimilarity for o in outcomes if o.category is not Category.IDENTICAL]
    return AccuracyReport(
        counts, len(outcomes),
        statistics.fmean(off) if off else 0.0, max(off) if off else 0.0,
        LatencyStats.of([o.match_seconds for o in outcomes]),
        LatencyStats.of([o.substitution_seconds for o in outcomes]),
        strategy, folds, seed)


# ---------------------------------------------------------------- cross-validation

def fold_assignment(n: int, k: int, seed: int) -> list[list[int]]:
    """Seeded shuffle split into k near-equal held-out groups."""
    order = list(range(n))
    random.Random(seed).shuffle(order)
    return [sorted(order[i::k]) for i in range(k)]


def _score(model: ServiceModel, lib: TraceLibrary, held: Sequence[int],
           validator: DirectoryProtocolSpec | None) -> list[Outcome]:
    out = []
    for i in held:
        x = lib[i]
        reply = respond(model, x.request)
        expected = None if x.is_no_response else x.response
        cat = categorize(expected, reply.payload, x.request, validator)
        if reply.payload is None or expected is None:
            d = 0.0 if reply.payload == expected else 1.0
        elif reply.payload or expected:
            d = dissimilarity_ratio(expected, reply.payload)
        else:
            d = 0.0
        out.append(Outcome(i, cat, d, reply.match_seconds, reply.substitution_seconds))
    return out


def run_cross_validation(lib: TraceLibrary, config: AnalysisConfig = AnalysisConfig(), k: int = 10,
                         seed: int = 0, validator: DirectoryProtocolSpec | None = DIRECTORY,
                         noise: float = 0.0, workers: int = 1) -> AccuracyReport:
    """k-fold cross-validation; each fold is held out once and answered by a
    model built from the rest.

    Pairwise matrices are computed once on the whole library and sliced per
    fold, which gives the same values as recomputing them. ``noise`` swaps
    that fraction of each cluster's members before centroids and prototypes
    are derived.
    """
    if k < 2:
        raise ValueError("k ≥ 2 required")
    if len(lib) < k:
        raise ValueError(f"library of {len(lib)} interactions is smaller than k={k}")
    folds = fold_assignment(len(lib), k, seed)
    res_dm = req_dm = None
    if config.strategy is not Strategy.WHOLE_LIBRARY and len(lib) > 2:
        req_dm = pairwise_ratios(lib.requests, config.normalization)
        res_dm = build_matrix(lib, Basis.RESPONSE, config.normalization).values

    def run_fold(t: int) -> list[Outcome]:
        held = folds[t]
        held_set = set(held)
        train = [i for i in range(len(lib)) if i not in held_set]
        assert not held_set.intersection(train), "held-out interaction leaked into training"
        sub = lib.subset(train)
        if res_dm is None:
            model = analyze(sub, config)
        else:
            ix = np.ix_(train, train)
            model = analyze(sub, config, res_dm[ix], req_dm[ix])
            if noise > 0:
                model = rebuild_with_noise(model, req_dm[ix], noise, seed + t)
        return _score(model, lib, held, validator)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            per_fold = list(pool.map(run_fold, range(k)))
    else:
        per_fold = [run_fold(t) for t in range(k)]
    outcomes = [o for fold in per_fold for o in fold]
    return report_from(outcomes, config.strategy.value, k, seed)


# ---------------------------------------------------------------- noise

def inject_noise(clusters: ClusterSet, ratio: float, seed: int = 0) -> ClusterSet:
    """Swap members between clusters so each ends up with ceil(ratio * size) foreign members.

    Swaps are one-for-one, so sizes and total membership are preserved. Each
    swap serves the two clusters with the largest outstanding quota, which
    spreads the noise evenly instead of piling it onto small clusters. A quota
    that no other cluster can match (one cluster dwarfing the rest) is left
    partly unfilled.
    """
    if not 0 <= ratio < 0.5:
        raise ValueError("noise ratio must lie in [0, 0.5)")
    groups = [list(c.members) for c in clusters]
    if ratio == 0:
        return ClusterSet.of(groups)
    if len(groups) < 2:
        raise ValueError("nowhere to swap: need at least two clusters")
    rng = random.Random(seed)
    need = [math.ceil(ratio * len(g)) for g in groups]
    # natives still available for swapping out, in random order
    natives = [rng.sample(range(len(g)), len(g)) for g in groups]
    while True:
        ranked = sorted((c for c in range(len(groups)) if need[c] > 0 and natives[c]),
                        key=lambda c: (-need[c], c))
        if len(ranked) < 2:
            break
        a, b = ranked[0], ranked[1]
        i, j = natives[a].pop(), natives[b].pop()
        groups[a][i], groups[b][j] = groups[b][j], groups[a][i]
        need[a] -= 1
        need[b] -= 1
    return ClusterSet.of(groups)


def rebuild_with_noise(model: ServiceModel, request_matrix, ratio: float, seed: int) -> ServiceModel:
    """Perturb a model's clusters, then redo centroids and prototypes on the noisy membership."""
    if len(model.clusters) < 2:
        return model
    noisy = inject_noise(model.clusters, ratio, seed)
    cfg = model.config
    req_dm = np.asarray(request_matrix)
    clusters = ClusterSet(tuple(Cluster(c.members, select_centroid(c.members, req_dm)) for c in noisy))
    protos = ()
    if cfg.strategy is Strategy.CONSENSUS_WEIGHTED:
        protos = tuple(
            build_prototype([model.library[i].request for i in c.members], cfg.f, cfg.b, cfg.c,
                            req_dm[np.ix_(list(c.members), list(c.members))], k, cfg.msa)[0]
            for k, c in enumerate(clusters))
    return ServiceModel(model.library, cfg, clusters, protos, model.order)


def dump_report(report: AccuracyReport, stream, timings: bool = True) -> None:
    json.dump(report.to_json(timings), stream, indent=1, sort_keys=True)
    stream.write("\n")

