"""Offline analysis and runtime response generation for the three strategies."""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels
from .alignment import WeightedMatchConstants, score_bounds
from .clustering import (Basis, Cluster, ClusterSet, PartitionConfig, bea_reorder, build_matrix,
                         pairwise_ratios, partition, select_centroid, vat_reorder_prim)
from .consensus import ConsensusPrototype, MsaScoring, build_prototype
from .trace import Interaction, TraceLibrary
from .translation import DEFAULT_MIN_LEN, translate


class Strategy(enum.Enum):
    WHOLE_LIBRARY = "whole"
    CLUSTER_CENTROID = "centroid"
    CONSENSUS_WEIGHTED = "consensus"


@dataclass(frozen=True)
class AnalysisConfig:
    strategy: Strategy = Strategy.CONSENSUS_WEIGHTED
    reorder: str = "prim"
    boundaries: tuple[int, ...] | None = None  # None means automatic partitioning
    tau: float | None = None
    alpha: float | None = 1.5
    min_block: int = 3
    f: float = 0.8
    b: float = 1.0
    c: float = 10.0
    min_len: int = DEFAULT_MIN_LEN
    constants: WeightedMatchConstants = WeightedMatchConstants()
    msa: MsaScoring = MsaScoring()
    normalization: str = "padded"

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if self.reorder not in ("prim", "bea"):
            raise ValueError(f"unknown reorder {self.reorder!r}")
        if self.boundaries is not None:
            object.__setattr__(self, "boundaries", tuple(int(b) for b in self.boundaries))
        if not 0 < self.f <= 1:
            raise ValueError("f must lie in (0, 1]")
        if self.min_len < 1:
            raise ValueError("min_len must be >= 1")

    def partition_config(self) -> PartitionConfig:
        if self.boundaries is None:
            return PartitionConfig(auto=True, tau=self.tau, alpha=self.alpha, min_block=self.min_block)
        return PartitionConfig(boundaries=self.boundaries)


@dataclass(frozen=True)
class ServiceModel:
    library: TraceLibrary
    config: AnalysisConfig
    clusters: ClusterSet = ClusterSet()
    prototypes: tuple[ConsensusPrototype, ...] = ()
    order: tuple[int, ...] = ()

    def __post_init__(self):
        s = self.config.strategy
        if s is not Strategy.WHOLE_LIBRARY:
            if not len(self.clusters) or any(c.centroid is None for c in self.clusters):
                raise ValueError("cluster strategies need clusters with centroids")
        if s is Strategy.CONSENSUS_WEIGHTED and len(self.prototypes) != len(self.clusters):
            raise ValueError("consensus strategy needs one prototype per cluster")

    @property
    def strategy(self) -> Strategy:
        return self.config.strategy

    @cached_property
    def _packed_requests(self):
        reqs = self.library.requests
        lens = np.array([len(r) for r in reqs], dtype=np.int64)
        offsets = np.zeros(len(reqs) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum(lens)
        buf = np.frombuffer(b"".join(reqs), dtype=np.uint8) if reqs else np.zeros(0, np.uint8)
        return buf, offsets, lens

    @cached_property
    def _packed_prototypes(self):
        k = self.config.constants
        sizes = [len(p) for p in self.prototypes]
        offsets = np.zeros(len(sizes) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum(sizes)
        syms = np.array([s for p in self.prototypes for s in p.symbols], dtype=np.int16)
        weights = np.array([w for p in self.prototypes for w in p.weights], dtype=np.float64)
        bounds = [score_bounds(p.symbols, p.weights, k) for p in self.prototypes]
        if any(not hi > lo for lo, hi in bounds):
            raise ValueError("degenerate prototype: no concrete column to match")
        lo = np.array([b[0] for b in bounds])
        hi = np.array([b[1] for b in bounds])
        return syms, weights, offsets, lo, hi

    @property
    def centroids(self) -> tuple[int, ...]:
        return tuple(c.centroid for c in self.clusters)

    def centroid_interaction(self, cluster_id: int) -> Interaction:
        return self.library[self.clusters[cluster_id].centroid]


@dataclass(frozen=True)
class MatchResult:
    chosen: int  # cluster id, or interaction index for whole-library matching
    distance: float
    candidates: tuple[float, ...] = field(default=(), repr=False)


def _argmin(dists: Sequence[float]) -> MatchResult:
    arr = np.asarray(dists, dtype=np.float64)
    k = int(np.argmin(arr))
    return MatchResult(k, float(arr[k]), tuple(float(x) for x in arr))


def _ratios_to(incoming: bytes, buf, offsets, lens, indices, normalization) -> np.ndarray:
    msg = np.frombuffer(bytes(incoming), dtype=np.uint8)
    idx = np.asarray(indices, dtype=np.int64)
    lcs = np.zeros(len(idx), dtype=np.int64)
    _kernels.lcs_against(msg, buf, offsets, idx, lcs)
    la, lb = len(msg), lens[idx]
    if normalization == "padded":
        longest = np.maximum(la, lb)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(longest > 0, (longest - lcs) / (2.0 * longest), 0.0)
    total = la + lb
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, (total - 2.0 * lcs) / total, 0.0)


def analyze(lib: TraceLibrary, config: AnalysisConfig = AnalysisConfig(),
            response_matrix=None, request_matrix=None) -> ServiceModel:
    """Cluster, pick centroids and derive prototypes.

    Precomputed matrices (e.g. sliced from a larger library) may be passed in
    to skip the pairwise alignments.
    """
    if len(lib) == 0:
        raise ValueError("empty trace library")
    if config.strategy is Strategy.WHOLE_LIBRARY:
        return ServiceModel(lib, config)
    n = len(lib)
    if n == 1:
        clusters = ClusterSet((Cluster((0,), 0),))
        order: list[int] = [0]
        req_dm = np.zeros((1, 1))
    else:
        res_dm = response_matrix if response_matrix is not None else \
            build_matrix(lib, Basis.RESPONSE, config.normalization).values
        req_dm = request_matrix if request_matrix is not None else \
            pairwise_ratios(lib.requests, config.normalization)
        order = vat_reorder_prim(res_dm) if config.reorder == "prim" else bea_reorder(res_dm)
        blocks = partition(res_dm, order, config.partition_config())
        if any(len(c.members) == 0 for c in blocks):
            raise ValueError("empty cluster after partitioning")
        clusters = ClusterSet(tuple(Cluster(c.members, select_centroid(c.members, req_dm))
                                    for c in blocks))
    protos: list[ConsensusPrototype] = []
    if config.strategy is Strategy.CONSENSUS_WEIGHTED:
        req_dm = np.asarray(req_dm)
        for k, c in enumerate(clusters):
            members = list(c.members)
            proto, _ = build_prototype([lib[i].request for i in members], config.f, config.b, config.c,
                                       req_dm[np.ix_(members, members)], k, config.msa)
            protos.append(proto)
    return ServiceModel(lib, config, clusters, tuple(protos), tuple(int(i) for i in order))


def match_whole_library(model: ServiceModel, incoming: bytes) -> MatchResult:
    buf, offsets, lens = model._packed_requests
    return _argmin(_ratios_to(incoming, buf, offsets, lens, range(len(model.library)),
                              model.config.normalization))


def match_cluster_centroid(model: ServiceModel, incoming: bytes) -> MatchResult:
    buf, offsets, lens = model._packed_requests
    idx = [c.centroid for c in model.clusters]
    return _argmin(_ratios_to(incoming, buf, offsets, lens, idx, model.config.normalization))


def match_consensus_weighted(model: ServiceModel, incoming: bytes) -> MatchResult:
    # same arithmetic as alignment.relative_distance, batched over prototypes
    k = model.config.constants
    syms, weights, offsets, lo, hi = model._packed_prototypes
    scores = np.zeros(len(lo))
    _kernels.weighted_scores(syms, weights, offsets, np.frombuffer(bytes(incoming), dtype=np.uint8),
                             float(k.M), float(k.D), float(k.X), scores)
    return _argmin(np.clip(1.0 - (scores - lo) / (hi - lo), 0.0, 1.0))


def match(model: ServiceModel, incoming: bytes) -> MatchResult:
    s = model.strategy
    if s is Strategy.WHOLE_LIBRARY:
        return match_whole_library(model, incoming)
    if s is Strategy.CLUSTER_CENTROID:
        return match_cluster_centroid(model, incoming)
    return match_consensus_weighted(model, incoming)


@dataclass(frozen=True)
class Reply:
    payload: bytes | None  # None: the recorded exchange had no response
    match: MatchResult
    source: int  # library index of the interaction whose response was used
    match_seconds: float
    substitution_seconds: float


def respond(model: ServiceModel, incoming: bytes) -> Reply:
    incoming = bytes(incoming)
    t0 = time.perf_counter()
    m = match(model, incoming)
    t1 = time.perf_counter()
    source = m.chosen if model.strategy is Strategy.WHOLE_LIBRARY else model.clusters[m.chosen].centroid
    x = model.library[source]
    if x.is_no_response:
        payload = None
    else:
        payload = translate(x.request, x.response, incoming, model.config.min_len)
    t2 = time.perf_counter()
    return Reply(payload, m, source, t1 - t0, t2 - t1)


def generate_response(model: ServiceModel, incoming: bytes) -> bytes | None:
    """Synthesized response bytes, or None when nothing should be sent."""
    return respond(model, incoming).payload
