"""Opaque service emulation: synthesize service responses from recorded request/response traffic."""
from .alignment import MATCHING, SUBSTITUTION, ScoringScheme, WeightedMatchConstants, dissimilarity_ratio, nw_align
from .clustering import Basis, Cluster, ClusterSet, DissimilarityMatrix, PartitionConfig, build_matrix
from .consensus import ConsensusPrototype, build_prototype
from .engine import AnalysisConfig, MatchResult, ServiceModel, Strategy, analyze, generate_response, respond
from .model import load_model, save_model
from .trace import Interaction, TraceFormatError, TraceLibrary, parse_trace_file, serialize_trace

__all__ = [
    "MATCHING", "SUBSTITUTION", "ScoringScheme", "WeightedMatchConstants", "dissimilarity_ratio", "nw_align",
    "Basis", "Cluster", "ClusterSet", "DissimilarityMatrix", "PartitionConfig", "build_matrix",
    "ConsensusPrototype", "build_prototype",
    "AnalysisConfig", "MatchResult", "ServiceModel", "Strategy", "analyze", "generate_response", "respond",
    "load_model", "save_model",
    "Interaction", "TraceFormatError", "TraceLibrary", "parse_trace_file", "serialize_trace",
]
