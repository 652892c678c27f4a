"""JSON persistence for analysed service models."""
from __future__ import annotations

import base64
import json
from dataclasses import asdict
from typing import IO

from .alignment import WILDCARD, WeightedMatchConstants
from .clustering import Cluster, ClusterSet
from .consensus import ConsensusPrototype, MsaScoring
from .engine import AnalysisConfig, ServiceModel, Strategy
from .trace import interaction_record, library_from_records

MODEL_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _prototype_json(p: ConsensusPrototype) -> dict:
    raw = bytes(0 if s == WILDCARD else s for s in p.symbols)
    return {
        "symbols": base64.b64encode(raw).decode("ascii"),
        "wildcard_mask": "".join("1" if s == WILDCARD else "0" for s in p.symbols),
        # repr of a float round-trips exactly through json
        "weights": list(p.weights),
        "f": p.f,
        "cluster": p.cluster,
    }


def _prototype_from(d: dict) -> ConsensusPrototype:
    raw = base64.b64decode(d["symbols"], validate=True)
    mask = d["wildcard_mask"]
    if len(mask) != len(raw):
        raise ModelFormatError("wildcard mask length differs from symbols")
    symbols = tuple(WILDCARD if m == "1" else b for b, m in zip(raw, mask))
    return ConsensusPrototype(symbols, tuple(float(w) for w in d["weights"]), d["f"], d["cluster"])


def _config_json(cfg: AnalysisConfig) -> dict:
    out = asdict(cfg)
    out["strategy"] = cfg.strategy.value
    out["boundaries"] = None if cfg.boundaries is None else list(cfg.boundaries)
    return out


def _config_from(d: dict) -> AnalysisConfig:
    d = dict(d)
    d["strategy"] = Strategy(d["strategy"])
    d["constants"] = WeightedMatchConstants(**d["constants"])
    d["msa"] = MsaScoring(**d["msa"])
    if d.get("boundaries") is not None:
        d["boundaries"] = tuple(d["boundaries"])
    return AnalysisConfig(**d)


def model_to_json(model: ServiceModel) -> dict:
    return {
        "version": MODEL_VERSION,
        "strategy": model.strategy.value,
        "config": _config_json(model.config),
        "order": list(model.order),
        "clusters": [
            {"members": list(c.members), "centroid": c.centroid,
             "prototype": _prototype_json(model.prototypes[k]) if model.prototypes else None}
            for k, c in enumerate(model.clusters)
        ],
        "library": {
            "capture_id": model.library.capture_id,
            "note": model.library.note,
            "interactions": [interaction_record(i, x) for i, x in enumerate(model.library)],
        },
    }


def model_from_json(doc: dict) -> ServiceModel:
    version = doc.get("version")
    if version != MODEL_VERSION:
        raise ModelFormatError(f"model version {version} is not supported (expected {MODEL_VERSION})")
    try:
        cfg = _config_from(doc["config"])
        if cfg.strategy.value != doc["strategy"]:
            raise ModelFormatError("strategy field disagrees with config")
        libdoc = doc["library"]
        lib = library_from_records(libdoc["interactions"])
        lib = type(lib)(lib.interactions, libdoc.get("capture_id") or "", libdoc.get("note") or "")
        clusters = ClusterSet(tuple(Cluster(tuple(c["members"]), c["centroid"]) for c in doc["clusters"]))
        protos = tuple(_prototype_from(c["prototype"]) for c in doc["clusters"] if c.get("prototype"))
        return ServiceModel(lib, cfg, clusters, protos, tuple(doc.get("order", ())))
    except (KeyError, TypeError) as e:
        raise ModelFormatError(f"malformed model: {e!r}") from e


def save_model(model: ServiceModel, stream: IO[str]) -> None:
    json.dump(model_to_json(model), stream, indent=1)
    stream.write("\n")


def load_model(stream: IO[str]) -> ServiceModel:
    return model_from_json(json.load(stream))
