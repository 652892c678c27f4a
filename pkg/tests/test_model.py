import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from ghost.alignment import WILDCARD
from ghost.clustering import Cluster, ClusterSet
from ghost.consensus import ConsensusPrototype
from ghost.engine import AnalysisConfig, ServiceModel, Strategy, analyze, generate_response
from ghost.evaluation import generate_library
from ghost.model import ModelFormatError, load_model, model_from_json, model_to_json, save_model
from ghost.samples import directory_library
from ghost.trace import Interaction, TraceLibrary


def round_trip(model):
    buf = io.StringIO()
    save_model(model, buf)
    return load_model(io.StringIO(buf.getvalue())), buf.getvalue()


@pytest.mark.parametrize("strategy", list(Strategy))
def test_running_library_round_trips(strategy):
    model = analyze(directory_library(), AnalysisConfig(strategy, boundaries=(5,)))
    back, text = round_trip(model)
    assert back == model
    assert round_trip(back)[1] == text
    probe = b"{id:37,op:A,sn:Durand}"
    assert generate_response(back, probe) == generate_response(model, probe)


def test_empty_model_round_trips():
    model = ServiceModel(TraceLibrary(), AnalysisConfig(Strategy.WHOLE_LIBRARY))
    assert round_trip(model)[0] == model


def test_version_mismatch_names_both():
    doc = model_to_json(analyze(directory_library(), AnalysisConfig(Strategy.WHOLE_LIBRARY)))
    doc["version"] = 7
    with pytest.raises(ModelFormatError, match="version 7 .*expected 1"):
        model_from_json(doc)


def test_truncated_file():
    buf = io.StringIO()
    save_model(analyze(directory_library(), AnalysisConfig()), buf)
    with pytest.raises(json.JSONDecodeError):
        load_model(io.StringIO(buf.getvalue()[:-40]))


def test_missing_key_is_format_error():
    doc = model_to_json(analyze(directory_library(), AnalysisConfig()))
    del doc["library"]
    with pytest.raises(ModelFormatError):
        model_from_json(doc)


def test_wildcards_survive_zero_bytes():
    lib = TraceLibrary.from_pairs([(b"\x00a", b"r"), (b"\x00b", b"r")])
    proto = ConsensusPrototype((0, WILDCARD, 97), (1.0, 0.5, 0.25))
    model = ServiceModel(lib, AnalysisConfig(boundaries=()), ClusterSet((Cluster((0, 1), 0),)), (proto,), (0, 1))
    back, _ = round_trip(model)
    assert back.prototypes[0].symbols == (0, WILDCARD, 97)


symbols = st.lists(st.one_of(st.just(WILDCARD), st.integers(0, 255)), min_size=1, max_size=12)
weights = st.floats(min_value=1e-300, max_value=1.0, allow_subnormal=False)


@st.composite
def fuzzed_models(draw):
    n = draw(st.integers(1, 6))
    lib = TraceLibrary(tuple(
        Interaction.silent(draw(st.binary(min_size=1, max_size=8))) if draw(st.booleans())
        else Interaction(draw(st.binary(min_size=1, max_size=8)), draw(st.binary(max_size=8)))
        for _ in range(n)), draw(st.text(max_size=5)), draw(st.text(max_size=5)))
    cut = draw(st.integers(1, n))
    groups = [tuple(range(cut)), tuple(range(cut, n))] if cut < n else [tuple(range(n))]
    clusters = ClusterSet(tuple(Cluster(g, draw(st.sampled_from(g))) for g in groups))
    protos = []
    for k in range(len(groups)):
        s = draw(symbols)
        protos.append(ConsensusPrototype(tuple(s), tuple(draw(weights) for _ in s),
                                         draw(st.floats(0.01, 1.0)), k))
    cfg = AnalysisConfig(Strategy.CONSENSUS_WEIGHTED, boundaries=(cut,) if cut < n else (),
                         f=draw(st.floats(0.01, 1.0)), alpha=draw(st.one_of(st.none(), st.floats(0.1, 3))))
    return ServiceModel(lib, cfg, clusters, tuple(protos), tuple(range(n)))


@settings(max_examples=200, deadline=None)
@given(fuzzed_models())
def test_fuzzed_models_round_trip(model):
    back, text = round_trip(model)
    assert back == model
    assert round_trip(back)[1] == text


def test_generated_library_model_is_deterministic():
    lib = generate_library(80, seed=5)
    a = round_trip(analyze(lib, AnalysisConfig()))[1]
    b = round_trip(analyze(lib, AnalysisConfig()))[1]
    assert a == b
