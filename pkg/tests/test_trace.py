import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from ghost.samples import MIXED_PAIRS
from ghost.trace import (Direction, Interaction, TraceFormatError, TraceLibrary, normalize,
                         parse_trace_file, serialize_trace)

C, S = Direction.CLIENT_TO_SERVER, Direction.SERVER_TO_CLIENT


def test_normalize_concatenates_and_marks_silence():
    out = normalize([(C, b"A"), (S, b"B"), (S, b"C"), (C, b"D"), (C, b"E"), (S, b"F")])
    assert out == [Interaction(b"A", b"BC"), Interaction.silent(b"D"), Interaction(b"E", b"F")]


def test_trailing_request_is_silent():
    assert normalize([(C, b"A")]) == [Interaction.silent(b"A")]


def test_orphan_response_names_offset():
    with pytest.raises(TraceFormatError, match="orphan response at event offset 0"):
        normalize([(S, b"x"), (C, b"y")])


@pytest.mark.parametrize("rows", [MIXED_PAIRS[:10], MIXED_PAIRS[10:]], ids=["trace1", "trace2"])
def test_recorded_traces_normalize_to_rows(rows):
    events = []
    for req, res in rows:
        events += [(C, req.encode()), (S, res.encode())]
    got = normalize(events)
    assert [(x.request.decode(), x.response.decode()) for x in got] == list(rows)


def test_parse_examples():
    lib = parse_trace_file(['{"request":"e2lkOjF9","responses":["T0s="]}\n',
                            '{"request":"QQ==","responses":[]}\n'])
    assert lib[0] == Interaction(b"{id:1}", b"OK")
    assert lib[1].is_no_response and lib[1].request == b"A"


def test_multiple_responses_concatenate_on_load():
    lib = parse_trace_file(['{"request":"QQ==","responses":["Qg==","Qw=="]}'])
    assert lib[0].response == b"BC"


@pytest.mark.parametrize("line, needle", [
    ("{not json", "line 1: malformed JSON"),
    ('{"request":"QQ=="}', "expected object"),
    ('{"request":"!!","responses":[]}', "invalid base64 in field 'request'"),
    ('{"request":"QQ==","responses":["%%"]}', "responses[0]"),
    ('{"request":"","responses":[]}', "empty request"),
])
def test_parse_errors(line, needle):
    with pytest.raises(TraceFormatError) as exc:
        parse_trace_file(["\n", line])
    assert needle.replace("line 1", "line 2") in str(exc.value)


def test_error_reports_real_line_number():
    with pytest.raises(TraceFormatError, match="line 3"):
        parse_trace_file(['{"request":"QQ==","responses":[]}', "", "oops"])


def test_silent_interaction_cannot_carry_bytes():
    with pytest.raises(ValueError):
        Interaction(b"a", b"b", True)


interactions = st.builds(
    lambda req, res, silent: Interaction.silent(req) if silent else Interaction(req, res),
    st.binary(min_size=1, max_size=40), st.binary(max_size=40), st.booleans())


@settings(max_examples=200)
@given(st.lists(interactions, max_size=12))
def test_serialize_parse_round_trip(items):
    lib = TraceLibrary(tuple(items))
    buf = io.StringIO()
    serialize_trace(lib, buf)
    text = buf.getvalue()
    back = parse_trace_file(io.StringIO(text))
    assert back.interactions == lib.interactions
    again = io.StringIO()
    serialize_trace(back, again)
    assert again.getvalue() == text


@settings(max_examples=200)
@given(st.lists(st.tuples(st.sampled_from([C, S]), st.binary(max_size=8)), max_size=20))
def test_normalize_preserves_bytes(events):
    if events and events[0][0] is S:
        with pytest.raises(TraceFormatError):
            normalize(events)
        return
    out = normalize(events)
    assert len(out) == sum(d is C for d, _ in events)
    flat = b"".join(x.request + x.response for x in out)
    assert flat == b"".join(p for _, p in events)


def test_serialized_lines_carry_index():
    buf = io.StringIO()
    serialize_trace(TraceLibrary.from_pairs([("a", "b"), ("c", None)]), buf)
    rows = [json.loads(l) for l in buf.getvalue().splitlines()]
    assert [r["index"] for r in rows] == [0, 1]
    assert rows[1]["responses"] == []
