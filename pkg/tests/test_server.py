import asyncio
import random
import struct

import pytest

from ghost.engine import AnalysisConfig, analyze, generate_response
from ghost.evaluation import generate_library
from ghost.samples import directory_library
from ghost.server import Framing, FramingMode, ReplayServer, ServerConfig, parse_listen

from published import DURAND, DURAND_RESPONSE


@pytest.fixture(scope="module")
def running_model():
    return analyze(directory_library(), AnalysisConfig(boundaries=(5,)))


async def _exchange(port, framing, requests, half_close=False):
    reader, writer = await asyncio.open_connection("127.0.0.1", port)
    replies = []
    for req in requests:
        writer.write(framing.encode(req))
        await writer.drain()
        if framing.mode is FramingMode.LENGTH_PREFIX:
            (n,) = struct.unpack(">I", await reader.readexactly(4))
            replies.append(await reader.readexactly(n))
        elif framing.mode is FramingMode.DELIMITER:
            replies.append((await reader.readuntil(framing.delimiter))[:-len(framing.delimiter)])
    if framing.mode is FramingMode.CONNECTION:
        writer.write_eof()
        replies.append(await reader.read())
    writer.close()
    await writer.wait_closed()
    return replies


def serve_and(model, cfg, body):
    async def main():
        server = ReplayServer(model, cfg)
        await server.start()
        try:
            return await body(server)
        finally:
            await server.stop()
    return asyncio.run(main())


@pytest.mark.parametrize("framing", ["len32", "conn", "delim:0a", "delim:0d0a"])
def test_durand_over_the_wire(running_model, framing):
    f = Framing.parse(framing)
    got = serve_and(running_model, ServerConfig(framing=f), lambda s: _exchange(s.port, f, [DURAND]))
    assert got == [DURAND_RESPONSE]


def test_recorded_requests_echo_recorded_responses(running_model):
    lib = running_model.library
    f = Framing()
    centroids = [lib[c] for c in running_model.centroids]
    got = serve_and(running_model, ServerConfig(), lambda s: _exchange(s.port, f, [x.request for x in centroids]))
    assert got == [x.response for x in centroids]


def test_concurrent_clients_match_sequential_replay():
    lib = generate_library(80, seed=11)
    model = analyze(lib, AnalysisConfig())
    rng = random.Random(0)
    batches = [[rng.choice(lib).request for _ in range(10)] for _ in range(12)]
    expected = [[generate_response(model, r) for r in batch] for batch in batches]
    f = Framing()

    async def body(server):
        return await asyncio.gather(*(_exchange(server.port, f, b) for b in batches))

    assert serve_and(model, ServerConfig(), body) == expected


def test_oversize_message_closes_connection(running_model):
    async def body(server):
        reader, writer = await asyncio.open_connection("127.0.0.1", server.port)
        writer.write(struct.pack(">I", 1000))
        await writer.drain()
        rest = await reader.read()
        writer.close()
        # the server keeps accepting afterwards
        return rest, await _exchange(server.port, Framing(), [DURAND])

    rest, after = serve_and(running_model, ServerConfig(max_message_bytes=100), body)
    assert rest == b""
    assert after == [DURAND_RESPONSE]


def test_idle_connection_times_out(running_model):
    async def body(server):
        reader, writer = await asyncio.open_connection("127.0.0.1", server.port)
        data = await asyncio.wait_for(reader.read(), 2)
        writer.close()
        return data

    assert serve_and(running_model, ServerConfig(idle_timeout_ms=50), body) == b""


def test_fuzzed_requests_never_kill_the_server(running_model):
    rng = random.Random(1)
    probes = [bytes(rng.randrange(256) for _ in range(rng.randrange(0, 300))) for _ in range(60)]
    f = Framing()

    async def body(server):
        out = await _exchange(server.port, f, probes)
        return out, await _exchange(server.port, f, [DURAND])

    out, after = serve_and(running_model, ServerConfig(max_message_bytes=512), body)
    assert out == [generate_response(running_model, p) for p in probes]
    assert after == [DURAND_RESPONSE]


def test_silent_reply_writes_nothing():
    from ghost.trace import TraceLibrary
    lib = TraceLibrary.from_pairs([("{id:1,op:U}", None), ("{id:2,op:B}", "{id:2,op:BindRsp,result:Ok}")])
    model = analyze(lib, AnalysisConfig(strategy="whole"))
    f = Framing(FramingMode.CONNECTION)
    got = serve_and(model, ServerConfig(framing=f), lambda s: _exchange(s.port, f, [b"{id:9,op:U}"]))
    assert got == [b""]


def test_bind_failure_is_reported(running_model):
    async def body(server):
        clash = ReplayServer(running_model, ServerConfig(port=server.port))
        with pytest.raises(RuntimeError, match="cannot listen"):
            await clash.start()

    serve_and(running_model, ServerConfig(), body)


@pytest.mark.parametrize("text", ["tcp", "delim:", "delim:zz"])
def test_bad_framing(text):
    with pytest.raises(ValueError):
        Framing.parse(text)


def test_config_checks():
    with pytest.raises(ValueError):
        ServerConfig(max_message_bytes=0)
    assert parse_listen("0.0.0.0:9000") == ("0.0.0.0", 9000)
    assert parse_listen(":81") == ("127.0.0.1", 81)
    with pytest.raises(ValueError):
        parse_listen("localhost")
