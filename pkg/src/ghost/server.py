"""Asyncio TCP replay server fronting a ServiceModel."""
from __future__ import annotations

import asyncio
import enum
import logging
import os
import signal
import struct
import time
from dataclasses import dataclass

from .engine import ServiceModel, respond

log = logging.getLogger("ghost.server")


class FramingMode(enum.Enum):
    CONNECTION = "conn"
    LENGTH_PREFIX = "len32"
    DELIMITER = "delim"


@dataclass(frozen=True)
class Framing:
    mode: FramingMode = FramingMode.LENGTH_PREFIX
    delimiter: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "mode", FramingMode(self.mode))
        if self.mode is FramingMode.DELIMITER and not self.delimiter:
            raise ValueError("delimiter framing needs a non-empty delimiter")
        if self.mode is not FramingMode.DELIMITER and self.delimiter:
            raise ValueError("only delimiter framing takes a delimiter")

    @classmethod
    def parse(cls, text: str) -> "Framing":
        """``conn``, ``len32`` or ``delim:<hex>``."""
        if text.startswith("delim:"):
            try:
                return cls(FramingMode.DELIMITER, bytes.fromhex(text[6:]))
            except ValueError as exc:
                raise ValueError(f"bad delimiter hex in {text!r}") from exc
        try:
            return cls(FramingMode(text))
        except ValueError:
            raise ValueError(f"unknown framing {text!r}; use conn, len32 or delim:<hex>") from None

    def encode(self, payload: bytes) -> bytes:
        if self.mode is FramingMode.LENGTH_PREFIX:
            return struct.pack(">I", len(payload)) + payload
        if self.mode is FramingMode.DELIMITER:
            return payload + self.delimiter
        return payload


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 0
    framing: Framing = Framing()
    idle_timeout_ms: int = 30_000
    max_message_bytes: int = 1 << 20

    def __post_init__(self):
        if self.max_message_bytes <= 0:
            raise ValueError("max_message_bytes must be positive")
        if self.idle_timeout_ms <= 0:
            raise ValueError("idle_timeout_ms must be positive")


def parse_listen(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host or "127.0.0.1", int(port)


class OversizeMessage(Exception):
    pass


class ReplayServer:
    def __init__(self, model: ServiceModel, cfg: ServerConfig = ServerConfig()):
        self.model = model
        self.cfg = cfg
        self._server: asyncio.AbstractServer | None = None
        self._handlers: set[asyncio.Task] = set()
        self._busy: set[asyncio.Task] = set()

    @property
    def port(self) -> int:
        assert self._server is not None
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> None:
        try:
            self._server = await asyncio.start_server(
                self._handle, self.cfg.host, self.cfg.port, limit=self.cfg.max_message_bytes + 64)
        except OSError as exc:
            raise RuntimeError(f"cannot listen on {self.cfg.host}:{self.cfg.port}: {exc}") from exc
        log.info("listening host=%s port=%d framing=%s", self.cfg.host, self.port, self.cfg.framing.mode.value)

    async def stop(self) -> None:
        """Stop accepting and let in-flight requests finish."""
        if self._server is None:
            return
        self._server.close()
        # idle connections are dropped, ones mid-request finish their reply
        for t in self._handlers - self._busy:
            t.cancel()
        if self._handlers:
            await asyncio.gather(*self._handlers, return_exceptions=True)
        await self._server.wait_closed()

    async def _read_frame(self, reader: asyncio.StreamReader) -> bytes | None:
        cfg = self.cfg
        mode = cfg.framing.mode
        if mode is FramingMode.CONNECTION:
            data = await reader.read(cfg.max_message_bytes + 1)
            chunks = [data]
            total = len(data)
            while data:
                if total > cfg.max_message_bytes:
                    raise OversizeMessage(total)
                data = await reader.read(cfg.max_message_bytes + 1 - total)
                chunks.append(data)
                total += len(data)
            body = b"".join(chunks)
            return body if body else None
        if mode is FramingMode.LENGTH_PREFIX:
            try:
                head = await reader.readexactly(4)
            except asyncio.IncompleteReadError as exc:
                if exc.partial:
                    log.warning("truncated length prefix")
                return None
            (size,) = struct.unpack(">I", head)
            if size > cfg.max_message_bytes:
                raise OversizeMessage(size)
            try:
                return await reader.readexactly(size)
            except asyncio.IncompleteReadError:
                log.warning("connection closed mid-message")
                return None
        delim = cfg.framing.delimiter
        try:
            frame = await reader.readuntil(delim)
        except asyncio.IncompleteReadError:
            return None
        except asyncio.LimitOverrunError as exc:
            raise OversizeMessage(exc.consumed) from exc
        body = frame[: -len(delim)]
        if len(body) > cfg.max_message_bytes:
            raise OversizeMessage(len(body))
        return body

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        task = asyncio.current_task()
        self._handlers.add(task)
        peer = writer.get_extra_info("peername")
        peer_s = f"{peer[0]}:{peer[1]}" if isinstance(peer, tuple) else str(peer)
        timeout = self.cfg.idle_timeout_ms / 1000
        try:
            while True:
                try:
                    request = await asyncio.wait_for(self._read_frame(reader), timeout)
                except asyncio.TimeoutError:
                    log.info("idle timeout peer=%s", peer_s)
                    break
                except OversizeMessage as exc:
                    log.warning("oversize message peer=%s size=%s cap=%d; closing",
                                peer_s, exc.args[0], self.cfg.max_message_bytes)
                    break
                if request is None:
                    break
                self._busy.add(task)
                t0 = time.perf_counter()
                reply = respond(self.model, request)
                if reply.payload is not None:
                    writer.write(self.cfg.framing.encode(reply.payload))
                    await writer.drain()
                self._busy.discard(task)
                log.info("ts=%.6f peer=%s req_len=%d cluster=%d distance=%.6f latency_us=%d sent=%s",
                         time.time(), peer_s, len(request), reply.match.chosen, reply.match.distance,
                         int((time.perf_counter() - t0) * 1e6),
                         "none" if reply.payload is None else len(reply.payload))
                if self.cfg.framing.mode is FramingMode.CONNECTION:
                    break
        except (ConnectionError, asyncio.CancelledError) as exc:
            log.info("connection dropped peer=%s (%s)", peer_s, type(exc).__name__)
        except Exception:  # keep serving other clients whatever one request did
            log.exception("request handling failed peer=%s", peer_s)
        finally:
            self._handlers.discard(task)
            self._busy.discard(task)
            try:
                writer.close()
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass


def configure_logging() -> None:
    level = os.environ.get("GHOST_LOG", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s %(message)s")


async def _serve_forever(model: ServiceModel, cfg: ServerConfig) -> None:
    server = ReplayServer(model, cfg)
    await server.start()
    stop = asyncio.Event()
    loop = asyncio.get_running_loop()
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            loop.add_signal_handler(sig, stop.set)
        except (NotImplementedError, RuntimeError):
            pass
    await stop.wait()
    log.info("shutting down; draining %d connection(s)", len(server._handlers))
    await server.stop()


def serve(model: ServiceModel, cfg: ServerConfig) -> None:
    """Run until SIGINT or SIGTERM."""
    asyncio.run(_serve_forever(model, cfg))
