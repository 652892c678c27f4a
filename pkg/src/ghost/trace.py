"""Messages, interactions, trace libraries and the JSONL trace format."""
from __future__ import annotations

import base64
import binascii
import enum
import json
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence


class TraceFormatError(ValueError):
    pass


class Direction(enum.Enum):
    CLIENT_TO_SERVER = "c2s"
    SERVER_TO_CLIENT = "s2c"


@dataclass(frozen=True)
class Interaction:
    request: bytes
    response: bytes = b""
    is_no_response: bool = False

    def __post_init__(self):
        object.__setattr__(self, "request", bytes(self.request))
        object.__setattr__(self, "response", bytes(self.response))
        if self.is_no_response and self.response:
            raise ValueError("a no-response interaction carries no response bytes")

    @classmethod
    def silent(cls, request: bytes) -> "Interaction":
        return cls(request, b"", True)


@dataclass(frozen=True)
class TraceLibrary:
    interactions: tuple[Interaction, ...] = ()
    capture_id: str = ""
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "interactions", tuple(self.interactions))

    def __len__(self):
        return len(self.interactions)

    def __getitem__(self, i):
        return self.interactions[i]

    def __iter__(self) -> Iterator[Interaction]:
        return iter(self.interactions)

    @property
    def requests(self) -> list[bytes]:
        return [x.request for x in self.interactions]

    def subset(self, indices: Sequence[int]) -> "TraceLibrary":
        return TraceLibrary(tuple(self.interactions[i] for i in indices), self.capture_id, self.note)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[bytes, bytes | None]], **meta) -> "TraceLibrary":
        """Build from (request, response) pairs; a ``None`` response means no response."""
        items = []
        for req, res in pairs:
            req = req.encode() if isinstance(req, str) else req
            if res is None:
                items.append(Interaction.silent(req))
            else:
                items.append(Interaction(req, res.encode() if isinstance(res, str) else res))
        return cls(tuple(items), **meta)


def normalize(events: Iterable[tuple[Direction, bytes]]) -> list[Interaction]:
    """Pair each request with the concatenation of the responses that follow it."""
    out: list[Interaction] = []
    request: bytes | None = None
    parts: list[bytes] = []

    def close():
        if request is None:
            return
        if parts:
            out.append(Interaction(request, b"".join(parts)))
        else:
            out.append(Interaction.silent(request))

    for offset, (direction, payload) in enumerate(events):
        direction = Direction(direction)
        if direction is Direction.CLIENT_TO_SERVER:
            close()
            request, parts = bytes(payload), []
        else:
            if request is None:
                raise TraceFormatError(f"orphan response at event offset {offset}")
            parts.append(bytes(payload))
    close()
    return out


def _decode(value, lineno: int, name: str) -> bytes:
    if not isinstance(value, str):
        raise TraceFormatError(f"line {lineno}: field {name!r} must be a base64 string")
    try:
        return base64.b64decode(value, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise TraceFormatError(f"line {lineno}: invalid base64 in field {name!r}") from exc


def parse_trace_file(stream: IO[str] | Iterable[str]) -> TraceLibrary:
    items = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
        if not isinstance(obj, dict) or "request" not in obj or "responses" not in obj:
            raise TraceFormatError(f"line {lineno}: expected object with 'request' and 'responses'")
        request = _decode(obj["request"], lineno, "request")
        if not request:
            raise TraceFormatError(f"line {lineno}: empty request message")
        if not isinstance(obj["responses"], list):
            raise TraceFormatError(f"line {lineno}: field 'responses' must be a list")
        parts = [_decode(v, lineno, f"responses[{k}]") for k, v in enumerate(obj["responses"])]
        if parts:
            items.append(Interaction(request, b"".join(parts)))
        else:
            items.append(Interaction.silent(request))
    return TraceLibrary(tuple(items))


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def interaction_record(i: int, x: Interaction) -> dict:
    return {"index": i, "request": _b64(x.request),
            "responses": [] if x.is_no_response else [_b64(x.response)]}


def serialize_trace(lib: TraceLibrary, stream: IO[str]) -> None:
    for i, x in enumerate(lib):
        stream.write(json.dumps(interaction_record(i, x), separators=(",", ":")) + "\n")


def library_from_records(records: list[dict]) -> TraceLibrary:
    return parse_trace_file(json.dumps(r) for r in records)
