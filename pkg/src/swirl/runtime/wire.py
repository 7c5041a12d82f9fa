"""Message framing.

A frame is a 4-byte big-endian body length ``N`` followed by ``N`` bytes: the
port id, data id, source and destination location as 2-byte big-endian
length-prefixed UTF-8 strings, then the raw payload up to the end of frame.
Barrier frames use ``port == BARRIER_PORT`` and carry the step id as data id.
"""

from __future__ import annotations

import asyncio
import struct
from dataclasses import dataclass

BARRIER_PORT = "__barrier__"
MAX_FRAME = 1 << 30


class FrameCorruption(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    port: str
    data: str
    src: str
    dst: str
    payload: bytes = b""

    @property
    def is_barrier(self) -> bool:
        return self.port == BARRIER_PORT


def encode_frame(f: Frame) -> bytes:
    body = bytearray()
    for s in (f.port, f.data, f.src, f.dst):
        raw = s.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"field too long: {s[:20]!r}...")
        body += struct.pack(">H", len(raw)) + raw
    body += f.payload
    return struct.pack(">I", len(body)) + bytes(body)


def decode_body(body: bytes) -> Frame:
    fields = []
    pos = 0
    for _ in range(4):
        if pos + 2 > len(body):
            raise FrameCorruption("truncated field header")
        (n,) = struct.unpack_from(">H", body, pos)
        pos += 2
        if pos + n > len(body):
            raise FrameCorruption("field runs past end of frame")
        try:
            fields.append(body[pos : pos + n].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise FrameCorruption(str(exc)) from None
        pos += n
    return Frame(*fields, payload=bytes(body[pos:]))


def decode_frame(buf: bytes) -> tuple[Frame, bytes]:
    """Decode one frame from the head of ``buf``; return it and the rest."""
    if len(buf) < 4:
        raise FrameCorruption("truncated length prefix")
    (n,) = struct.unpack_from(">I", buf)
    if len(buf) < 4 + n:
        raise FrameCorruption("truncated frame body")
    return decode_body(buf[4 : 4 + n]), buf[4 + n :]


async def read_frame(reader: asyncio.StreamReader) -> Frame | None:
    """Next frame, or None on clean end of stream."""
    try:
        head = await reader.readexactly(4)
    except asyncio.IncompleteReadError as exc:
        if exc.partial:
            raise FrameCorruption("truncated length prefix") from None
        return None
    (n,) = struct.unpack(">I", head)
    if n > MAX_FRAME:
        raise FrameCorruption(f"frame length {n} exceeds limit")
    try:
        body = await reader.readexactly(n)
    except asyncio.IncompleteReadError:
        raise FrameCorruption("truncated frame body") from None
    return decode_body(body)
