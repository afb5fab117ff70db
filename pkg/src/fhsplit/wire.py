"""Split fronthaul transport framing: header codec, chunking, reassembly.

Datagram layout: a fixed 22-byte header followed by payload. All header
integers are big-endian (network order):

    offset  size  field
    0       8     timestamp      subframe identifier
    8       2     num_blocks     chunks composing the subframe
    10      2     content_type   payload format discriminator
    12      2     size           datagram bytes including this header
    14      8     sender_clock   sender clock at emission, nanoseconds

A datagram must fit a UDP payload, so size < 65508 (2^16 minus UDP and IP
headers). The header carries no block index: the sender emits chunks in
payload order and the receiver sequences them by arrival. Reordering is
detected only across subframes; an optional strict mode orders chunks by
their (monotonically increasing) sender_clock instead.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

HEADER_LEN = 22
#: Largest legal value of the size field (65508 is already too big).
MAX_DATAGRAM = 65_507
_HEADER = struct.Struct(">QHHHQ")
_U16 = 1 << 16
_U64 = 1 << 64

#: Reassembly timeout: one subframe period.
DEFAULT_TIMEOUT_NS = 1_000_000


class HeaderError(ValueError):
    """Bytes that cannot be decoded into a valid SplitHeader."""


@dataclass(frozen=True)
class SplitHeader:
    timestamp: int
    num_blocks: int
    content_type: int
    size: int
    sender_clock: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.timestamp < _U64:
            raise ValueError("timestamp out of unsigned 64-bit range")
        if not 1 <= self.num_blocks < _U16:
            raise ValueError(f"num_blocks must be in [1, 65535], got {self.num_blocks}")
        if not 0 <= self.content_type < _U16:
            raise ValueError("content_type out of unsigned 16-bit range")
        if not HEADER_LEN <= self.size <= MAX_DATAGRAM:
            raise ValueError(
                f"size must be in [{HEADER_LEN}, {MAX_DATAGRAM}], got {self.size}"
            )
        if not 0 <= self.sender_clock < _U64:
            raise ValueError("sender_clock out of unsigned 64-bit range")


def encode_header(header: SplitHeader) -> bytes:
    """Serialize a header to its fixed 22-byte big-endian form."""
    return _HEADER.pack(
        header.timestamp,
        header.num_blocks,
        header.content_type,
        header.size,
        header.sender_clock,
    )


def decode_header(data: bytes) -> SplitHeader:
    """Parse the first 22 bytes of data; raises HeaderError, never crashes."""
    if len(data) < HEADER_LEN:
        raise HeaderError(f"short header: {len(data)} bytes, need {HEADER_LEN}")
    timestamp, num_blocks, content_type, size, sender_clock = _HEADER.unpack_from(data)
    if num_blocks == 0:
        raise HeaderError("num_blocks is zero")
    if size < HEADER_LEN or size > MAX_DATAGRAM:
        raise HeaderError(f"size field {size} outside [{HEADER_LEN}, {MAX_DATAGRAM}]")
    return SplitHeader(timestamp, num_blocks, content_type, size, sender_clock)


@dataclass(frozen=True)
class Chunk:
    """One datagram's worth of a subframe: header plus payload slice."""

    header: SplitHeader
    payload: bytes

    def __post_init__(self) -> None:
        if len(self.payload) + HEADER_LEN != self.header.size:
            raise ValueError(
                f"payload length {len(self.payload)} does not match "
                f"size field {self.header.size}"
            )

    def to_datagram(self) -> bytes:
        return encode_header(self.header) + self.payload


def chunk_from_datagram(data: bytes) -> Chunk:
    """Decode one received datagram; raises HeaderError on any mismatch."""
    header = decode_header(data)
    if len(data) != header.size:
        raise HeaderError(
            f"size field {header.size} does not match datagram length {len(data)}"
        )
    return Chunk(header, bytes(data[HEADER_LEN:]))


def chunk_subframe(
    timestamp: int,
    content_type: int,
    payload: bytes,
    max_datagram: int = 1472,
    sender_clock: int = 0,
) -> List[Chunk]:
    """Split a subframe payload into datagram-sized chunks, in order.

    Each chunk carries at most max_datagram - 22 payload bytes; all chunks
    share timestamp, content_type and num_blocks. Chunk i is stamped with
    sender_clock + i so strict-order reassembly can restore emission order.
    """
    if not HEADER_LEN + 1 <= max_datagram <= MAX_DATAGRAM:
        raise ValueError(
            f"max_datagram must be in [{HEADER_LEN + 1}, {MAX_DATAGRAM}], "
            f"got {max_datagram}"
        )
    if not payload:
        raise ValueError("payload must not be empty")
    budget = max_datagram - HEADER_LEN
    num_blocks = -(-len(payload) // budget)
    if num_blocks >= _U16:
        raise ValueError(
            f"payload of {len(payload)} bytes needs {num_blocks} chunks; "
            f"num_blocks is a 16-bit field"
        )
    chunks = []
    for i in range(num_blocks):
        part = payload[i * budget : (i + 1) * budget]
        header = SplitHeader(
            timestamp=timestamp,
            num_blocks=num_blocks,
            content_type=content_type,
            size=HEADER_LEN + len(part),
            sender_clock=sender_clock + i,
        )
        chunks.append(Chunk(header, part))
    return chunks


# Reassembly outcomes. accept() and poll_timeout() return exactly one of
# these per call.


@dataclass(frozen=True)
class Progress:
    timestamp: int
    received: int
    num_blocks: int


@dataclass(frozen=True)
class Complete:
    timestamp: int
    payload: bytes


@dataclass(frozen=True)
class Timeout:
    timestamp: int
    chunks_received: int
    num_blocks: int


@dataclass(frozen=True)
class Jumbled:
    old_timestamp: int
    new_timestamp: int


@dataclass(frozen=True)
class Malformed:
    reason: str
    timestamp: Optional[int] = None


ReassemblyEvent = Union[Progress, Complete, Timeout, Jumbled, Malformed]


class ReassemblyBuffer:
    """Per-stream receive state machine: collect the chunks of one subframe.

    At most one subframe is under assembly. A chunk of the current subframe
    advances assembly (Progress) or finishes it (Complete); a chunk of a
    newer subframe discards the partial one (Jumbled) and starts the new
    assembly; a chunk at or below the newest finished timestamp is rejected
    as stale. poll_timeout() expires an assembly whose deadline has passed.

    All buffered chunks must share timestamp, content_type and the
    announced num_blocks; disagreement rejects the chunk (Malformed)
    without touching the assembly.

    Corner case: a newer-subframe chunk that single-handedly completes its
    subframe (num_blocks == 1) returns that Complete; the displaced partial
    subframe is still recorded in `displaced`, which collects every
    jumble-discard (drain with drain_displaced()). Instances are
    single-consumer: transferable between threads, never shared.
    """

    def __init__(self, timeout_ns: int = DEFAULT_TIMEOUT_NS, strict_order: bool = False):
        if timeout_ns <= 0:
            raise ValueError("timeout_ns must be positive")
        self.timeout_ns = timeout_ns
        self.strict_order = strict_order
        self.displaced: List[Tuple[int, int]] = []
        self._chunks: List[Chunk] = []
        self._timestamp: Optional[int] = None
        self._num_blocks = 0
        self._content_type = 0
        self._deadline = 0
        self._watermark: Optional[int] = None

    @property
    def current_timestamp(self) -> Optional[int]:
        return self._timestamp

    @property
    def in_progress(self) -> bool:
        return self._timestamp is not None

    def accept(self, chunk: Chunk, now_ns: int) -> ReassemblyEvent:
        """Feed one decoded chunk; returns exactly one event."""
        ts = chunk.header.timestamp
        if self._timestamp is None:
            if self._watermark is not None and ts <= self._watermark:
                return Malformed("stale", timestamp=ts)
            return self._start(chunk, now_ns)
        if ts == self._timestamp:
            if chunk.header.num_blocks != self._num_blocks:
                return Malformed("inconsistent_blocks", timestamp=ts)
            if chunk.header.content_type != self._content_type:
                return Malformed("inconsistent_type", timestamp=ts)
            self._chunks.append(chunk)
            if len(self._chunks) == self._num_blocks:
                return self._finish()
            return Progress(ts, len(self._chunks), self._num_blocks)
        if ts > self._timestamp:
            old = self._timestamp
            self.displaced.append((old, ts))
            self._watermark = old
            self._clear()
            event = self._start(chunk, now_ns)
            if isinstance(event, Complete):
                return event
            return Jumbled(old, ts)
        return Malformed("stale", timestamp=ts)

    def poll_timeout(self, now_ns: int) -> Optional[Timeout]:
        """Expire the assembly in progress once its deadline is reached."""
        if self._timestamp is None or now_ns < self._deadline:
            return None
        event = Timeout(self._timestamp, len(self._chunks), self._num_blocks)
        self._watermark = self._timestamp
        self._clear()
        return event

    def drain_displaced(self) -> List[Tuple[int, int]]:
        """Return and clear the accumulated jumble-discard records."""
        records, self.displaced = self.displaced, []
        return records

    def _start(self, chunk: Chunk, now_ns: int) -> ReassemblyEvent:
        self._timestamp = chunk.header.timestamp
        self._num_blocks = chunk.header.num_blocks
        self._content_type = chunk.header.content_type
        self._chunks = [chunk]
        if self._num_blocks == 1:
            return self._finish()
        self._deadline = now_ns + self.timeout_ns
        return Progress(self._timestamp, 1, self._num_blocks)

    def _finish(self) -> Complete:
        ts = self._timestamp
        chunks = self._chunks
        if self.strict_order:
            chunks = sorted(chunks, key=lambda c: c.header.sender_clock)
        payload = b"".join(c.payload for c in chunks)
        self._watermark = ts
        self._clear()
        return Complete(ts, payload)

    def _clear(self) -> None:
        self._timestamp = None
        self._num_blocks = 0
        self._content_type = 0
        self._chunks = []
        self._deadline = 0
