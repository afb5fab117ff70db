"""Transport framing tests: header codec, chunking, reassembly traces."""

import random
import struct
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhsplit.wire import (
    Chunk,
    Complete,
    HEADER_LEN,
    HeaderError,
    Jumbled,
    MAX_DATAGRAM,
    Malformed,
    Progress,
    ReassemblyBuffer,
    SplitHeader,
    Timeout,
    chunk_from_datagram,
    chunk_subframe,
    decode_header,
    encode_header,
)

VECTORS = Path(__file__).parent / "data" / "header_vectors.txt"


def load_vectors():
    rows = []
    for line in VECTORS.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        hexstr, *fields = line.split("|")
        rows.append((hexstr, *(int(f) for f in fields)))
    return rows


class TestHeaderCodec:
    @pytest.mark.parametrize("hexstr,ts,nb,ct,size,sc", load_vectors())
    def test_encode_known_vectors(self, hexstr, ts, nb, ct, size, sc):
        header = SplitHeader(ts, nb, ct, size, sc)
        assert encode_header(header).hex() == hexstr

    @pytest.mark.parametrize("hexstr,ts,nb,ct,size,sc", load_vectors())
    def test_decode_known_vectors(self, hexstr, ts, nb, ct, size, sc):
        header = decode_header(bytes.fromhex(hexstr))
        assert header == SplitHeader(ts, nb, ct, size, sc)

    def test_header_is_22_bytes(self):
        assert HEADER_LEN == 22
        assert len(encode_header(SplitHeader(0, 1, 0, 22))) == 22

    def test_round_trip_random(self):
        rng = random.Random(1234)
        for _ in range(2000):
            header = SplitHeader(
                timestamp=rng.getrandbits(64),
                num_blocks=rng.randint(1, 65535),
                content_type=rng.getrandbits(16),
                size=rng.randint(HEADER_LEN, MAX_DATAGRAM),
                sender_clock=rng.getrandbits(64),
            )
            assert decode_header(encode_header(header)) == header

    def test_decode_short_input(self):
        with pytest.raises(HeaderError):
            decode_header(b"\x00" * 21)
        with pytest.raises(HeaderError):
            decode_header(b"")

    def test_decode_zero_blocks(self):
        raw = struct.pack(">QHHHQ", 0, 0, 0, 22, 0)
        with pytest.raises(HeaderError, match="num_blocks"):
            decode_header(raw)

    @pytest.mark.parametrize("size", [0, 21, MAX_DATAGRAM + 1, 65535])
    def test_decode_bad_size_field(self, size):
        raw = struct.pack(">QHHHQ", 0, 1, 0, size, 0)
        with pytest.raises(HeaderError, match="size"):
            decode_header(raw)

    def test_decode_never_raises_anything_else(self):
        rng = random.Random(99)
        for _ in range(5000):
            blob = rng.randbytes(rng.randint(0, 40))
            try:
                decode_header(blob)
            except HeaderError:
                pass

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(timestamp=-1, num_blocks=1, content_type=0, size=22),
            dict(timestamp=0, num_blocks=0, content_type=0, size=22),
            dict(timestamp=0, num_blocks=1 << 16, content_type=0, size=22),
            dict(timestamp=0, num_blocks=1, content_type=-1, size=22),
            dict(timestamp=0, num_blocks=1, content_type=0, size=21),
            dict(timestamp=0, num_blocks=1, content_type=0, size=MAX_DATAGRAM + 1),
            dict(timestamp=0, num_blocks=1, content_type=0, size=22, sender_clock=-2),
        ],
    )
    def test_header_field_validation(self, kwargs):
        with pytest.raises(ValueError):
            SplitHeader(**kwargs)


class TestChunking:
    def test_sizes_and_order(self):
        payload = bytes(range(256)) * 40  # 10240 bytes
        chunks = chunk_subframe(5, 1, payload, max_datagram=1472)
        budget = 1472 - HEADER_LEN
        assert len(chunks) == -(-len(payload) // budget) == 8
        assert [len(c.payload) for c in chunks] == [1450] * 7 + [90]
        assert all(c.header.num_blocks == 8 for c in chunks)
        assert all(c.header.timestamp == 5 for c in chunks)
        assert all(c.header.content_type == 1 for c in chunks)
        assert [c.header.sender_clock for c in chunks] == list(range(8))
        assert b"".join(c.payload for c in chunks) == payload

    def test_exact_multiple_of_budget(self):
        chunks = chunk_subframe(0, 0, b"x" * 2900, max_datagram=1472)
        assert [len(c.payload) for c in chunks] == [1450, 1450]

    def test_single_chunk(self):
        chunks = chunk_subframe(0, 0, b"ab", max_datagram=1472)
        assert len(chunks) == 1
        assert chunks[0].header.num_blocks == 1
        assert chunks[0].header.size == HEADER_LEN + 2

    def test_datagram_round_trip(self):
        rng = random.Random(7)
        for _ in range(50):
            payload = rng.randbytes(rng.randint(1, 5000))
            for chunk in chunk_subframe(3, 2, payload, max_datagram=200):
                again = chunk_from_datagram(chunk.to_datagram())
                assert again == chunk

    def test_sender_clock_offset(self):
        chunks = chunk_subframe(0, 0, b"x" * 3000, max_datagram=1472, sender_clock=70)
        assert [c.header.sender_clock for c in chunks] == [70, 71, 72]

    def test_rejects_empty_payload(self):
        with pytest.raises(ValueError):
            chunk_subframe(0, 0, b"")

    @pytest.mark.parametrize("max_datagram", [0, HEADER_LEN, MAX_DATAGRAM + 1])
    def test_rejects_bad_max_datagram(self, max_datagram):
        with pytest.raises(ValueError):
            chunk_subframe(0, 0, b"x", max_datagram=max_datagram)

    def test_rejects_payload_needing_too_many_chunks(self):
        # minimum datagram -> 1 payload byte per chunk -> 2^16 chunks needed
        with pytest.raises(ValueError, match="16-bit"):
            chunk_subframe(0, 0, b"x" * 65536, max_datagram=HEADER_LEN + 1)

    def test_chunk_size_consistency_enforced(self):
        header = SplitHeader(0, 1, 0, size=30)
        with pytest.raises(ValueError):
            Chunk(header, b"x")  # 22 + 1 != 30

    def test_datagram_length_mismatch_rejected(self):
        chunk = chunk_subframe(0, 0, b"abcdef")[0]
        raw = chunk.to_datagram()
        with pytest.raises(HeaderError):
            chunk_from_datagram(raw + b"!")
        with pytest.raises(HeaderError):
            chunk_from_datagram(raw[:-1])


def feed_all(buf, chunks, now_ns=0):
    return [buf.accept(c, now_ns) for c in chunks]


class TestReassemblyTraces:
    """Deterministic event traces through the receive state machine."""

    def test_in_order_complete(self):
        payload = b"a" * 3000
        buf = ReassemblyBuffer()
        events = feed_all(buf, chunk_subframe(9, 1, payload, max_datagram=1472))
        assert events[0] == Progress(9, 1, 3)
        assert events[1] == Progress(9, 2, 3)
        assert events[2] == Complete(9, payload)
        assert not buf.in_progress

    def test_single_chunk_instant_complete(self):
        buf = ReassemblyBuffer()
        [chunk] = chunk_subframe(4, 0, b"tiny")
        assert buf.accept(chunk, 0) == Complete(4, b"tiny")

    def test_timeout_trace(self):
        buf = ReassemblyBuffer(timeout_ns=1_000_000)
        chunks = chunk_subframe(2, 0, b"b" * 3000, max_datagram=1472)
        buf.accept(chunks[0], 500)
        assert buf.poll_timeout(500 + 999_999) is None
        event = buf.poll_timeout(500 + 1_000_000)
        assert event == Timeout(2, 1, 3)
        assert buf.poll_timeout(10_000_000) is None  # nothing left to expire

    def test_jumbled_trace(self):
        buf = ReassemblyBuffer()
        old = chunk_subframe(0, 0, b"c" * 3000, max_datagram=1472)
        new = chunk_subframe(1, 0, b"d" * 3000, max_datagram=1472)
        buf.accept(old[0], 0)
        event = buf.accept(new[0], 100)
        assert event == Jumbled(0, 1)
        assert buf.drain_displaced() == [(0, 1)]
        # the new assembly proceeds normally
        assert buf.accept(new[1], 200) == Progress(1, 2, 3)
        assert buf.accept(new[2], 300) == Complete(1, b"d" * 3000)

    def test_jumble_with_instant_complete_still_recorded(self):
        buf = ReassemblyBuffer()
        old = chunk_subframe(0, 0, b"e" * 3000, max_datagram=1472)
        [new] = chunk_subframe(1, 0, b"f")
        buf.accept(old[0], 0)
        event = buf.accept(new, 100)
        assert event == Complete(1, b"f")
        assert buf.drain_displaced() == [(0, 1)]
        assert buf.drain_displaced() == []

    def test_stale_after_complete(self):
        buf = ReassemblyBuffer()
        [chunk] = chunk_subframe(5, 0, b"g")
        assert buf.accept(chunk, 0) == Complete(5, b"g")
        assert buf.accept(chunk, 10) == Malformed("stale", timestamp=5)
        [older] = chunk_subframe(4, 0, b"h")
        assert buf.accept(older, 20) == Malformed("stale", timestamp=4)
        [newer] = chunk_subframe(6, 0, b"i")
        assert buf.accept(newer, 30) == Complete(6, b"i")

    def test_stale_after_timeout(self):
        buf = ReassemblyBuffer(timeout_ns=100)
        chunks = chunk_subframe(3, 0, b"j" * 3000, max_datagram=1472)
        buf.accept(chunks[0], 0)
        assert buf.poll_timeout(100) == Timeout(3, 1, 3)
        assert buf.accept(chunks[1], 150) == Malformed("stale", timestamp=3)

    def test_stale_while_assembling_older_timestamp(self):
        buf = ReassemblyBuffer()
        now = chunk_subframe(7, 0, b"k" * 3000, max_datagram=1472)
        [late] = chunk_subframe(6, 0, b"l")
        buf.accept(now[0], 0)
        assert buf.accept(late, 10) == Malformed("stale", timestamp=6)
        assert buf.current_timestamp == 7

    def test_inconsistent_metadata_rejected_without_reset(self):
        buf = ReassemblyBuffer()
        chunks = chunk_subframe(8, 1, b"m" * 2900, max_datagram=1472)
        buf.accept(chunks[0], 0)
        bad_blocks = Chunk(
            SplitHeader(8, 9, 1, HEADER_LEN + 1, 0), b"x"
        )
        assert buf.accept(bad_blocks, 1) == Malformed(
            "inconsistent_blocks", timestamp=8
        )
        bad_type = Chunk(
            SplitHeader(8, 2, 2, HEADER_LEN + 1, 0), b"x"
        )
        assert buf.accept(bad_type, 2) == Malformed("inconsistent_type", timestamp=8)
        # assembly unharmed
        assert buf.accept(chunks[1], 3) == Complete(8, b"m" * 2900)

    def test_arrival_order_defines_payload_without_strict_mode(self):
        chunks = chunk_subframe(0, 0, b"A" * 1450 + b"B" * 1450, max_datagram=1472)
        buf = ReassemblyBuffer()
        buf.accept(chunks[1], 0)
        event = buf.accept(chunks[0], 1)
        assert event == Complete(0, b"B" * 1450 + b"A" * 1450)

    def test_strict_order_restores_emission_order(self):
        payload = bytes(1000) + bytes(range(256)) * 8  # 3048 bytes, 3 chunks
        chunks = chunk_subframe(0, 0, payload, max_datagram=1472)
        buf = ReassemblyBuffer(strict_order=True)
        buf.accept(chunks[2], 0)
        buf.accept(chunks[0], 1)
        event = buf.accept(chunks[1], 2)
        assert event == Complete(0, payload)

    @settings(max_examples=60, deadline=None)
    @given(
        data=st.binary(min_size=1, max_size=6000),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_any_permutation_reassembles_in_strict_mode(self, data, seed):
        chunks = chunk_subframe(1, 0, data, max_datagram=300)
        order = list(chunks)
        random.Random(seed).shuffle(order)
        buf = ReassemblyBuffer(strict_order=True)
        events = feed_all(buf, order)
        assert events[-1] == Complete(1, data)
        assert all(isinstance(e, Progress) for e in events[:-1])

    def test_buffer_reusable_after_every_outcome(self):
        buf = ReassemblyBuffer(timeout_ns=100)
        # complete
        [c1] = chunk_subframe(1, 0, b"x")
        assert isinstance(buf.accept(c1, 0), Complete)
        # timeout
        c2 = chunk_subframe(2, 0, b"y" * 3000, max_datagram=1472)
        buf.accept(c2[0], 10)
        assert isinstance(buf.poll_timeout(110), Timeout)
        # jumble, then complete the successor
        c3 = chunk_subframe(3, 0, b"z" * 3000, max_datagram=1472)
        c4 = chunk_subframe(4, 0, b"w" * 2)
        buf.accept(c3[0], 200)
        assert isinstance(buf.accept(c4[0], 220), Complete)
        assert buf.drain_displaced() == [(3, 4)]

    def test_poll_with_nothing_in_progress(self):
        buf = ReassemblyBuffer()
        assert buf.poll_timeout(10**12) is None
