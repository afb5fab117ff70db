"""Uplink soft-bit handling: LLR quantization and fixed-width bit packing.

A soft bit is a log-likelihood ratio coded on the fronthaul with a fixed
bitwidth. The quantizer is uniform and symmetric: values are clamped to
[-clip, +clip] and mapped to signed integer codes in
[-(2^(w-1)-1), +(2^(w-1)-1)], so zero always codes to zero and the
round-trip error is at most half a step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LlrQuantizer:
    bit_width: int
    clip: float = 8.0

    def __post_init__(self) -> None:
        if self.bit_width < 2:
            raise ValueError("bit_width must be >= 2 for a signed code")
        if not self.clip > 0:
            raise ValueError("clip must be positive")

    @property
    def max_code(self) -> int:
        return (1 << (self.bit_width - 1)) - 1

    @property
    def step(self) -> float:
        return self.clip / self.max_code


def quantize_llr(values, q: LlrQuantizer) -> np.ndarray:
    """Map real LLRs to signed integer codes (uniform, symmetric)."""
    arr = np.asarray(values, dtype=np.float64)
    if np.isnan(arr).any():
        raise ValueError("LLR input contains NaN")
    clamped = np.clip(arr, -q.clip, q.clip)
    return np.rint(clamped / q.step).astype(np.int32)


def dequantize_llr(codes, q: LlrQuantizer) -> np.ndarray:
    """Map codes back to LLR values (code * step)."""
    arr = np.asarray(codes)
    if arr.size and np.abs(arr).max() > q.max_code:
        raise ValueError(f"code outside representable range +-{q.max_code}")
    return arr.astype(np.float64) * q.step


def pack_codes(codes, bit_width: int) -> bytes:
    """Pack signed codes two's-complement, bit_width bits each, MSB first.

    The last byte is zero-padded; the caller must remember the code count
    to unpack.
    """
    if not 2 <= bit_width <= 16:
        raise ValueError("bit_width must be in [2, 16]")
    arr = np.asarray(codes, dtype=np.int64)
    mask = (1 << bit_width) - 1
    unsigned = (arr & mask).astype(np.uint16)
    if bit_width == 8:
        return unsigned.astype(np.uint8).tobytes()
    shifts = np.arange(bit_width - 1, -1, -1, dtype=np.uint16)
    bits = ((unsigned[:, None] >> shifts) & 1).astype(np.uint8)
    return np.packbits(bits.ravel()).tobytes()


def unpack_codes(data: bytes, bit_width: int, count: int) -> np.ndarray:
    """Inverse of pack_codes for the first `count` codes."""
    if not 2 <= bit_width <= 16:
        raise ValueError("bit_width must be in [2, 16]")
    if count < 0:
        raise ValueError("count must be >= 0")
    needed = -(-count * bit_width // 8)
    if len(data) < needed:
        raise ValueError(f"need {needed} bytes for {count} codes, got {len(data)}")
    if bit_width == 8:
        unsigned = np.frombuffer(data, dtype=np.uint8, count=count).astype(np.int64)
    else:
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        bits = bits[: count * bit_width].reshape(count, bit_width).astype(np.int64)
        weights = 1 << np.arange(bit_width - 1, -1, -1, dtype=np.int64)
        unsigned = bits @ weights
    sign_bit = 1 << (bit_width - 1)
    return (unsigned - ((unsigned & sign_bit) << 1)).astype(np.int32)
