"""Low-level byte helpers shared by the canonical encodings.

Every integer on the wire is big-endian and fixed-width, so that the
encodings stay injective and bit-identical across implementations.
"""

from __future__ import annotations

import hashlib

ADDRESS_LEN = 20
HASH_LEN = 32
U64_LEN = 8
U256_LEN = 32

U64_MAX = 2**64 - 1
U256_MAX = 2**256 - 1


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def pack_u64(value: int) -> bytes:
    if not 0 <= value <= U64_MAX:
        raise ValueError(f"value out of u64 range: {value}")
    return value.to_bytes(U64_LEN, "big")


def pack_u256(value: int) -> bytes:
    if not 0 <= value <= U256_MAX:
        raise ValueError(f"value out of u256 range: {value}")
    return value.to_bytes(U256_LEN, "big")


class ByteReader:
    """Sequential reader used by the decoders; raises on truncation."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ValueError("truncated encoding")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u64(self) -> int:
        return int.from_bytes(self.take(U64_LEN), "big")

    def address(self) -> bytes:
        return self.take(ADDRESS_LEN)

    def done(self) -> bool:
        return self.pos == len(self.data)


def to_hex(data: bytes) -> str:
    return data.hex()


def from_hex(text: str, expected_len: int | None = None) -> bytes:
    data = bytes.fromhex(text)
    if expected_len is not None and len(data) != expected_len:
        raise ValueError(f"expected {expected_len} bytes, got {len(data)}")
    return data
