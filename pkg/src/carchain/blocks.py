"""Blocks: header hashing, proof-of-work mining, wire format.

Header layout (hashed bytes, fixed widths, big-endian):

    parent_hash(32) || height u64 || timestamp u64 || pow_nonce u64
    || target u256 || tx_root(32) || miner(20)

The pow_nonce sits at a fixed offset, so the miner hashes a shared
prefix once and only re-feeds nonce+suffix per attempt.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

from .codec import (
    ADDRESS_LEN,
    HASH_LEN,
    from_hex,
    pack_u64,
    pack_u256,
    sha256,
    to_hex,
)
from .errors import NonceExhausted
from .merkle import merkle_root
from .tx import Transaction
from .tx import from_json as tx_from_json
from .tx import to_json as tx_to_json

GENESIS_PARENT = b"\x00" * HASH_LEN
MAX_POW_NONCE = 2**64 - 1
MAX_TARGET = 2**256 - 1


@dataclass(frozen=True)
class Block:
    parent_hash: bytes
    height: int
    timestamp: int
    pow_nonce: int
    target: int
    tx_root: bytes
    transactions: tuple[Transaction, ...]
    miner: bytes

    def __post_init__(self):
        if len(self.parent_hash) != HASH_LEN or len(self.tx_root) != HASH_LEN:
            raise ValueError("bad hash length")
        if len(self.miner) != ADDRESS_LEN:
            raise ValueError("bad miner address length")
        if not 0 <= self.target <= MAX_TARGET:
            raise ValueError("target out of range")
        object.__setattr__(self, "transactions", tuple(self.transactions))

    def to_json(self) -> dict:
        return {
            "parent_hash": to_hex(self.parent_hash),
            "height": self.height,
            "timestamp": self.timestamp,
            "pow_nonce": self.pow_nonce,
            "target": hex(self.target),
            "tx_root": to_hex(self.tx_root),
            "transactions": [tx_to_json(tx) for tx in self.transactions],
            "miner": to_hex(self.miner),
        }


def block_from_json(doc: dict) -> Block:
    return Block(
        parent_hash=from_hex(doc["parent_hash"], HASH_LEN),
        height=int(doc["height"]),
        timestamp=int(doc["timestamp"]),
        pow_nonce=int(doc["pow_nonce"]),
        target=int(doc["target"], 16),
        tx_root=from_hex(doc["tx_root"], HASH_LEN),
        transactions=tuple(tx_from_json(t) for t in doc["transactions"]),
        miner=from_hex(doc["miner"], ADDRESS_LEN),
    )


def header_bytes(block: Block) -> bytes:
    return (
        block.parent_hash
        + pack_u64(block.height)
        + pack_u64(block.timestamp)
        + pack_u64(block.pow_nonce)
        + pack_u256(block.target)
        + block.tx_root
        + block.miner
    )


def block_hash(block: Block) -> bytes:
    return sha256(header_bytes(block))


def pow_ok(block: Block) -> bool:
    return int.from_bytes(block_hash(block), "big") < block.target


def mine_block(
    parent: Block, txs: Sequence[Transaction], target: int, timestamp: int, miner: bytes
) -> Block:
    """Exhaustive nonce search from 0 upward; the first satisfying nonce
    is normative so repeated runs at fixed inputs produce the same block."""
    txs = tuple(txs)
    root = merkle_root(txs)
    prefix = hashlib.sha256(
        block_hash(parent) + pack_u64(parent.height + 1) + pack_u64(timestamp)
    )
    suffix = pack_u256(target) + root + miner
    for nonce in range(MAX_POW_NONCE + 1):
        h = prefix.copy()
        h.update(pack_u64(nonce) + suffix)
        if int.from_bytes(h.digest(), "big") < target:
            return Block(
                parent_hash=block_hash(parent),
                height=parent.height + 1,
                timestamp=timestamp,
                pow_nonce=nonce,
                target=target,
                tx_root=root,
                transactions=txs,
                miner=miner,
            )
    raise NonceExhausted("pow nonce space exhausted; target infeasibly small")


def genesis_block(target: int) -> Block:
    """Height-0 anchor. It is accepted by definition, not by PoW."""
    return Block(
        parent_hash=GENESIS_PARENT,
        height=0,
        timestamp=0,
        pow_nonce=0,
        target=target,
        tx_root=merkle_root(()),
        transactions=(),
        miner=b"\x00" * ADDRESS_LEN,
    )
