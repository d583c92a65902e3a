"""Merkle commitment over a block's transaction list."""

from __future__ import annotations

from typing import Sequence

from .codec import sha256
from .tx import Transaction, tx_hash

EMPTY_ROOT = sha256(b"")


def merkle_root_of_hashes(leaves: Sequence[bytes]) -> bytes:
    """Pairwise SHA-256 tree. An odd node is duplicated at each level.
    The empty list hashes to sha256(b"") and a single leaf is its own
    root (no self-pairing at the leaf level)."""
    if not leaves:
        return EMPTY_ROOT
    level = list(leaves)
    while len(level) > 1:
        if len(level) % 2 == 1:
            level.append(level[-1])
        level = [sha256(level[i] + level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


def merkle_root(transactions: Sequence[Transaction]) -> bytes:
    return merkle_root_of_hashes([tx_hash(tx) for tx in transactions])
