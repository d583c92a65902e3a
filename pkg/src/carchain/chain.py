"""Block store with longest-chain fork choice.

The store keeps every valid block it has seen (forks included), the
post-state of each, and the receipts produced when the block was first
validated. The head is the tip of the highest chain; ties break toward
the lexicographically smaller block hash so every replica lands on the
same head regardless of arrival order.

Single-writer contract: one actor calls add_block on a given store.
Readers may take the returned snapshots.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .blocks import Block, block_hash
from .errors import UnknownParent
from .ledger import TxReceipt, validate_block
from .state import WorldState


def _better(candidate: Block, candidate_hash: bytes, best: Block, best_hash: bytes) -> bool:
    if candidate.height != best.height:
        return candidate.height > best.height
    return candidate_hash < best_hash


def fork_choice(blocks: Iterable[Block]) -> Block:
    """Pure fork choice over any bag of blocks: the highest tip whose
    ancestry is fully present down to a height-0 block wins; equal
    heights break toward the smaller block hash."""
    by_hash: dict[bytes, Block] = {block_hash(b): b for b in blocks}
    anchored: dict[bytes, bool] = {}

    def is_anchored(h: bytes) -> bool:
        path = []
        while True:
            known = anchored.get(h)
            if known is not None:
                ok = known
                break
            block = by_hash.get(h)
            if block is None:
                ok = False
                break
            if block.height == 0:
                ok = True
                break
            path.append(h)
            h = block.parent_hash
        for seen in path:
            anchored[seen] = ok
        return ok

    best: Optional[Block] = None
    best_hash = b""
    for h, block in by_hash.items():
        if not is_anchored(h):
            continue
        if best is None or _better(block, h, best, best_hash):
            best, best_hash = block, h
    if best is None:
        raise ValueError("no anchored chain in block set")
    return best


class BlockStore:
    def __init__(self, genesis: Block, genesis_state: WorldState):
        self.genesis_hash = block_hash(genesis)
        self.blocks: dict[bytes, Block] = {self.genesis_hash: genesis}
        self.states: dict[bytes, WorldState] = {self.genesis_hash: genesis_state}
        self.receipts_by_block: dict[bytes, list[TxReceipt]] = {self.genesis_hash: []}
        self.head_hash = self.genesis_hash

    @property
    def head(self) -> Block:
        return self.blocks[self.head_hash]

    @property
    def head_state(self) -> WorldState:
        return self.states[self.head_hash]

    def __contains__(self, h: bytes) -> bool:
        return h in self.blocks

    def get(self, h: bytes) -> Optional[Block]:
        return self.blocks.get(h)

    def add_block(self, block: Block) -> bool:
        """Validate and store a block. Returns True when the head moved.
        Duplicates are ignored; an unseen parent raises UnknownParent so
        the caller can buffer the orphan; an invalid block raises
        BlockInvalid and is not stored."""
        h = block_hash(block)
        if h in self.blocks:
            return False
        parent = self.blocks.get(block.parent_hash)
        if parent is None:
            raise UnknownParent(f"parent {block.parent_hash.hex()} not known")
        parent_state = self.states[block.parent_hash]
        new_state, receipts = validate_block(block, parent, parent_state)
        self.blocks[h] = block
        self.states[h] = new_state
        self.receipts_by_block[h] = receipts
        if _better(block, h, self.head, self.head_hash):
            self.head_hash = h
            return True
        return False

    def chain_to(self, tip_hash: bytes) -> list[Block]:
        """Blocks from genesis to the given tip, inclusive."""
        chain = []
        h = tip_hash
        while True:
            block = self.blocks[h]
            chain.append(block)
            if block.height == 0:
                break
            h = block.parent_hash
        chain.reverse()
        return chain

    def canonical_chain(self) -> list[Block]:
        return self.chain_to(self.head_hash)

    def block_at_height(self, height: int) -> Optional[Block]:
        """Block at the given height on the canonical chain."""
        h = self.head_hash
        while True:
            block = self.blocks[h]
            if block.height == height:
                return block
            if block.height < height or block.height == 0:
                return None
            h = block.parent_hash

    def common_ancestor(self, a_hash: bytes, b_hash: bytes) -> bytes:
        a, b = self.blocks[a_hash], self.blocks[b_hash]
        while a.height > b.height:
            a_hash = a.parent_hash
            a = self.blocks[a_hash]
        while b.height > a.height:
            b_hash = b.parent_hash
            b = self.blocks[b_hash]
        while a_hash != b_hash:
            a_hash, b_hash = a.parent_hash, b.parent_hash
            a, b = self.blocks[a_hash], self.blocks[b_hash]
        return a_hash

    def reorg_depth(self, old_head_hash: bytes, new_head_hash: bytes) -> int:
        """How many blocks the old head lost: its height minus the
        height of the common ancestor with the new head. 0 for a plain
        extension."""
        ancestor = self.common_ancestor(old_head_hash, new_head_hash)
        return self.blocks[old_head_hash].height - self.blocks[ancestor].height

    def canonical_receipts(self) -> dict[bytes, TxReceipt]:
        """tx_hash -> receipt over the canonical chain only."""
        out: dict[bytes, TxReceipt] = {}
        for block in self.canonical_chain():
            for receipt in self.receipts_by_block[block_hash(block)]:
                out[receipt.tx_hash] = receipt
        return out
