"""Discrete-event network simulation: miners, gossip, fork races.

Strictly single-threaded. All randomness flows from one random.Random
seeded by the config, and the event queue breaks time ties by insertion
sequence, so a (config, seed) pair fully determines the run.

Block production is one global Poisson process (exponential inter-block
times at the configured mean); each production event picks the winning
node proportionally to hash share. The "virtual" backend stamps blocks
with the all-ones target so the proof of work is satisfied by the first
nonce without search; the "real" backend runs the actual exhaustive
search against the configured target. Either way the blocks flow
through the ordinary validate_block path on every receiving node.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass
from typing import Iterable, Optional

from ..blocks import MAX_TARGET, Block, block_hash, genesis_block, mine_block
from ..chain import BlockStore
from ..codec import sha256, to_hex
from ..errors import BAD_NONCE, BlockInvalid, InadmissibleTx, InvalidConfig, UnknownParent
from ..ledger import GenesisConfig, execute_transaction, genesis_state
from ..state import state_root
from ..tx import Transaction, tx_hash

HONEST = "honest"
ATTACKER = "attacker"

# Per-block cap on included transactions; keeps one slow mempool from
# stalling the loop, never reached by the shipped experiments.
MAX_BLOCK_TXS = 1000


@dataclass
class SimConfig:
    seed: int = 0
    num_honest: int = 1
    attacker_share: float = 0.0
    mean_block_interval: float = 15.0
    mean_latency: float = 0.0
    horizon_blocks: Optional[int] = 100
    horizon_seconds: Optional[float] = None
    confirmations: int = 6
    backend: str = "virtual"
    target: int = 2**240  # real backend only
    genesis: Optional[GenesisConfig] = None

    def validate(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must fit in 64 bits")
        if self.num_honest < 1:
            raise InvalidConfig("need at least one honest node")
        if not 0.0 <= self.attacker_share < 1.0:
            raise InvalidConfig("attacker_share must be in [0, 1)")
        if self.mean_block_interval <= 0:
            raise InvalidConfig("mean_block_interval must be positive")
        if self.mean_latency < 0:
            raise InvalidConfig("mean_latency must be non-negative")
        if self.horizon_blocks is None and self.horizon_seconds is None:
            raise InvalidConfig("set horizon_blocks or horizon_seconds")
        if self.horizon_blocks is not None and self.horizon_blocks < 1:
            raise InvalidConfig("horizon_blocks must be at least 1")
        if self.horizon_seconds is not None and self.horizon_seconds <= 0:
            raise InvalidConfig("horizon_seconds must be positive")
        if self.confirmations < 0:
            raise InvalidConfig("confirmations must be non-negative")
        if self.backend not in ("virtual", "real"):
            raise InvalidConfig(f"unknown backend {self.backend!r}")

    def to_json(self) -> dict:
        doc = {
            "seed": self.seed,
            "num_honest": self.num_honest,
            "attacker_share": self.attacker_share,
            "mean_block_interval": self.mean_block_interval,
            "mean_latency": self.mean_latency,
            "horizon_blocks": self.horizon_blocks,
            "horizon_seconds": self.horizon_seconds,
            "confirmations": self.confirmations,
            "backend": self.backend,
            "target": hex(self.target),
        }
        if self.genesis is not None:
            doc["genesis"] = self.genesis.to_json()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "SimConfig":
        try:
            config = cls(
                seed=int(doc.get("seed", 0)),
                num_honest=int(doc.get("num_honest", 1)),
                attacker_share=float(doc.get("attacker_share", 0.0)),
                mean_block_interval=float(doc.get("mean_block_interval", 15.0)),
                mean_latency=float(doc.get("mean_latency", 0.0)),
                horizon_blocks=(
                    int(doc["horizon_blocks"]) if doc.get("horizon_blocks") is not None else None
                ),
                horizon_seconds=(
                    float(doc["horizon_seconds"])
                    if doc.get("horizon_seconds") is not None
                    else None
                ),
                confirmations=int(doc.get("confirmations", 6)),
                backend=str(doc.get("backend", "virtual")),
                target=int(doc["target"], 16) if "target" in doc else 2**240,
                genesis=(
                    GenesisConfig.from_json(doc["genesis"]) if "genesis" in doc else None
                ),
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise InvalidConfig(f"bad simulation config: {exc}") from exc
        config.validate()
        return config


@dataclass
class SimReport:
    config: dict
    blocks_mined: int
    final_time: float
    node_heads: list[dict]
    heads_equal: bool
    state_roots_equal: bool
    max_reorg_depth: int
    reorg_depth_histogram: dict[int, int]
    tx_confirmations: list[dict]
    time_to_agreement: float
    invalid_blocks: int
    event_log_hash: str

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "blocks_mined": self.blocks_mined,
            "final_time": self.final_time,
            "node_heads": self.node_heads,
            "heads_equal": self.heads_equal,
            "state_roots_equal": self.state_roots_equal,
            "max_reorg_depth": self.max_reorg_depth,
            "reorg_depth_histogram": {str(k): v for k, v in sorted(self.reorg_depth_histogram.items())},
            "tx_confirmations": self.tx_confirmations,
            "time_to_agreement": self.time_to_agreement,
            "invalid_blocks": self.invalid_blocks,
            "event_log_hash": self.event_log_hash,
        }


class SimNode:
    def __init__(self, node_id: int, role: str, hash_share: float, genesis: Block, state):
        self.node_id = node_id
        self.role = role
        self.hash_share = hash_share
        self.store = BlockStore(genesis, state)
        self.mempool: dict[bytes, Transaction] = {}
        self.seen_blocks: set[bytes] = {self.store.genesis_hash}
        self.seen_txs: set[bytes] = set()
        self.orphans: dict[bytes, list[Block]] = {}
        # Attacker extends its own private tip instead of the public head.
        self.private_tip: bytes = self.store.genesis_hash

    def mining_parent(self) -> bytes:
        if self.role == ATTACKER:
            return self.private_tip
        return self.store.head_hash


class _Simulation:
    def __init__(self, config: SimConfig, workload: Iterable[tuple[float, Transaction]]):
        config.validate()
        self.config = config
        self.rng = random.Random(config.seed)
        self.now = 0.0
        self.seq = 0
        self.queue: list[tuple[float, int, str, tuple]] = []
        self.event_log: list[list] = []

        gen_config = config.genesis or GenesisConfig(agent=b"\x00" * 20, target=config.target)
        target = config.target if config.backend == "real" else MAX_TARGET
        genesis = genesis_block(target)
        base_state = genesis_state(gen_config)
        self.mining_target = target

        self.nodes: list[SimNode] = []
        honest_share = (1.0 - config.attacker_share) / config.num_honest
        for node_id in range(config.num_honest):
            self.nodes.append(
                SimNode(node_id, HONEST, honest_share, genesis, base_state.copy())
            )
        if config.attacker_share > 0:
            self.nodes.append(
                SimNode(
                    config.num_honest, ATTACKER, config.attacker_share, genesis, base_state.copy()
                )
            )
        self.honest_nodes = [n for n in self.nodes if n.role == HONEST]

        self.blocks_mined = 0
        self.invalid_blocks = 0
        self.reorg_histogram: dict[int, int] = {}
        self.last_head_change = 0.0
        self.miner_address: dict[int, bytes] = {
            n.node_id: n.node_id.to_bytes(2, "big") + b"\x00" * 18 for n in self.nodes
        }
        # tx_hash -> [submit_time, confirm_time|None, origin_node]
        self.tx_tracking: dict[bytes, list] = {}

        for when, tx in workload:
            origin = self.rng.randrange(config.num_honest)
            self._push(float(when), "submit_tx", (origin, tx))
        self._push(self.rng.expovariate(1.0 / config.mean_block_interval), "mine", ())

    def _push(self, when: float, kind: str, data: tuple) -> None:
        self.seq += 1
        heapq.heappush(self.queue, (when, self.seq, kind, data))

    def _log(self, *entry) -> None:
        self.event_log.append(list(entry))

    # -- block production ------------------------------------------------

    def _pick_winner(self) -> SimNode:
        roll = self.rng.random()
        acc = 0.0
        for node in self.nodes:
            acc += node.hash_share
            if roll < acc:
                return node
        return self.nodes[-1]

    def _build_block(self, node: SimNode) -> Block:
        parent_hash = node.mining_parent()
        parent = node.store.blocks[parent_hash]
        parent_state = node.store.states[parent_hash]
        timestamp = max(int(self.now), parent.timestamp)

        scratch = parent_state.copy()
        scratch.block_time = timestamp
        miner = self.miner_address[node.node_id]
        included = []
        stale = []
        for h, tx in node.mempool.items():
            if len(included) >= MAX_BLOCK_TXS:
                break
            try:
                execute_transaction(scratch, tx, miner)
            except InadmissibleTx as exc:
                if exc.code == BAD_NONCE and tx.nonce < scratch.nonce(tx.sender):
                    stale.append(h)
                continue
            included.append(tx)
        for h in stale:
            node.mempool.pop(h, None)
        return mine_block(parent, included, self.mining_target, timestamp, miner)

    def _on_mine(self) -> None:
        over_blocks = (
            self.config.horizon_blocks is not None
            and self.blocks_mined >= self.config.horizon_blocks
        )
        over_time = (
            self.config.horizon_seconds is not None and self.now > self.config.horizon_seconds
        )
        if over_blocks or over_time:
            return
        winner = self._pick_winner()
        block = self._build_block(winner)
        self.blocks_mined += 1
        h = block_hash(block)
        self._log("mine", round(self.now, 9), winner.node_id, block.height, to_hex(h[:8]))
        winner.seen_blocks.add(h)
        self._accept(winner, block)
        if winner.role == ATTACKER:
            winner.private_tip = h
        else:
            self._relay_block(winner, block)
        self._push(
            self.now + self.rng.expovariate(1.0 / self.config.mean_block_interval), "mine", ()
        )

    # -- gossip ------------------------------------------------------------

    def _latency(self) -> float:
        if self.config.mean_latency <= 0:
            return 0.0
        return self.rng.expovariate(1.0 / self.config.mean_latency)

    def _relay_block(self, origin: SimNode, block: Block) -> None:
        for node in self.nodes:
            if node.node_id != origin.node_id:
                self._push(self.now + self._latency(), "deliver_block", (node.node_id, block))

    def _relay_tx(self, origin: SimNode, tx: Transaction) -> None:
        for node in self.honest_nodes:
            if node.node_id != origin.node_id:
                self._push(self.now + self._latency(), "deliver_tx", (node.node_id, tx))

    def _accept(self, node: SimNode, block: Block) -> None:
        """Add to the node's store, cascading any waiting orphans."""
        pending = [block]
        while pending:
            current = pending.pop(0)
            h = block_hash(current)
            old_head = node.store.head_hash
            try:
                changed = node.store.add_block(current)
            except UnknownParent:
                self.orphan_buffer(node, current)
                continue
            except BlockInvalid:
                self.invalid_blocks += 1
                continue
            if changed:
                depth = node.store.reorg_depth(old_head, node.store.head_hash)
                if depth > 0:
                    self.reorg_histogram[depth] = self.reorg_histogram.get(depth, 0) + 1
                    self._log("reorg", round(self.now, 9), node.node_id, depth)
                if node.role == HONEST:
                    self.last_head_change = self.now
                    self._confirm_txs(node, old_head)
                self._log(
                    "head", round(self.now, 9), node.node_id, current.height, to_hex(h[:8])
                )
            pending.extend(node.orphans.pop(h, []))

    def orphan_buffer(self, node: SimNode, block: Block) -> None:
        self.orphans_of(node, block.parent_hash).append(block)

    def orphans_of(self, node: SimNode, parent_hash: bytes) -> list[Block]:
        return node.orphans.setdefault(parent_hash, [])

    def _on_deliver_block(self, node_id: int, block: Block) -> None:
        node = self.nodes[node_id]
        h = block_hash(block)
        if h in node.seen_blocks:
            return
        node.seen_blocks.add(h)
        self._log("deliver", round(self.now, 9), node_id, to_hex(h[:8]))
        self._accept(node, block)
        if node.role == HONEST:
            self._relay_block(node, block)

    # -- transactions --------------------------------------------------------

    def _on_submit_tx(self, origin_id: int, tx: Transaction) -> None:
        node = self.nodes[origin_id]
        h = tx_hash(tx)
        self.tx_tracking[h] = [self.now, None, origin_id]
        self._log("tx_submit", round(self.now, 9), origin_id, to_hex(h[:8]))
        self._ingest_tx(node, tx)

    def _on_deliver_tx(self, node_id: int, tx: Transaction) -> None:
        self._ingest_tx(self.nodes[node_id], tx)

    def _ingest_tx(self, node: SimNode, tx: Transaction) -> None:
        h = tx_hash(tx)
        if h in node.seen_txs:
            return
        node.seen_txs.add(h)
        node.mempool[h] = tx
        if node.role == HONEST:
            self._relay_tx(node, tx)

    def _confirm_txs(self, node: SimNode, old_head: bytes) -> None:
        """Mark workload txs confirmed the first time the origin node's
        canonical chain includes them."""
        ancestor = node.store.common_ancestor(old_head, node.store.head_hash)
        h = node.store.head_hash
        while h != ancestor:
            block = node.store.blocks[h]
            for tx in block.transactions:
                tracking = self.tx_tracking.get(tx_hash(tx))
                if tracking and tracking[2] == node.node_id and tracking[1] is None:
                    tracking[1] = self.now
            h = block.parent_hash

    # -- main loop -----------------------------------------------------------

    def run(self) -> SimReport:
        while self.queue:
            when, _, kind, data = heapq.heappop(self.queue)
            self.now = when
            if kind == "mine":
                self._on_mine()
            elif kind == "deliver_block":
                self._on_deliver_block(*data)
            elif kind == "deliver_tx":
                self._on_deliver_tx(*data)
            elif kind == "submit_tx":
                self._on_submit_tx(*data)
        return self._report()

    def _report(self) -> SimReport:
        node_heads = []
        for node in self.nodes:
            head = node.store.head
            node_heads.append(
                {
                    "node_id": node.node_id,
                    "role": node.role,
                    "height": head.height,
                    "head": to_hex(node.store.head_hash),
                    "state_root": to_hex(state_root(node.store.head_state)),
                }
            )
        honest = [h for h in node_heads if h["role"] == HONEST]
        heads_equal = len({h["head"] for h in honest}) == 1
        roots_equal = len({h["state_root"] for h in honest}) == 1
        confirmations = []
        for h, (submitted, confirmed, origin) in sorted(self.tx_tracking.items()):
            confirmations.append(
                {
                    "tx_hash": to_hex(h),
                    "origin": origin,
                    "submitted": submitted,
                    "confirmed": confirmed,
                    "latency": None if confirmed is None else confirmed - submitted,
                }
            )
        log_bytes = json.dumps(self.event_log, separators=(",", ":")).encode()
        return SimReport(
            config=self.config.to_json(),
            blocks_mined=self.blocks_mined,
            final_time=self.now,
            node_heads=node_heads,
            heads_equal=heads_equal,
            state_roots_equal=roots_equal,
            max_reorg_depth=max(self.reorg_histogram, default=0),
            reorg_depth_histogram=dict(self.reorg_histogram),
            tx_confirmations=confirmations,
            time_to_agreement=self.last_head_change,
            invalid_blocks=self.invalid_blocks,
            event_log_hash=to_hex(sha256(log_bytes)),
        )


def run_simulation(
    config: SimConfig, workload: Iterable[tuple[float, Transaction]] = ()
) -> SimReport:
    return _Simulation(config, workload).run()


def convergence_experiment(config: SimConfig) -> dict:
    """All-honest run to horizon, then queues drain; reports whether the
    network agreed and the deepest reorg anyone observed."""
    if config.attacker_share != 0.0:
        raise InvalidConfig("convergence experiment requires an all-honest config")
    report = run_simulation(config)
    return {
        "heads_equal": report.heads_equal,
        "state_roots_equal": report.state_roots_equal,
        "max_reorg_depth": report.max_reorg_depth,
        "time_to_agreement": report.time_to_agreement,
        "blocks_mined": report.blocks_mined,
        "report": report.to_json(),
    }
