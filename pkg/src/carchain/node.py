"""Single-node chain runtime behind the HTTP service.

One lock guards every mutation (mempool admission and block
application); queries copy nothing and read only values that are
replaced, never mutated in place, after publication. The node is the
only miner of its chain, so its canonical chain never reorgs and event
sequence numbers are stable.

Persistence is an append-only JSONL block log. Startup replays it
through the ordinary validation path; replay determinism makes the
rebuilt head state identical to the one that wrote the log.
"""

from __future__ import annotations

import json
import threading
import time
from collections import OrderedDict
from pathlib import Path
from typing import Any, Mapping, Optional

from . import auction as auction_mod
from . import registry
from .blocks import Block, block_from_json, block_hash, mine_block
from .chain import BlockStore
from .codec import to_hex
from .errors import BAD_NONCE, ContractError, InadmissibleTx
from .ledger import GenesisConfig, TxReceipt, execute_transaction, make_genesis
from .state import state_root
from .tx import Transaction, tx_hash
from .tx import from_json as tx_from_json

MINER_PLACEHOLDER = b"\x00" * 20


class Node:
    def __init__(
        self,
        genesis_config: GenesisConfig,
        block_log: Optional[str] = None,
        miner: bytes = MINER_PLACEHOLDER,
    ):
        self.config = genesis_config
        self.miner = miner
        self.lock = threading.RLock()
        self.events_changed = threading.Condition(self.lock)
        genesis, state = make_genesis(genesis_config)
        self.store = BlockStore(genesis, state)
        self.mempool: "OrderedDict[bytes, Transaction]" = OrderedDict()
        self.receipts: dict[bytes, TxReceipt] = {}
        self.pending_state = self.store.head_state.copy()
        self.block_log = Path(block_log) if block_log else None
        self._stop = threading.Event()
        self._miner_thread: Optional[threading.Thread] = None
        if self.block_log and self.block_log.exists():
            self._replay_log()

    # -- persistence -------------------------------------------------------

    def _replay_log(self) -> None:
        with self.block_log.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                block = block_from_json(json.loads(line))
                self.store.add_block(block)
                for receipt in self.store.receipts_by_block[block_hash(block)]:
                    self.receipts[receipt.tx_hash] = receipt
        self.pending_state = self.store.head_state.copy()

    def _append_log(self, block: Block) -> None:
        if self.block_log is None:
            return
        with self.block_log.open("a") as fh:
            fh.write(json.dumps(block.to_json(), sort_keys=True, separators=(",", ":")) + "\n")

    # -- mempool -------------------------------------------------------------

    def submit(self, raw: Mapping[str, Any]) -> dict:
        """Admit a wire-format transaction. Raises ValueError on malformed
        input and InadmissibleTx when the ledger would refuse it."""
        tx = tx_from_json(raw)
        with self.lock:
            h = tx_hash(tx)
            if h in self.mempool or h in self.receipts:
                return {"accepted": True, "tx_hash": to_hex(h), "note": "already known"}
            # Staged against head state + earlier mempool txs so queued
            # nonces chain correctly; fee/nonce effects of a revert are
            # exactly what the eventual block will apply.
            execute_transaction(self.pending_state, tx, MINER_PLACEHOLDER)
            self.mempool[h] = tx
            return {"accepted": True, "tx_hash": to_hex(h)}

    def _rebuild_pending(self) -> None:
        self.pending_state = self.store.head_state.copy()
        stale = []
        for h, tx in self.mempool.items():
            try:
                execute_transaction(self.pending_state, tx, MINER_PLACEHOLDER)
            except InadmissibleTx:
                stale.append(h)
        for h in stale:
            self.mempool.pop(h, None)

    # -- mining ------------------------------------------------------------

    def mine_once(self) -> Optional[Block]:
        """Mine one block from the current mempool; None when idle."""
        with self.lock:
            if not self.mempool:
                return None
            head = self.store.head
            head_state = self.store.head_state
            timestamp = max(int(time.time()), head.timestamp)
            scratch = head_state.copy()
            scratch.block_time = timestamp
            included = []
            drop = []
            for h, tx in self.mempool.items():
                try:
                    execute_transaction(scratch, tx, self.miner)
                except InadmissibleTx as exc:
                    if exc.code == BAD_NONCE and tx.nonce < scratch.nonce(tx.sender):
                        drop.append(h)
                    continue
                included.append(tx)
            for h in drop:
                self.mempool.pop(h, None)
            if not included:
                return None
            block = mine_block(head, included, self.config.target, timestamp, self.miner)
            changed = self.store.add_block(block)
            assert changed, "sole miner must extend its own head"
            self._append_log(block)
            for receipt in self.store.receipts_by_block[block_hash(block)]:
                self.receipts[receipt.tx_hash] = receipt
            for tx in included:
                self.mempool.pop(tx_hash(tx), None)
            self._rebuild_pending()
            self.events_changed.notify_all()
            return block

    def start_miner(self) -> None:
        if self._miner_thread is not None:
            return

        def loop():
            while not self._stop.wait(self.config.block_interval_seconds):
                self.mine_once()

        self._miner_thread = threading.Thread(target=loop, name="miner", daemon=True)
        self._miner_thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._miner_thread is not None:
            self._miner_thread.join(timeout=5)
            self._miner_thread = None

    # -- queries ---------------------------------------------------------

    def head_info(self) -> dict:
        with self.lock:
            head = self.store.head
            return {
                "height": head.height,
                "hash": to_hex(self.store.head_hash),
                "state_root": to_hex(state_root(self.store.head_state)),
                "timestamp": head.timestamp,
            }

    def car_snapshot(self, car: registry.Car) -> dict:
        return {
            "car_id": car.car_id,
            "owner": to_hex(car.owner),
            "initial_price": car.initial_price,
            "age_years": car.age_years,
            "miles": car.miles,
            "accident_costs": list(car.accident_costs),
            "total_accident_cost": sum(car.accident_costs),
            "trade_times": car.trade_times,
            "in_auction": car.in_auction,
            "estimated_price": registry.estimate_price(car),
        }

    def car_info(self, car_id: int) -> Optional[dict]:
        with self.lock:
            car = self.store.head_state.registry.cars.get(car_id)
            return None if car is None else self.car_snapshot(car)

    def list_cars(self) -> list[dict]:
        with self.lock:
            cars = self.store.head_state.registry.cars
            return [self.car_snapshot(cars[cid]) for cid in sorted(cars)]

    def car_price(self, car_id: int) -> Optional[dict]:
        with self.lock:
            head_state = self.store.head_state
            try:
                price = registry.calculate_price(head_state.registry, car_id)
            except ContractError:
                return None
            return {"car_id": car_id, "tprice": price}

    def auction_info(self, auction_id: int) -> Optional[dict]:
        with self.lock:
            head_state = self.store.head_state
            auction = head_state.auctions.auctions.get(auction_id)
            if auction is None:
                return None
            return auction_mod.snapshot(auction, head_state.block_time)

    def list_auctions(self) -> list[dict]:
        with self.lock:
            head_state = self.store.head_state
            return [
                auction_mod.snapshot(head_state.auctions.auctions[aid], head_state.block_time)
                for aid in sorted(head_state.auctions.auctions)
            ]

    def account_info(self, address: bytes) -> dict:
        # Unknown addresses read as empty accounts, not errors: any
        # address is a valid (if unfunded) account in this model.
        with self.lock:
            head_state = self.store.head_state
            return {
                "address": to_hex(address),
                "balance": head_state.balance(address),
                "nonce": head_state.nonce(address),
            }

    def tx_info(self, h: bytes) -> Optional[dict]:
        with self.lock:
            receipt = self.receipts.get(h)
            if receipt is not None:
                return receipt.to_json()
            if h in self.mempool:
                return {"tx_hash": to_hex(h), "status": "pending"}
            return None

    def genesis_info(self) -> dict:
        doc = self.config.to_json()
        doc["genesis_hash"] = to_hex(self.store.genesis_hash)
        return doc

    # -- event feed --------------------------------------------------------

    def events_since(self, since: int, timeout: float = 0.0) -> dict:
        """Events with seq > since. Blocks up to `timeout` seconds while
        nothing newer exists (long-poll)."""
        if since < 0:
            raise ValueError("cursor must be non-negative")
        deadline = time.monotonic() + timeout
        with self.events_changed:
            while True:
                events = self.store.head_state.events
                if len(events) > since:
                    break
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                self.events_changed.wait(remaining)
            records = [
                {
                    "seq": index + 1,
                    "block_height": event.block_height,
                    "kind": event.kind,
                    "payload": event.payload,
                }
                for index, event in enumerate(events[since:], start=since)
            ]
            return {"events": records, "next": since + len(records)}
