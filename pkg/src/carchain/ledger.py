"""Ledger rules: genesis, transaction admissibility, block application.

Two failure layers, deliberately distinct:

* inadmissible (bad signature, wrong nonce, wrong fee, short funds) —
  the transaction may not appear in a block at all;
* contract revert — the transaction IS includable, its fee is charged
  and its nonce advances, but the contract effect is rolled up to
  nothing (contracts validate before mutating, so there is nothing to
  roll back).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import auction as auction_mod
from . import errors, registry
from .blocks import Block, block_hash, genesis_block, pow_ok
from .codec import ADDRESS_LEN, from_hex, to_hex
from .errors import BlockInvalid, ContractError, InadmissibleTx
from .merkle import merkle_root
from .registry import CarRegistryState
from .state import ChainParams, Event, WorldState
from .tx import Transaction, TxKind, tx_hash, verify


@dataclass
class GenesisConfig:
    agent: bytes
    initial_balances: dict[bytes, int] = field(default_factory=dict)
    target: int = 2**240
    block_reward: int = 50
    gas_fee: int = 10
    block_interval_seconds: float = 15.0

    def to_json(self) -> dict:
        return {
            "agent": to_hex(self.agent),
            "initial_balances": {
                to_hex(addr): bal for addr, bal in sorted(self.initial_balances.items())
            },
            "target": hex(self.target),
            "block_reward": self.block_reward,
            "gas_fee": self.gas_fee,
            "block_interval_seconds": self.block_interval_seconds,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GenesisConfig":
        try:
            return cls(
                agent=from_hex(doc["agent"], ADDRESS_LEN),
                initial_balances={
                    from_hex(addr, ADDRESS_LEN): int(bal)
                    for addr, bal in doc.get("initial_balances", {}).items()
                },
                target=int(doc["target"], 16),
                block_reward=int(doc.get("block_reward", 50)),
                gas_fee=int(doc.get("gas_fee", 10)),
                block_interval_seconds=float(doc.get("block_interval_seconds", 15.0)),
            )
        except (KeyError, ValueError, TypeError, AttributeError) as exc:
            raise errors.InvalidConfig(f"bad genesis config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "GenesisConfig":
        return cls.from_json(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


def genesis_state(config: GenesisConfig) -> WorldState:
    state = WorldState(
        registry=CarRegistryState(agent=config.agent),
        params=ChainParams(
            gas_fee=config.gas_fee,
            block_reward=config.block_reward,
            genesis_supply=sum(config.initial_balances.values()),
        ),
    )
    for addr, balance in config.initial_balances.items():
        state.get_account(addr).balance = balance
    return state


@dataclass
class TxReceipt:
    tx_hash: bytes
    status: str  # "ok" | "reverted"
    error_code: Optional[str] = None
    error_message: Optional[str] = None
    events: list[Event] = field(default_factory=list)
    block_height: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "tx_hash": to_hex(self.tx_hash),
            "status": self.status,
            "error_code": self.error_code,
            "error_message": self.error_message,
            "events": [e.to_json() for e in self.events],
            "block_height": self.block_height,
        }


def locked_value(tx: Transaction) -> int:
    """Funds the transaction commits beyond the fee: the transfer amount
    or the bid amount. Other kinds move no caller money up front."""
    if tx.kind in (TxKind.TRANSFER, TxKind.BID):
        return tx.payload["amount"]
    return 0


def check_admissible(state: WorldState, tx: Transaction) -> None:
    """Raise InadmissibleTx if the tx may not enter a block from this state."""
    if not verify(tx):
        raise InadmissibleTx(errors.BAD_SIGNATURE, "signature does not verify for sender")
    account = state.accounts.get(tx.sender)
    current_nonce = account.nonce if account else 0
    if tx.nonce != current_nonce:
        raise InadmissibleTx(
            errors.BAD_NONCE, f"expected nonce {current_nonce}, got {tx.nonce}"
        )
    if tx.fee != state.params.gas_fee:
        raise InadmissibleTx(
            errors.BAD_FEE, f"fee must be exactly {state.params.gas_fee}, got {tx.fee}"
        )
    balance = account.balance if account else 0
    needed = tx.fee + locked_value(tx)
    if balance < needed:
        raise InadmissibleTx(
            errors.INSUFFICIENT_FUNDS, f"balance {balance} below required {needed}"
        )


def _dispatch(state: WorldState, tx: Transaction) -> None:
    p = tx.payload
    if tx.kind == TxKind.TRANSFER:
        # Admissibility has already reserved fee+amount, so this cannot fail.
        state.get_account(tx.sender).balance -= p["amount"]
        state.get_account(p["to"]).balance += p["amount"]
        state.emit(
            "Transfer",
            {"from": tx.sender.hex(), "to": p["to"].hex(), "amount": p["amount"]},
        )
    elif tx.kind == TxKind.ADD_CAR:
        registry.add_car(
            state, tx.sender, p["owner"], p["initial_price"], p["age_years"], p["miles"]
        )
    elif tx.kind == TxKind.UPLOAD_ACCIDENT_COST:
        registry.upload_accident_cost(state, tx.sender, p["car_id"], p["cost"])
    elif tx.kind == TxKind.START_AUCTION:
        auction_mod.start_auction(state, tx.sender, p["car_id"], p["duration_seconds"])
    elif tx.kind == TxKind.BID:
        auction_mod.bid(state, tx.sender, p["auction_id"], p["amount"])
    elif tx.kind == TxKind.WITHDRAW:
        auction_mod.withdraw(state, tx.sender, p["auction_id"])
    elif tx.kind == TxKind.END_AUCTION:
        auction_mod.end_auction(state, tx.sender, p["auction_id"])
    else:  # pragma: no cover - TxKind is closed
        raise AssertionError(f"unhandled kind {tx.kind}")


def execute_transaction(state: WorldState, tx: Transaction, miner: bytes) -> TxReceipt:
    """Apply one admissible transaction in place. Fee and nonce are
    charged unconditionally; a ContractError downgrades the receipt to
    "reverted" but is not an error at the ledger level."""
    check_admissible(state, tx)
    sender = state.get_account(tx.sender)
    sender.nonce += 1
    sender.balance -= tx.fee
    state.get_account(miner).balance += tx.fee
    events_before = len(state.events)
    try:
        _dispatch(state, tx)
    except ContractError as exc:
        return TxReceipt(
            tx_hash=tx_hash(tx),
            status="reverted",
            error_code=exc.code,
            error_message=exc.message,
        )
    return TxReceipt(tx_hash=tx_hash(tx), status="ok", events=state.events[events_before:])


def apply_transaction(state: WorldState, tx: Transaction, miner: bytes) -> tuple[WorldState, TxReceipt]:
    """Pure flavor of execute_transaction: the input state is untouched."""
    new_state = state.copy()
    receipt = execute_transaction(new_state, tx, miner)
    return new_state, receipt


def _execute_block(state: WorldState, block: Block) -> tuple[WorldState, list[TxReceipt]]:
    """Transaction loop + reward, no header checks. Raises BlockInvalid
    on the first inadmissible transaction."""
    new_state = state.copy()
    new_state.block_time = block.timestamp
    receipts = []
    for index, tx in enumerate(block.transactions):
        try:
            receipt = execute_transaction(new_state, tx, block.miner)
        except InadmissibleTx as exc:
            raise BlockInvalid(
                errors.BAD_TRANSACTION,
                f"transaction {index} inadmissible: {exc.code}: {exc.message}",
                tx_index=index,
            ) from exc
        receipt.block_height = block.height
        receipts.append(receipt)
    new_state.get_account(block.miner).balance += new_state.params.block_reward
    new_state.height = block.height
    for event in new_state.events[len(state.events):]:
        event.block_height = block.height
    return new_state, receipts


def validate_block(
    block: Block, parent: Block, state: WorldState
) -> tuple[WorldState, list[TxReceipt]]:
    """Full validity check against the parent and the parent's state.
    Checks run in a fixed order and the first failure wins. On success
    returns the post-application state so callers need not re-execute."""
    if not pow_ok(block):
        raise BlockInvalid(errors.BAD_POW, "header hash does not meet target")
    if block.parent_hash != block_hash(parent) or block.height != parent.height + 1:
        raise BlockInvalid(errors.BAD_LINKAGE, "parent hash or height does not line up")
    if block.timestamp < parent.timestamp:
        raise BlockInvalid(errors.BAD_TIMESTAMP, "timestamp precedes parent")
    if merkle_root(block.transactions) != block.tx_root:
        raise BlockInvalid(errors.BAD_TX_ROOT, "tx_root does not match transactions")
    return _execute_block(state, block)


def apply_block(state: WorldState, block: Block) -> tuple[WorldState, list[TxReceipt]]:
    """Apply an already-validated block."""
    return _execute_block(state, block)


def make_genesis(config: GenesisConfig) -> tuple[Block, WorldState]:
    return genesis_block(config.target), genesis_state(config)
