"""World state: accounts, contract state, and the emitted-event log.

A WorldState is a plain value. Copying it is cheap at this system's
scale, and the single-writer rule for chains means nothing here needs
locking. The state root hashes a canonical serialization of accounts,
registry, and auctions (sorted, insertion-order free); the event log and
chain-position bookkeeping are deliberately outside the root.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .auction import AuctionState, escrow_total
from .codec import sha256, to_hex
from .registry import CarRegistryState


@dataclass
class Account:
    balance: int = 0
    nonce: int = 0


@dataclass
class Event:
    kind: str
    payload: dict
    block_height: Optional[int] = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "block_height": self.block_height, "payload": self.payload}


@dataclass
class ChainParams:
    """Chain constants fixed at genesis."""

    gas_fee: int = 10
    block_reward: int = 50
    genesis_supply: int = 0


@dataclass
class WorldState:
    registry: CarRegistryState
    auctions: AuctionState = field(default_factory=AuctionState)
    accounts: dict[bytes, Account] = field(default_factory=dict)
    events: list[Event] = field(default_factory=list)
    params: ChainParams = field(default_factory=ChainParams)
    block_time: int = 0  # timestamp of the last applied block
    height: int = 0  # number of blocks applied on top of genesis

    def get_account(self, address: bytes) -> Account:
        account = self.accounts.get(address)
        if account is None:
            account = Account()
            self.accounts[address] = account
        return account

    def balance(self, address: bytes) -> int:
        account = self.accounts.get(address)
        return account.balance if account else 0

    def nonce(self, address: bytes) -> int:
        account = self.accounts.get(address)
        return account.nonce if account else 0

    def emit(self, kind: str, payload: dict) -> None:
        self.events.append(Event(kind=kind, payload=payload))

    def copy(self) -> "WorldState":
        return WorldState(
            registry=self.registry.copy(),
            auctions=self.auctions.copy(),
            accounts={addr: Account(a.balance, a.nonce) for addr, a in self.accounts.items()},
            events=[Event(e.kind, dict(e.payload), e.block_height) for e in self.events],
            params=self.params,
            block_time=self.block_time,
            height=self.height,
        )

    def total_balance(self) -> int:
        return sum(account.balance for account in self.accounts.values())

    def total_escrow(self) -> int:
        return escrow_total(self.auctions)

    def conservation_holds(self) -> bool:
        """Exact integer identity: circulating funds equal the genesis
        supply plus one block reward per applied block."""
        expected = self.params.genesis_supply + self.params.block_reward * self.height
        return self.total_balance() + self.total_escrow() == expected


def state_root(state: WorldState) -> bytes:
    """Hash of the canonical serialization: accounts sorted by address,
    cars sorted by id, auctions sorted by id."""
    doc = {
        "accounts": [
            [to_hex(addr), acct.balance, acct.nonce]
            for addr, acct in sorted(state.accounts.items())
        ],
        "registry": {
            "agent": to_hex(state.registry.agent),
            "next_id": state.registry.next_id,
            "cars": [
                [
                    car.car_id,
                    to_hex(car.owner),
                    car.initial_price,
                    car.age_years,
                    car.miles,
                    list(car.accident_costs),
                    car.trade_times,
                    car.in_auction,
                ]
                for _, car in sorted(state.registry.cars.items())
            ],
        },
        "auctions": {
            "next_id": state.auctions.next_id,
            "auctions": [
                [
                    a.auction_id,
                    a.car_id,
                    to_hex(a.beneficiary),
                    a.tprice,
                    a.end_time,
                    a.highest_bid,
                    to_hex(a.highest_bidder) if a.highest_bidder else None,
                    [[to_hex(addr), amt] for addr, amt in sorted(a.pending_returns.items())],
                    a.ended,
                ]
                for _, a in sorted(state.auctions.auctions.items())
            ],
        },
    }
    return sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode())
