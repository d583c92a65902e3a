"""Timed English auction contract with pending-returns escrow.

Bid funds leave the bidder's balance immediately and sit in escrow:
the current highest bid is live escrow, every outbid amount becomes a
pending return claimable via withdraw. Settlement pays the beneficiary
and transfers ownership through the registry. All checks happen before
any mutation, so reverts are side-effect free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

from . import errors, registry
from .errors import ContractError

if TYPE_CHECKING:
    from .state import WorldState


@dataclass
class Auction:
    auction_id: int
    car_id: int
    beneficiary: bytes
    tprice: int  # reserve price, fixed at start from the registry estimate
    end_time: int
    highest_bid: int = 0
    highest_bidder: Optional[bytes] = None
    pending_returns: dict[bytes, int] = field(default_factory=dict)
    ended: bool = False


@dataclass
class AuctionState:
    auctions: dict[int, Auction] = field(default_factory=dict)
    next_id: int = 1
    open_auction_by_car: dict[int, int] = field(default_factory=dict)

    def copy(self) -> "AuctionState":
        auctions = {
            aid: Auction(
                auction_id=a.auction_id,
                car_id=a.car_id,
                beneficiary=a.beneficiary,
                tprice=a.tprice,
                end_time=a.end_time,
                highest_bid=a.highest_bid,
                highest_bidder=a.highest_bidder,
                pending_returns=dict(a.pending_returns),
                ended=a.ended,
            )
            for aid, a in self.auctions.items()
        }
        return AuctionState(
            auctions=auctions,
            next_id=self.next_id,
            open_auction_by_car=dict(self.open_auction_by_car),
        )


def _require_auction(auctions: AuctionState, auction_id: int) -> Auction:
    auction = auctions.auctions.get(auction_id)
    if auction is None:
        raise ContractError(errors.UNKNOWN_AUCTION, f"no auction with id {auction_id}")
    return auction


def start_auction(state: "WorldState", caller: bytes, car_id: int, duration_seconds: int) -> int:
    """Agent opens an auction on a listed car. The reserve is the
    registry's price estimate at this moment; the clock is block time."""
    if caller != state.registry.agent:
        raise ContractError(errors.NOT_AGENT, "only the agent may start auctions")
    car = registry.get_car_info(state.registry, car_id)
    if car.in_auction or car_id in state.auctions.open_auction_by_car:
        raise ContractError(errors.ALREADY_IN_AUCTION, f"car {car_id} already has an open auction")
    if duration_seconds <= 0:
        raise ContractError(errors.BAD_DURATION, "duration must be positive")

    tprice = registry.estimate_price(car)
    auction_id = state.auctions.next_id
    state.auctions.next_id += 1
    auction = Auction(
        auction_id=auction_id,
        car_id=car_id,
        beneficiary=car.owner,
        tprice=tprice,
        end_time=state.block_time + duration_seconds,
    )
    state.auctions.auctions[auction_id] = auction
    state.auctions.open_auction_by_car[car_id] = auction_id
    car.in_auction = True
    state.emit(
        "AuctionStarted",
        {
            "auction_id": auction_id,
            "car_id": car_id,
            "tprice": tprice,
            "end_time": auction.end_time,
            "beneficiary": car.owner.hex(),
        },
    )
    return auction_id


def bid(state: "WorldState", caller: bytes, auction_id: int, amount: int) -> None:
    """Place a bid. Checks run in a fixed order and the first failure
    reverts: expiry, must exceed highest, must meet reserve, no
    self-bid by the beneficiary, and the bidder must have the funds."""
    auction = _require_auction(state.auctions, auction_id)
    if auction.ended or state.block_time >= auction.end_time:
        raise ContractError(errors.AUCTION_EXPIRED, "bid time has expired")
    if amount <= auction.highest_bid:
        raise ContractError(errors.BID_TOO_LOW, "bid does not exceed the highest bid")
    if amount < auction.tprice:
        raise ContractError(errors.BELOW_RESERVE, "bid is below the reserve price")
    if caller == auction.beneficiary:
        raise ContractError(errors.SELF_BID, "beneficiary may not bid")
    account = state.get_account(caller)
    if account.balance < amount:
        raise ContractError(errors.INSUFFICIENT_FUNDS, "balance does not cover the bid")

    account.balance -= amount
    if auction.highest_bidder is not None:
        returns = auction.pending_returns
        returns[auction.highest_bidder] = returns.get(auction.highest_bidder, 0) + auction.highest_bid
    auction.highest_bid = amount
    auction.highest_bidder = caller
    state.emit("BidPlaced", {"auction_id": auction_id, "bidder": caller.hex(), "amount": amount})


def withdraw(state: "WorldState", caller: bytes, auction_id: int) -> int:
    """Drain the caller's pending returns for one auction. Withdrawing
    nothing is a successful no-op, not an error."""
    auction = _require_auction(state.auctions, auction_id)
    amount = auction.pending_returns.pop(caller, 0)
    if amount == 0:
        return 0
    state.get_account(caller).balance += amount
    state.emit("Withdrawal", {"auction_id": auction_id, "who": caller.hex(), "amount": amount})
    return amount


def end_auction(state: "WorldState", caller: bytes, auction_id: int) -> None:
    """Settle an expired auction. Permissionless: anyone may trigger it.
    With a winner, the escrowed highest bid goes to the beneficiary and
    ownership transfers; with no bids the car is simply released."""
    auction = _require_auction(state.auctions, auction_id)
    if state.block_time < auction.end_time:
        raise ContractError(errors.AUCTION_NOT_YET_ENDED, "auction end time not reached")
    if auction.ended:
        raise ContractError(errors.AUCTION_END_ALREADY_ENDED, "auction already ended")

    auction.ended = True
    state.auctions.open_auction_by_car.pop(auction.car_id, None)
    if auction.highest_bidder is not None:
        state.get_account(auction.beneficiary).balance += auction.highest_bid
        registry.settle_transfer(
            state, auction.car_id, auction.highest_bidder, caller=registry.AUCTION_ENGINE
        )
        winner: Optional[str] = auction.highest_bidder.hex()
    else:
        state.registry.cars[auction.car_id].in_auction = False
        winner = None
    state.emit(
        "AuctionEnded",
        {"auction_id": auction_id, "winner": winner, "amount": auction.highest_bid},
    )


def query_auction(state: "WorldState", auction_id: int) -> dict:
    """Read-only snapshot, with time remaining relative to block time."""
    auction = _require_auction(state.auctions, auction_id)
    return snapshot(auction, state.block_time)


def snapshot(auction: Auction, block_time: int) -> dict:
    return {
        "auction_id": auction.auction_id,
        "car_id": auction.car_id,
        "beneficiary": auction.beneficiary.hex(),
        "tprice": auction.tprice,
        "end_time": auction.end_time,
        "highest_bid": auction.highest_bid,
        "highest_bidder": auction.highest_bidder.hex() if auction.highest_bidder else None,
        "pending_returns": {addr.hex(): amt for addr, amt in sorted(auction.pending_returns.items())},
        "ended": auction.ended,
        "remaining_seconds": 0 if auction.ended else max(0, auction.end_time - block_time),
    }


def escrow_total(auctions: AuctionState) -> int:
    """Funds held by the auction contract: live highest bids of open
    auctions plus all unclaimed pending returns."""
    total = 0
    for auction in auctions.auctions.values():
        if not auction.ended:
            total += auction.highest_bid
        total += sum(auction.pending_returns.values())
    return total
