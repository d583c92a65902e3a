"""Error types shared across the ledger and the two contracts."""

from __future__ import annotations


class ChainError(Exception):
    """Base for all ledger and contract failures."""


class ContractError(ChainError):
    """A contract call reverted. The containing transaction still pays
    its fee and consumes its nonce; state changes from the call itself
    are discarded (contracts check before they mutate)."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code
        self.message = message or code


class InadmissibleTx(ChainError):
    """The transaction may not enter a block at all: bad signature,
    wrong nonce, wrong fee, or not enough funds to cover fee plus any
    value the transaction locks."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code
        self.message = message or code


class BlockInvalid(ChainError):
    def __init__(self, code: str, message: str = "", tx_index: int | None = None):
        super().__init__(message or code)
        self.code = code
        self.tx_index = tx_index


class NonceExhausted(ChainError):
    """Mining ran out of nonce space: the target is infeasibly small."""


class UnknownParent(ChainError):
    """The block references a parent this store has never seen. The
    caller may buffer the block and retry once the parent arrives."""


class InvalidConfig(ChainError):
    """Simulation configuration failed validation."""


class InvalidParams(ChainError):
    """Experiment parameters failed validation."""


# Inadmissibility codes
BAD_SIGNATURE = "BadSignature"
BAD_NONCE = "BadNonce"
BAD_FEE = "BadFee"
INSUFFICIENT_FUNDS = "InsufficientFunds"

# Block validation codes
BAD_POW = "BadPow"
BAD_LINKAGE = "BadLinkage"
BAD_TIMESTAMP = "BadTimestamp"
BAD_TX_ROOT = "BadTxRoot"
BAD_TRANSACTION = "BadTransaction"

# Car registry revert codes
NOT_AGENT = "NotAgent"
BAD_PRICE = "BadPrice"
UNKNOWN_CAR = "UnknownCar"
BAD_COST = "BadCost"
CAR_IN_AUCTION = "CarInAuction"
NOT_IN_AUCTION = "NotInAuction"
CALLER_NOT_AUCTION_ENGINE = "CallerNotAuctionEngine"

# Auction revert codes
UNKNOWN_AUCTION = "UnknownAuction"
ALREADY_IN_AUCTION = "AlreadyInAuction"
BAD_DURATION = "BadDuration"
AUCTION_EXPIRED = "AuctionExpired"
BID_TOO_LOW = "BidTooLow"
BELOW_RESERVE = "BelowReserve"
SELF_BID = "SelfBid"
AUCTION_NOT_YET_ENDED = "AuctionNotYetEnded"
AUCTION_END_ALREADY_ENDED = "AuctionEndAlreadyEnded"
