import pytest

from carchain.blocks import MAX_TARGET, mine_block
from carchain.chain import BlockStore
from carchain.keys import KeyPair, generate_keypair
from carchain.ledger import GenesisConfig, make_genesis
from carchain.registry import CarRegistryState
from carchain.state import WorldState
from carchain.tx import Transaction, TxKind, sign

GAS_FEE = 10


def det_key(index: int) -> KeyPair:
    """Deterministic keypair; same index always yields the same key."""
    return generate_keypair(bytes([index]) * 32)


AGENT = det_key(1)
ALICE = det_key(2)
BOB = det_key(3)
CAROL = det_key(4)
DAVE = det_key(5)
MINER = det_key(6)


def make_tx(keypair: KeyPair, kind: TxKind, payload: dict, nonce: int, fee: int = GAS_FEE):
    return sign(
        Transaction(sender=keypair.address, nonce=nonce, fee=fee, kind=kind, payload=payload),
        keypair,
    )


@pytest.fixture
def genesis_config() -> GenesisConfig:
    return GenesisConfig(
        agent=AGENT.address,
        initial_balances={
            AGENT.address: 1_000_000,
            ALICE.address: 500_000,
            BOB.address: 500_000,
            CAROL.address: 500_000,
            DAVE.address: 500_000,
        },
        target=MAX_TARGET,
        block_reward=50,
        gas_fee=GAS_FEE,
    )


class ChainHarness:
    """A BlockStore plus just enough bookkeeping to script blocks."""

    def __init__(self, config: GenesisConfig):
        self.config = config
        genesis, state = make_genesis(config)
        self.genesis = genesis
        self.store = BlockStore(genesis, state)

    @property
    def state(self):
        return self.store.head_state

    def next_nonce(self, address: bytes) -> int:
        return self.state.nonce(address)

    def mine(self, txs, timestamp=None, miner=MINER.address):
        if timestamp is None:
            timestamp = self.store.head.timestamp + 15
        block = mine_block(self.store.head, txs, self.config.target, timestamp, miner)
        self.store.add_block(block)
        return block

    def send(self, keypair: KeyPair, kind: TxKind, payload: dict, fee: int = GAS_FEE):
        return make_tx(keypair, kind, payload, self.next_nonce(keypair.address), fee)


@pytest.fixture
def chain(genesis_config) -> ChainHarness:
    return ChainHarness(genesis_config)


@pytest.fixture
def world() -> WorldState:
    """Bare contract-level state for unit tests that skip the ledger."""
    state = WorldState(registry=CarRegistryState(agent=AGENT.address))
    state.block_time = 1_000
    for keypair in (AGENT, ALICE, BOB, CAROL, DAVE):
        state.get_account(keypair.address).balance = 100_000
    return state
