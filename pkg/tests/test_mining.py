import dataclasses

import pytest

from carchain import blocks
from carchain.blocks import (
    GENESIS_PARENT,
    MAX_TARGET,
    Block,
    block_from_json,
    block_hash,
    genesis_block,
    header_bytes,
    mine_block,
    pow_ok,
)
from carchain.codec import pack_u64, pack_u256, sha256
from carchain.errors import NonceExhausted
from carchain.merkle import EMPTY_ROOT
from carchain.tx import TxKind

from tests.conftest import ALICE, BOB, MINER, make_tx

EASY = 2**248  # one in 256 hashes qualifies; found within a few hundred tries


@pytest.fixture
def genesis():
    return genesis_block(MAX_TARGET)


def test_genesis_shape(genesis):
    assert genesis.height == 0
    assert genesis.parent_hash == GENESIS_PARENT
    assert genesis.tx_root == EMPTY_ROOT
    assert genesis.transactions == ()


def test_header_layout_is_fixed_width(genesis):
    block = mine_block(genesis, [], MAX_TARGET, 77, MINER.address)
    header = header_bytes(block)
    assert len(header) == 32 + 8 + 8 + 8 + 32 + 32 + 20
    assert header[0:32] == block_hash(genesis)
    assert header[32:40] == pack_u64(1)
    assert header[40:48] == pack_u64(77)
    assert header[48:56] == pack_u64(block.pow_nonce)
    assert header[56:88] == pack_u256(MAX_TARGET)
    assert header[88:120] == block.tx_root
    assert header[120:140] == MINER.address
    assert block_hash(block) == sha256(header)


def test_trivial_target_mines_at_nonce_zero(genesis):
    block = mine_block(genesis, [], MAX_TARGET, 10, MINER.address)
    assert block.pow_nonce == 0
    assert pow_ok(block)


def test_mining_finds_first_satisfying_nonce(genesis):
    block = mine_block(genesis, [], EASY, 10, MINER.address)
    assert pow_ok(block)
    assert int.from_bytes(block_hash(block), "big") < EASY
    # every earlier nonce must fail: the search is exhaustive from zero
    for nonce in range(block.pow_nonce):
        rejected = dataclasses.replace(block, pow_nonce=nonce)
        assert not pow_ok(rejected)


def test_mining_is_deterministic(genesis):
    first = mine_block(genesis, [], EASY, 10, MINER.address)
    second = mine_block(genesis, [], EASY, 10, MINER.address)
    assert first == second
    assert block_hash(first) == block_hash(second)


def test_different_inputs_change_the_block(genesis):
    base = mine_block(genesis, [], EASY, 10, MINER.address)
    later = mine_block(genesis, [], EASY, 11, MINER.address)
    other_miner = mine_block(genesis, [], EASY, 10, ALICE.address)
    assert block_hash(base) != block_hash(later)
    assert block_hash(base) != block_hash(other_miner)


def test_transactions_commit_through_tx_root(genesis):
    tx = make_tx(ALICE, TxKind.TRANSFER, {"to": BOB.address, "amount": 5}, nonce=0)
    block = mine_block(genesis, [tx], MAX_TARGET, 10, MINER.address)
    swapped = dataclasses.replace(block, transactions=())
    assert block.tx_root != EMPTY_ROOT
    assert swapped.tx_root == block.tx_root  # root is stale, exactly the forgery
    assert pow_ok(block)


def test_nonce_exhaustion_raises(genesis, monkeypatch):
    monkeypatch.setattr(blocks, "MAX_POW_NONCE", 50)
    with pytest.raises(NonceExhausted):
        mine_block(genesis, [], 1, 10, MINER.address)


def test_pow_is_strictly_below_target(genesis):
    # target 1 admits only the all-zero hash, so nothing qualifies
    probe = dataclasses.replace(mine_block(genesis, [], MAX_TARGET, 1, MINER.address), target=1)
    assert not pow_ok(probe)


def test_block_json_round_trip(genesis):
    tx = make_tx(ALICE, TxKind.TRANSFER, {"to": BOB.address, "amount": 5}, nonce=0)
    block = mine_block(genesis, [tx], EASY, 123, MINER.address)
    again = block_from_json(block.to_json())
    assert again == block
    assert block_hash(again) == block_hash(block)


def test_block_field_validation():
    with pytest.raises(ValueError):
        Block(b"\x00" * 31, 0, 0, 0, MAX_TARGET, EMPTY_ROOT, (), MINER.address)
    with pytest.raises(ValueError):
        Block(GENESIS_PARENT, 0, 0, 0, MAX_TARGET, EMPTY_ROOT, (), b"\x01" * 19)
    with pytest.raises(ValueError):
        Block(GENESIS_PARENT, 0, 0, 0, 2**256, EMPTY_ROOT, (), MINER.address)
