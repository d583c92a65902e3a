"""Release acceptance gate.

One test per production criterion, each ending in a single printed
PASS/FAIL line with the measured value against its tolerance. Run with
`pytest tests/test_acceptance.py -v` for the per-criterion verdicts.
"""

import json
import math
import random
import threading
import time

import httpx
import pytest
import uvicorn
from click.testing import CliRunner

from carchain import registry
from carchain.auction import bid, end_auction, start_auction, withdraw
from carchain.blocks import mine_block
from carchain.chain import BlockStore
from carchain.cli import main as cli_main
from carchain.errors import ContractError
from carchain.ledger import GenesisConfig, make_genesis
from carchain.netsim import SimConfig, catch_up_probability, double_spend_experiment, run_simulation
from carchain.node import Node
from carchain.registry import Car, CarRegistryState, estimate_price
from carchain.service import build_app
from carchain.state import WorldState, state_root
from carchain.tx import TxKind

from tests.conftest import AGENT, ALICE, BOB, CAROL, det_key, make_tx
from tests.test_auction import bid_oracle
from tests.test_registry import oracle_price
from tests.workload import build_scripted_chain

WORKLOAD_SEED = 20_260_815


def criterion(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def scripted():
    return build_scripted_chain(WORKLOAD_SEED)


def test_replay_determinism(scripted):
    started = time.perf_counter()
    first, _ = build_scripted_chain(WORKLOAD_SEED)
    second, _ = build_scripted_chain(WORKLOAD_SEED)
    replayed = BlockStore(*make_genesis(first.config))
    for block in first.store.canonical_chain()[1:]:
        replayed.add_block(block)
    elapsed = time.perf_counter() - started

    roots = {
        state_root(first.store.head_state),
        state_root(second.store.head_state),
        state_root(replayed.head_state),
        state_root(scripted[0].store.head_state),
    }
    criterion(
        "replay-determinism",
        len(roots) == 1 and elapsed < 10.0,
        f"4 independent builds/replays of the 500-tx workload share one "
        f"state root in {elapsed:.2f}s (< 10s)",
    )


def test_conservation(scripted):
    chain, stats = scripted
    state = chain.store.head_state
    supply = state.params.genesis_supply + state.params.block_reward * state.height
    books = state.total_balance() + state.total_escrow()
    shape_ok = (
        stats["transactions"] == 500
        and stats["auctions"] >= 50
        and stats["bids"] >= 200
        and stats["withdraws"] > 0
    )
    criterion(
        "conservation",
        books == supply and shape_ok,
        f"balances+escrow {books} == supply {supply} after "
        f"{stats['transactions']} txs / {stats['auctions']} auctions / "
        f"{stats['bids']} bids / {stats['withdraws']} withdraws",
    )


def fresh_world(bidders):
    state = WorldState(registry=CarRegistryState(agent=AGENT.address))
    state.block_time = 1_000
    for keypair in bidders:
        state.get_account(keypair.address).balance = 1_000_000
    return state


def test_auction_rules():
    failures = []

    def expect(code, fn, *args):
        try:
            fn(*args)
            failures.append(f"expected {code}, nothing raised")
        except ContractError as exc:
            if exc.code != code:
                failures.append(f"expected {code}, got {exc.code}")

    bidders = [ALICE, BOB, CAROL, det_key(7), det_key(8)]
    world = fresh_world([AGENT] + bidders)
    cid = registry.add_car(world, AGENT.address, ALICE.address, 10_000, 0, 0)
    aid = start_auction(world, AGENT.address, cid, 600)

    # the five bid rejections, probed in their check order
    world.block_time += 600
    expect("AuctionExpired", bid, world, BOB.address, aid, 10_000)
    world.block_time -= 600
    bid(world, BOB.address, aid, 10_000)
    expect("BidTooLow", bid, world, CAROL.address, aid, 10_000)
    world2 = fresh_world([AGENT] + bidders)
    cid2 = registry.add_car(world2, AGENT.address, ALICE.address, 10_000, 0, 0)
    aid2 = start_auction(world2, AGENT.address, cid2, 600)
    expect("BelowReserve", bid, world2, BOB.address, aid2, 9_999)
    expect("SelfBid", bid, world2, ALICE.address, aid2, 10_500)
    expect("InsufficientFunds", bid, world2, BOB.address, aid2, 2_000_000)

    # both settlement rejections
    expect("AuctionNotYetEnded", end_auction, world2, BOB.address, aid2)
    world.block_time += 600
    end_auction(world, CAROL.address, aid)
    expect("AuctionEndAlreadyEnded", end_auction, world, CAROL.address, aid)

    # zero-bid settlement releases the car to its seller
    world2.block_time += 600
    end_auction(world2, BOB.address, aid2)
    car2 = world2.registry.cars[cid2]
    if car2.owner != ALICE.address or car2.in_auction or car2.trade_times != 0:
        failures.append("zero-bid settlement changed ownership")

    # 1,000 random auctions against the brute-force bid-log oracle
    rng = random.Random(424_242)
    world = fresh_world([AGENT] + bidders)
    mismatches = 0
    for round_no in range(1_000):
        seller = rng.choice(bidders)
        price = rng.randrange(100, 5_000)
        duration = rng.randrange(50, 400)
        cid = registry.add_car(world, AGENT.address, seller.address, price, 0, 0)
        aid = start_auction(world, AGENT.address, cid, duration)
        end_time = world.auctions.auctions[aid].end_time
        balances = {k.address: world.balance(k.address) for k in bidders}

        events = []
        for _ in range(rng.randrange(0, 14)):
            world.block_time += rng.randrange(0, duration // 3 + 1)
            bidder = rng.choice(bidders)
            amount = rng.randrange(max(1, price - 300), price * 3)
            events.append((world.block_time, bidder.address, amount))
            try:
                bid(world, bidder.address, aid, amount)
            except ContractError:
                pass

        winner, highest, refunds, _ = bid_oracle(
            events, price, seller.address, balances, end_time
        )
        auction = world.auctions.auctions[aid]
        # snapshot before settlement: end/withdraw drain these fields
        observed = (auction.highest_bidder, auction.highest_bid, dict(auction.pending_returns))
        world.block_time = max(world.block_time, end_time)
        end_auction(world, AGENT.address, aid)
        for keypair in bidders:
            withdraw(world, keypair.address, aid)
        owner_after = world.registry.cars[cid].owner
        expected_owner = winner if winner is not None else seller.address
        # SelfBid bars the seller, so after everyone withdraws the seller's
        # only balance change is the winning amount (zero when unsold).
        seller_gain = world.balance(seller.address) - balances[seller.address]
        if (
            observed != (winner, highest, refunds)
            or owner_after != expected_owner
            or seller_gain != highest
        ):
            mismatches += 1
        world.block_time += rng.randrange(1, 40)

    criterion(
        "auction-rules",
        not failures and mismatches == 0,
        f"5 bid reverts + 2 end reverts + empty settlement exact; "
        f"{mismatches}/1000 oracle mismatches"
        + (f"; failures: {failures}" if failures else ""),
    )


def test_price_oracle_equivalence():
    rng = random.Random(77_001)
    exact = 0
    for _ in range(1_000):
        car = Car(
            car_id=1,
            owner=ALICE.address,
            initial_price=rng.randrange(1, 1_000_000),
            age_years=rng.randrange(0, 40),
            miles=rng.randrange(0, 400_000),
            accident_costs=[rng.randrange(1, 20_000) for _ in range(rng.randrange(0, 5))],
            trade_times=rng.randrange(0, 12),
        )
        if estimate_price(car) == oracle_price(
            car.initial_price, car.age_years, car.miles, car.accident_costs, car.trade_times
        ):
            exact += 1

    monotone = 0
    for _ in range(10_000):
        base = Car(
            car_id=1,
            owner=ALICE.address,
            initial_price=rng.randrange(1, 100_000),
            age_years=rng.randrange(0, 20),
            miles=rng.randrange(0, 250_000),
            accident_costs=[rng.randrange(1, 5_000) for _ in range(rng.randrange(0, 3))],
            trade_times=rng.randrange(0, 6),
        )
        worse = Car(
            car_id=1,
            owner=base.owner,
            initial_price=base.initial_price,
            age_years=base.age_years,
            miles=base.miles,
            accident_costs=list(base.accident_costs),
            trade_times=base.trade_times,
        )
        which = rng.randrange(4)
        bump = rng.randrange(1, 1_000)
        if which == 0:
            worse.age_years += bump
        elif which == 1:
            worse.miles += bump
        elif which == 2:
            worse.accident_costs.append(bump)
        else:
            worse.trade_times += bump
        if estimate_price(worse) <= estimate_price(base):
            monotone += 1

    criterion(
        "price-oracle",
        exact == 1_000 and monotone == 10_000,
        f"{exact}/1000 random cars exact vs straight-line oracle; "
        f"{monotone}/10000 perturbation pairs monotone",
    )


def test_double_spend_statistics():
    started = time.perf_counter()
    analytic_a = catch_up_probability(0.1, 2)
    empirical_a = double_spend_experiment(0.1, 2, trials=100_000, seed=31_337)
    error_a = abs(empirical_a - analytic_a)

    analytic_b = catch_up_probability(0.25, 4)
    empirical_b = double_spend_experiment(0.25, 4, trials=100_000, seed=31_337)
    se_b = math.sqrt(analytic_b * (1.0 - analytic_b) / 100_000)
    error_b = abs(empirical_b - analytic_b)
    elapsed = time.perf_counter() - started

    criterion(
        "double-spend",
        error_a <= 0.01
        and abs(analytic_a - 0.0509779) < 1e-4
        and error_b <= 3 * se_b
        and elapsed < 60.0,
        f"q=0.1 z=2: |{empirical_a:.5f}-{analytic_a:.5f}|={error_a:.5f} <= 0.01; "
        f"q=0.25 z=4: err {error_b:.5f} <= 3SE {3 * se_b:.5f}; {elapsed:.1f}s (< 60s)",
    )


def test_network_convergence():
    started = time.perf_counter()
    report = run_simulation(
        SimConfig(
            seed=808,
            num_honest=10,
            mean_block_interval=15.0,
            mean_latency=1.0,
            horizon_blocks=200,
        )
    )
    elapsed = time.perf_counter() - started
    criterion(
        "convergence",
        report.heads_equal and report.state_roots_equal and elapsed < 30.0,
        f"10 nodes / 15s blocks / 1s gossip / 200 blocks: heads equal, "
        f"state roots equal, max reorg {report.max_reorg_depth}, {elapsed:.1f}s (< 30s)",
    )


def test_real_proof_of_work_chain():
    config = GenesisConfig(
        agent=AGENT.address,
        initial_balances={ALICE.address: 1_000_000, BOB.address: 1_000_000},
        target=2**240,
    )
    genesis, state = make_genesis(config)
    store = BlockStore(genesis, state)

    started = time.perf_counter()
    nonce_a = nonce_b = 0
    for height in range(1, 21):
        txs = [make_tx(ALICE, TxKind.TRANSFER, {"to": BOB.address, "amount": 5}, nonce_a)]
        nonce_a += 1
        if height % 2 == 0:
            txs.append(make_tx(BOB, TxKind.TRANSFER, {"to": ALICE.address, "amount": 3}, nonce_b))
            nonce_b += 1
        block = mine_block(store.head, txs, config.target, store.head.timestamp + 15, BOB.address)
        store.add_block(block)

    # every block re-passes full validation on an independent store
    replay = BlockStore(genesis, state)
    accepted = 0
    for block in store.canonical_chain()[1:]:
        replay.add_block(block)
        accepted += 1
    elapsed = time.perf_counter() - started

    searched = sum(b.pow_nonce for b in store.canonical_chain()[1:])
    criterion(
        "real-pow",
        store.head.height == 20 and accepted == 20 and searched > 0 and elapsed < 60.0,
        f"20 blocks at target 2^240 mined+revalidated in {elapsed:.1f}s (< 60s), "
        f"{searched} nonces searched",
    )


def test_cli_service_round_trip(tmp_path):
    config = GenesisConfig(
        agent=AGENT.address,
        initial_balances={
            AGENT.address: 1_000_000,
            ALICE.address: 500_000,
            BOB.address: 500_000,
            CAROL.address: 500_000,
        },
        target=2**255,
        block_interval_seconds=0.05,
    )
    node = Node(config)
    server = uvicorn.Server(
        uvicorn.Config(build_app(node), host="127.0.0.1", port=0, log_level="error")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.01)
    node.start_miner()
    url = f"http://127.0.0.1:{server.servers[0].sockets[0].getsockname()[1]}"

    runner = CliRunner()

    def cli(*args):
        result = runner.invoke(
            cli_main, [str(a) for a in args], env={"NODE_URL": url}, catch_exceptions=False
        )
        assert result.exit_code == 0, result.output
        return json.loads(result.output)

    try:
        keys = {}
        for name, keypair in (("agent", AGENT), ("bob", BOB), ("carol", CAROL)):
            path = tmp_path / f"{name}.key"
            cli("keygen", "-o", path, "--seed", keypair.secret.hex())
            keys[name] = path

        steps = [
            cli("add-car", "--owner", ALICE.address.hex(), "--initial-price", "4000",
                "--age-years", "0", "--miles", "0", "--key", keys["agent"]),
            cli("start-auction", "--car", "1", "--duration", "2", "--key", keys["agent"]),
            cli("bid", "--auction", "1", "--amount", "4000", "--key", keys["bob"]),
            cli("bid", "--auction", "1", "--amount", "5000", "--key", keys["carol"]),
        ]
        time.sleep(2.1)
        steps.append(cli("end-auction", "--auction", "1", "--key", keys["bob"]))
        statuses = [s["receipt"]["status"] for s in steps]

        cars = httpx.get(f"{url}/cars").json()["cars"]
        owner = cars[0]["owner"] if cars else None
    finally:
        node.stop()
        server.should_exit = True
        thread.join(timeout=5)

    criterion(
        "cli-round-trip",
        statuses == ["ok"] * 5 and owner == CAROL.address.hex(),
        f"keygen/add-car/start-auction/2 bids/end all ok; "
        f"GET /cars shows winning bidder as owner",
    )
