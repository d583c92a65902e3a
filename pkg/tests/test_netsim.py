import json

import pytest

from carchain.errors import InvalidConfig
from carchain.ledger import GenesisConfig
from carchain.netsim import SimConfig, convergence_experiment, run_simulation
from carchain.netsim.report import write_doublespend_report, write_sim_report
from carchain.netsim.sim import _Simulation
from carchain.tx import TxKind

from tests.conftest import AGENT, ALICE, BOB, make_tx


def funded_genesis():
    return GenesisConfig(
        agent=AGENT.address,
        initial_balances={ALICE.address: 10_000, BOB.address: 10_000},
    )


def transfer_workload():
    return [
        (5.0, make_tx(ALICE, TxKind.TRANSFER, {"to": BOB.address, "amount": 100}, nonce=0)),
        (9.0, make_tx(ALICE, TxKind.TRANSFER, {"to": BOB.address, "amount": 200}, nonce=1)),
        (40.0, make_tx(BOB, TxKind.TRANSFER, {"to": ALICE.address, "amount": 50}, nonce=0)),
    ]


def test_identical_configs_produce_identical_reports():
    config = SimConfig(seed=5, num_honest=6, mean_latency=1.5, horizon_blocks=40)
    first = json.dumps(run_simulation(config).to_json(), sort_keys=True)
    second = json.dumps(run_simulation(config).to_json(), sort_keys=True)
    assert first == second


def test_seed_changes_the_run():
    base = SimConfig(seed=1, num_honest=4, mean_latency=1.0, horizon_blocks=30)
    other = SimConfig(seed=2, num_honest=4, mean_latency=1.0, horizon_blocks=30)
    assert (
        run_simulation(base).event_log_hash != run_simulation(other).event_log_hash
    )


def test_single_node_chain_grows_straight():
    report = run_simulation(SimConfig(seed=0, num_honest=1, horizon_blocks=25))
    assert report.blocks_mined == 25
    assert report.node_heads[0]["height"] == 25
    assert report.heads_equal and report.state_roots_equal
    assert report.max_reorg_depth == 0
    assert report.invalid_blocks == 0


def test_ten_node_network_converges():
    result = convergence_experiment(
        SimConfig(
            seed=1234,
            num_honest=10,
            mean_block_interval=15.0,
            mean_latency=1.0,
            horizon_blocks=200,
        )
    )
    assert result["heads_equal"] is True
    assert result["state_roots_equal"] is True
    assert result["blocks_mined"] == 200
    assert result["max_reorg_depth"] <= 4  # rare fork races at 1s gossip


def test_convergence_experiment_rejects_attackers():
    with pytest.raises(InvalidConfig):
        convergence_experiment(SimConfig(attacker_share=0.2))


def test_slow_gossip_causes_reorgs():
    # latency far above the block interval guarantees fork races
    report = run_simulation(
        SimConfig(
            seed=3,
            num_honest=6,
            mean_block_interval=2.0,
            mean_latency=10.0,
            horizon_blocks=80,
        )
    )
    assert report.max_reorg_depth >= 1
    assert sum(report.reorg_depth_histogram.values()) >= 1
    assert max(report.reorg_depth_histogram) == report.max_reorg_depth
    # the queue drains fully, so the network still agrees at the end
    assert report.heads_equal and report.state_roots_equal


def test_workload_transactions_confirm_and_apply():
    config = SimConfig(
        seed=7,
        num_honest=4,
        mean_block_interval=5.0,
        mean_latency=0.5,
        horizon_blocks=40,
        genesis=funded_genesis(),
    )
    sim = _Simulation(config, transfer_workload())
    report = sim.run()
    assert len(report.tx_confirmations) == 3
    for row in report.tx_confirmations:
        assert row["confirmed"] is not None
        assert row["latency"] >= 0
        assert row["confirmed"] >= row["submitted"]
    assert report.heads_equal and report.state_roots_equal
    state = sim.honest_nodes[0].store.head_state
    assert state.balance(ALICE.address) == 10_000 - 100 - 200 + 50 - 20
    assert state.balance(BOB.address) == 10_000 + 100 + 200 - 50 - 10


def test_attacker_mines_privately():
    report = run_simulation(
        SimConfig(seed=11, num_honest=3, attacker_share=0.4, horizon_blocks=60)
    )
    roles = [h["role"] for h in report.node_heads]
    assert roles == ["honest", "honest", "honest", "attacker"]
    assert report.blocks_mined == 60
    assert report.heads_equal  # attacker withholding cannot split honest nodes
    honest_height = report.node_heads[0]["height"]
    assert honest_height < 60  # the attacker kept some blocks to itself


def test_real_backend_runs_actual_proof_of_work():
    report = run_simulation(
        SimConfig(
            seed=2,
            num_honest=3,
            mean_block_interval=1.0,
            mean_latency=0.1,
            horizon_blocks=8,
            backend="real",
            target=2**250,
        )
    )
    assert report.blocks_mined == 8
    assert report.heads_equal and report.state_roots_equal
    assert report.invalid_blocks == 0


def test_time_horizon_stops_production():
    report = run_simulation(
        SimConfig(
            seed=4,
            num_honest=2,
            mean_block_interval=5.0,
            horizon_blocks=None,
            horizon_seconds=120.0,
        )
    )
    assert report.blocks_mined >= 1
    # the first production event past the horizon is a no-op, so the
    # drained queue always ends just beyond it
    assert report.final_time > 120.0
    assert report.node_heads[0]["height"] == report.blocks_mined


@pytest.mark.parametrize(
    "kwargs",
    [
        {"num_honest": 0},
        {"attacker_share": 1.0},
        {"attacker_share": -0.1},
        {"mean_block_interval": 0.0},
        {"mean_latency": -1.0},
        {"horizon_blocks": None, "horizon_seconds": None},
        {"horizon_blocks": 0},
        {"horizon_seconds": 0.0},
        {"confirmations": -1},
        {"backend": "quantum"},
        {"seed": -1},
    ],
)
def test_config_validation_rejects(kwargs):
    with pytest.raises(InvalidConfig):
        SimConfig(**kwargs).validate()


def test_config_json_round_trip():
    config = SimConfig(
        seed=9,
        num_honest=5,
        attacker_share=0.25,
        mean_block_interval=10.0,
        mean_latency=2.0,
        horizon_blocks=50,
        confirmations=4,
        backend="real",
        target=2**200,
        genesis=funded_genesis(),
    )
    again = SimConfig.from_json(config.to_json())
    assert again == config


def test_config_from_json_rejects_garbage():
    with pytest.raises(InvalidConfig):
        SimConfig.from_json({"target": "not-hex"})
    with pytest.raises(InvalidConfig):
        SimConfig.from_json({"num_honest": 0})


def test_report_files_are_written(tmp_path):
    config = SimConfig(
        seed=7,
        num_honest=4,
        mean_block_interval=5.0,
        mean_latency=0.5,
        horizon_blocks=30,
        genesis=funded_genesis(),
    )
    report = run_simulation(config, transfer_workload())
    manifest = write_sim_report(report, tmp_path, basename="run")
    assert set(manifest) == {"report", "reorgs_csv", "latency_csv", "reorgs_png", "latency_png"}
    for path in manifest.values():
        assert (tmp_path / path.split("/")[-1]).stat().st_size > 0
    doc = json.loads((tmp_path / "run.json").read_text())
    assert doc["blocks_mined"] == report.blocks_mined
    header = (tmp_path / "run_latency.csv").read_text().splitlines()[0]
    assert header == "tx_hash,origin,submitted,confirmed,latency"
    assert (tmp_path / "run_reorgs.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_doublespend_report_files(tmp_path):
    rows = [
        {"q": 0.1, "z": z, "trials": 100, "empirical": 0.5 / (z + 1), "analytic": 0.4 / (z + 1)}
        for z in range(3)
    ]
    manifest = write_doublespend_report(rows, tmp_path)
    assert set(manifest) == {"report", "csv", "png"}
    lines = (tmp_path / "doublespend.csv").read_text().splitlines()
    assert lines[0] == "q,z,trials,empirical,analytic"
    assert len(lines) == 4
    assert (tmp_path / "doublespend.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
