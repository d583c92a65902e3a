"""Operator command line: keys, node, transactions, experiments.

Exit codes: 0 success, 1 service error, 2 usage, 3 node unreachable,
4 transaction inadmissible. Output is JSON on stdout, machine-first;
--pretty switches to indented form. Numbers pass through from the
service untouched.
"""

from __future__ import annotations

import json
import os
import sys
import time
from typing import Optional

import click
import httpx

from .codec import ADDRESS_LEN, from_hex, to_hex
from .keys import generate_keypair, load_keyfile, save_keyfile
from .ledger import GenesisConfig
from .netsim import SimConfig, catch_up_probability, double_spend_experiment, run_simulation
from .netsim.report import write_doublespend_report, write_sim_report
from .tx import KINDS_BY_NAME, Transaction, sign
from .tx import to_json as tx_to_json

EXIT_SERVICE = 1
EXIT_UNREACHABLE = 3
EXIT_INADMISSIBLE = 4

DEFAULT_NODE = "http://127.0.0.1:8545"


def _emit(data, pretty: bool) -> None:
    if pretty:
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        click.echo(json.dumps(data, sort_keys=True, separators=(",", ":")))


def _fail(code: int, error_code: str, message: str, pretty: bool = False):
    _emit({"error": {"code": error_code, "message": message}}, pretty)
    sys.exit(code)


class ServiceClient:
    def __init__(self, base_url: str):
        self.http = httpx.Client(base_url=base_url, timeout=30.0)

    def get(self, path: str, **params) -> httpx.Response:
        try:
            return self.http.get(path, params=params or None)
        except httpx.HTTPError as exc:
            _fail(EXIT_UNREACHABLE, "Unreachable", f"node not reachable: {exc}")

    def post(self, path: str, payload: dict) -> httpx.Response:
        try:
            return self.http.post(path, json=payload)
        except httpx.HTTPError as exc:
            _fail(EXIT_UNREACHABLE, "Unreachable", f"node not reachable: {exc}")


node_option = click.option(
    "--node",
    "node_url",
    envvar="NODE_URL",
    default=DEFAULT_NODE,
    show_default=True,
    help="node service base URL (env NODE_URL)",
)
pretty_option = click.option("--pretty", is_flag=True, help="indent JSON output")
key_option = click.option(
    "--key", "keyfile", required=True, type=click.Path(exists=True), help="signing keyfile"
)
nonce_option = click.option(
    "--nonce", type=int, default=None, help="override the auto-fetched account nonce"
)
fee_option = click.option(
    "--fee", type=int, default=None, help="override the fee (default: chain gas fee)"
)
wait_option = click.option(
    "--wait/--no-wait",
    default=True,
    show_default=True,
    help="poll until the transaction has a receipt",
)


@click.group()
def main():
    """Vehicle-auction chain tools."""


@main.command()
@click.option("-o", "--out", "out_path", type=click.Path(), default=None, help="keyfile path")
@click.option("--seed", "seed_hex", default=None, help="32-byte hex seed for a deterministic key")
@pretty_option
def keygen(out_path: Optional[str], seed_hex: Optional[str], pretty: bool):
    """Generate a keypair and optionally save it to a keyfile."""
    seed = from_hex(seed_hex, 32) if seed_hex else None
    keypair = generate_keypair(seed)
    result = {"address": to_hex(keypair.address), "public_key": to_hex(keypair.public)}
    if out_path:
        save_keyfile(out_path, keypair)
        result["path"] = out_path
    else:
        result["secret_key"] = to_hex(keypair.secret)
    _emit(result, pretty)


@main.command(name="run-node")
@click.option("--genesis", "genesis_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8545, show_default=True, type=int)
@click.option("--block-log", "block_log", type=click.Path(), default=None, help="JSONL block log")
@click.option("--miner", "miner_hex", default=None, help="address credited with fees and rewards")
@click.option(
    "--interval",
    type=float,
    default=None,
    help="override the genesis block_interval_seconds",
)
def run_node(genesis_path, host, port, block_log, miner_hex, interval):
    """Run the HTTP node service until interrupted."""
    from .node import MINER_PLACEHOLDER, Node
    from .service import serve

    config = GenesisConfig.load(genesis_path)
    if interval is not None:
        config.block_interval_seconds = interval
    miner = from_hex(miner_hex, ADDRESS_LEN) if miner_hex else MINER_PLACEHOLDER
    node = Node(config, block_log=block_log, miner=miner)
    click.echo(
        json.dumps(
            {"listening": f"http://{host}:{port}", "genesis_hash": node.genesis_info()["genesis_hash"]}
        ),
        err=True,
    )
    serve(node, host=host, port=port)


def _send_transaction(
    node_url: str,
    keyfile: str,
    kind_name: str,
    payload: dict,
    nonce: Optional[int],
    fee: Optional[int],
    wait: bool,
    pretty: bool,
) -> None:
    keypair = load_keyfile(keyfile)
    client = ServiceClient(node_url)

    if fee is None:
        genesis = client.get("/genesis")
        if genesis.status_code != 200:
            _fail(EXIT_SERVICE, "Service", f"/genesis returned {genesis.status_code}", pretty)
        fee = int(genesis.json()["gas_fee"])
    if nonce is None:
        account = client.get(f"/accounts/{to_hex(keypair.address)}")
        if account.status_code != 200:
            _fail(EXIT_SERVICE, "Service", f"/accounts returned {account.status_code}", pretty)
        nonce = int(account.json()["nonce"])

    tx = sign(
        Transaction(
            sender=keypair.address,
            nonce=nonce,
            fee=fee,
            kind=KINDS_BY_NAME[kind_name],
            payload=payload,
        ),
        keypair,
    )
    response = client.post("/tx", tx_to_json(tx))
    body = response.json()
    if response.status_code == 422:
        _fail(EXIT_INADMISSIBLE, body.get("code", "Inadmissible"), body.get("message", ""), pretty)
    if response.status_code != 200:
        _fail(EXIT_SERVICE, body.get("code", "Service"), body.get("message", ""), pretty)

    result = {"tx_hash": body["tx_hash"], "accepted": True}
    if wait:
        deadline = time.monotonic() + 60.0
        receipt = None
        while time.monotonic() < deadline:
            poll = client.get(f"/tx/{body['tx_hash']}")
            if poll.status_code == 200:
                receipt = poll.json()
                if receipt.get("status") != "pending":
                    break
            time.sleep(0.05)
        result["receipt"] = receipt
    _emit(result, pretty)


def _address(value: str) -> bytes:
    try:
        return from_hex(value, ADDRESS_LEN)
    except ValueError as exc:
        raise click.UsageError(f"bad address: {exc}") from exc


@main.command(name="add-car")
@click.option("--owner", required=True, help="hex address of the car owner")
@click.option("--initial-price", required=True, type=int)
@click.option("--age-years", required=True, type=int)
@click.option("--miles", required=True, type=int)
@node_option
@key_option
@nonce_option
@fee_option
@wait_option
@pretty_option
def add_car(owner, initial_price, age_years, miles, node_url, keyfile, nonce, fee, wait, pretty):
    """List a car (agent only)."""
    payload = {
        "owner": _address(owner),
        "initial_price": initial_price,
        "age_years": age_years,
        "miles": miles,
    }
    _send_transaction(node_url, keyfile, "AddCar", payload, nonce, fee, wait, pretty)


@main.command(name="upload-accident")
@click.option("--car", "car_id", required=True, type=int)
@click.option("--cost", required=True, type=int)
@node_option
@key_option
@nonce_option
@fee_option
@wait_option
@pretty_option
def upload_accident(car_id, cost, node_url, keyfile, nonce, fee, wait, pretty):
    """Record an accident cost against a car (agent only)."""
    payload = {"car_id": car_id, "cost": cost}
    _send_transaction(node_url, keyfile, "UploadAccidentCost", payload, nonce, fee, wait, pretty)


@main.command()
@click.option("--car", "car_id", required=True, type=int)
@node_option
@pretty_option
def price(car_id, node_url, pretty):
    """Query the current estimated price of a car."""
    response = ServiceClient(node_url).get(f"/cars/{car_id}/price")
    if response.status_code == 404:
        _fail(EXIT_SERVICE, "NotFound", f"car {car_id} not found", pretty)
    _emit(response.json(), pretty)


@main.command(name="start-auction")
@click.option("--car", "car_id", required=True, type=int)
@click.option("--duration", required=True, type=int, help="auction length in seconds")
@node_option
@key_option
@nonce_option
@fee_option
@wait_option
@pretty_option
def start_auction(car_id, duration, node_url, keyfile, nonce, fee, wait, pretty):
    """Open an auction on a car (agent only)."""
    payload = {"car_id": car_id, "duration_seconds": duration}
    _send_transaction(node_url, keyfile, "StartAuction", payload, nonce, fee, wait, pretty)


@main.command()
@click.option("--auction", "auction_id", required=True, type=int)
@click.option("--amount", required=True, type=int)
@node_option
@key_option
@nonce_option
@fee_option
@wait_option
@pretty_option
def bid(auction_id, amount, node_url, keyfile, nonce, fee, wait, pretty):
    """Place a bid."""
    payload = {"auction_id": auction_id, "amount": amount}
    _send_transaction(node_url, keyfile, "Bid", payload, nonce, fee, wait, pretty)


@main.command()
@click.option("--auction", "auction_id", required=True, type=int)
@node_option
@key_option
@nonce_option
@fee_option
@wait_option
@pretty_option
def withdraw(auction_id, node_url, keyfile, nonce, fee, wait, pretty):
    """Withdraw outbid funds from an auction."""
    payload = {"auction_id": auction_id}
    _send_transaction(node_url, keyfile, "Withdraw", payload, nonce, fee, wait, pretty)


@main.command(name="end-auction")
@click.option("--auction", "auction_id", required=True, type=int)
@node_option
@key_option
@nonce_option
@fee_option
@wait_option
@pretty_option
def end_auction(auction_id, node_url, keyfile, nonce, fee, wait, pretty):
    """Settle an expired auction (any key may trigger this)."""
    payload = {"auction_id": auction_id}
    _send_transaction(node_url, keyfile, "EndAuction", payload, nonce, fee, wait, pretty)


@main.command()
@click.option("--to", "to_hexaddr", required=True, help="recipient hex address")
@click.option("--amount", required=True, type=int)
@node_option
@key_option
@nonce_option
@fee_option
@wait_option
@pretty_option
def transfer(to_hexaddr, amount, node_url, keyfile, nonce, fee, wait, pretty):
    """Send currency to another account."""
    payload = {"to": _address(to_hexaddr), "amount": amount}
    _send_transaction(node_url, keyfile, "Transfer", payload, nonce, fee, wait, pretty)


@main.command(name="run-sim")
@click.option("--scenario", required=True, type=click.Path(exists=True), help="SimConfig JSON")
@click.option("--seed", type=int, default=None, help="override the scenario seed")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="write report files here")
@click.option("--figures/--no-figures", default=True, show_default=True)
@pretty_option
def run_sim(scenario, seed, out_dir, figures, pretty):
    """Run a network simulation scenario and print its report."""
    from .errors import InvalidConfig

    with open(scenario) as fh:
        doc = json.load(fh)
    try:
        config = SimConfig.from_json(doc)
        if seed is not None:
            config.seed = seed
        report = run_simulation(config)
    except InvalidConfig as exc:
        raise click.UsageError(str(exc)) from exc
    if out_dir:
        written = write_sim_report(report, out_dir, with_figures=figures)
        _emit({"report": report.to_json(), "written": written}, pretty)
    else:
        _emit(report.to_json(), pretty)


@main.command(name="double-spend")
@click.option("--q", required=True, type=float, help="attacker hash share")
@click.option("--z", "z_values", required=True, type=int, multiple=True, help="confirmations (repeatable)")
@click.option("--trials", required=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--out", "out_dir", type=click.Path(), default=None, help="write report files here")
@pretty_option
def double_spend(q, z_values, trials, seed, out_dir, pretty):
    """Monte-Carlo double-spend race vs the closed-form probability."""
    from .errors import InvalidParams

    rows = []
    for z in z_values:
        try:
            empirical = double_spend_experiment(q, z, trials, seed)
            analytic = catch_up_probability(q, z)
        except InvalidParams as exc:
            raise click.UsageError(str(exc)) from exc
        rows.append(
            {
                "q": q,
                "z": z,
                "trials": trials,
                "seed": seed,
                "empirical": empirical,
                "analytic": analytic,
                "abs_error": abs(empirical - analytic),
            }
        )
    result = {"results": rows}
    if out_dir:
        result["written"] = write_doublespend_report(rows, out_dir)
    _emit(result, pretty)


if __name__ == "__main__":
    main()
