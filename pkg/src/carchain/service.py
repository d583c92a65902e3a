"""HTTP+JSON surface over a Node.

All hashes and addresses travel hex-encoded; errors are {code, message}
with 400 for malformed input, 404 for unknown resources, and 422 for
transactions the ledger refuses. CORS is wide open: keys never touch
the service, signing happens client-side.
"""

from __future__ import annotations

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .codec import ADDRESS_LEN, HASH_LEN, from_hex
from .errors import InadmissibleTx
from .node import Node

# Long-poll ceiling; clients may ask for less.
MAX_POLL_TIMEOUT = 25.0


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _not_found(what: str) -> JSONResponse:
    return _error(404, "NotFound", f"{what} not found")


def build_app(node: Node) -> FastAPI:
    app = FastAPI(title="carchain node", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.node = node

    @app.post("/tx")
    async def submit_tx(request: Request):
        try:
            raw = await request.json()
        except Exception:
            return _error(400, "Malformed", "body is not valid JSON")
        if not isinstance(raw, dict):
            return _error(400, "Malformed", "body must be a JSON object")
        try:
            return node.submit(raw)
        except InadmissibleTx as exc:
            return _error(422, exc.code, str(exc))
        except (KeyError, ValueError, TypeError) as exc:
            return _error(400, "Malformed", f"bad transaction: {exc}")

    @app.get("/tx/{tx_hash_hex}")
    def get_tx(tx_hash_hex: str):
        try:
            h = from_hex(tx_hash_hex, HASH_LEN)
        except ValueError:
            return _error(400, "Malformed", "tx hash must be 32 bytes hex")
        info = node.tx_info(h)
        return info if info is not None else _not_found("transaction")

    @app.get("/cars")
    def list_cars():
        return {"cars": node.list_cars()}

    @app.get("/cars/{car_id}")
    def get_car(car_id: int):
        info = node.car_info(car_id)
        return info if info is not None else _not_found("car")

    @app.get("/cars/{car_id}/price")
    def get_car_price(car_id: int):
        info = node.car_price(car_id)
        return info if info is not None else _not_found("car")

    @app.get("/auctions")
    def list_auctions():
        return {"auctions": node.list_auctions()}

    @app.get("/auctions/{auction_id}")
    def get_auction(auction_id: int):
        info = node.auction_info(auction_id)
        return info if info is not None else _not_found("auction")

    @app.get("/accounts/{address_hex}")
    def get_account(address_hex: str):
        try:
            address = from_hex(address_hex, ADDRESS_LEN)
        except ValueError:
            return _error(400, "Malformed", "address must be 20 bytes hex")
        return node.account_info(address)

    @app.get("/chain/head")
    def chain_head():
        return node.head_info()

    @app.get("/genesis")
    def genesis():
        return node.genesis_info()

    @app.get("/events")
    def events(since: int = Query(0), timeout: float = Query(0.0)):
        if since < 0:
            return _error(400, "BadCursor", "since must be non-negative")
        timeout = min(max(timeout, 0.0), MAX_POLL_TIMEOUT)
        return node.events_since(since, timeout)

    return app


def serve(node: Node, host: str = "127.0.0.1", port: int = 8545, log_level: str = "warning"):
    import uvicorn

    node.start_miner()
    try:
        uvicorn.run(build_app(node), host=host, port=port, log_level=log_level)
    finally:
        node.stop()
