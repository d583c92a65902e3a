"""Signed transactions and their canonical encoding.

The signing bytes are: sender address, nonce, fee, a one-byte kind tag,
then the payload fields in their declared order. All integers are
big-endian u64. The public key and signature ride along on the wire but
are never part of the signed bytes; the sender address binds the key
(address must equal the hash-derived address of the carried public key).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Any, Mapping

from .codec import ADDRESS_LEN, ByteReader, from_hex, pack_u64, sha256, to_hex
from .keys import KeyPair, address_from_public_key, sign_message, verify_signature


class TxKind(IntEnum):
    TRANSFER = 0
    ADD_CAR = 1
    UPLOAD_ACCIDENT_COST = 2
    START_AUCTION = 3
    BID = 4
    WITHDRAW = 5
    END_AUCTION = 6


KIND_NAMES: dict[TxKind, str] = {
    TxKind.TRANSFER: "Transfer",
    TxKind.ADD_CAR: "AddCar",
    TxKind.UPLOAD_ACCIDENT_COST: "UploadAccidentCost",
    TxKind.START_AUCTION: "StartAuction",
    TxKind.BID: "Bid",
    TxKind.WITHDRAW: "Withdraw",
    TxKind.END_AUCTION: "EndAuction",
}
KINDS_BY_NAME = {name: kind for kind, name in KIND_NAMES.items()}

# Payload fields in signing order. Field types: "address" (20 raw bytes)
# or "u64". Changing order or widths breaks every stored signature.
PAYLOAD_FIELDS: dict[TxKind, tuple[tuple[str, str], ...]] = {
    TxKind.TRANSFER: (("to", "address"), ("amount", "u64")),
    TxKind.ADD_CAR: (
        ("owner", "address"),
        ("initial_price", "u64"),
        ("age_years", "u64"),
        ("miles", "u64"),
    ),
    TxKind.UPLOAD_ACCIDENT_COST: (("car_id", "u64"), ("cost", "u64")),
    TxKind.START_AUCTION: (("car_id", "u64"), ("duration_seconds", "u64")),
    TxKind.BID: (("auction_id", "u64"), ("amount", "u64")),
    TxKind.WITHDRAW: (("auction_id", "u64"),),
    TxKind.END_AUCTION: (("auction_id", "u64"),),
}


@dataclass(frozen=True)
class Transaction:
    sender: bytes
    nonce: int
    fee: int
    kind: TxKind
    payload: Mapping[str, Any]
    public_key: bytes = b""
    signature: bytes = b""

    def __post_init__(self):
        if len(self.sender) != ADDRESS_LEN:
            raise ValueError("sender must be a 20-byte address")
        for name, ftype in PAYLOAD_FIELDS[self.kind]:
            if name not in self.payload:
                raise ValueError(f"{KIND_NAMES[self.kind]} payload missing field {name!r}")
            value = self.payload[name]
            if ftype == "address" and (not isinstance(value, bytes) or len(value) != ADDRESS_LEN):
                raise ValueError(f"payload field {name!r} must be a 20-byte address")
            if ftype == "u64" and (not isinstance(value, int) or isinstance(value, bool) or value < 0):
                raise ValueError(f"payload field {name!r} must be a non-negative integer")


def canonical_encode(tx: Transaction) -> bytes:
    """The exact bytes that get signed. Deterministic and injective."""
    parts = [tx.sender, pack_u64(tx.nonce), pack_u64(tx.fee), bytes([int(tx.kind)])]
    for name, ftype in PAYLOAD_FIELDS[tx.kind]:
        value = tx.payload[name]
        parts.append(value if ftype == "address" else pack_u64(value))
    return b"".join(parts)


def canonical_decode(data: bytes) -> Transaction:
    """Inverse of canonical_encode; yields an unsigned transaction."""
    reader = ByteReader(data)
    sender = reader.address()
    nonce = reader.u64()
    fee = reader.u64()
    tag = reader.u8()
    try:
        kind = TxKind(tag)
    except ValueError:
        raise ValueError(f"unknown transaction kind tag {tag}") from None
    payload = {}
    for name, ftype in PAYLOAD_FIELDS[kind]:
        payload[name] = reader.address() if ftype == "address" else reader.u64()
    if not reader.done():
        raise ValueError("trailing bytes after payload")
    return Transaction(sender=sender, nonce=nonce, fee=fee, kind=kind, payload=payload)


def sign(tx: Transaction, keypair: KeyPair) -> Transaction:
    """Attach the key's signature. Does not check the key matches the
    sender address; verify() enforces that binding."""
    signature = sign_message(keypair.secret, canonical_encode(tx))
    return replace(tx, public_key=keypair.public, signature=signature)


def verify(tx: Transaction) -> bool:
    if len(tx.public_key) != 32 or not tx.signature:
        return False
    if address_from_public_key(tx.public_key) != tx.sender:
        return False
    return verify_signature(tx.public_key, tx.signature, canonical_encode(tx))


def tx_hash(tx: Transaction) -> bytes:
    return sha256(canonical_encode(tx) + tx.public_key + tx.signature)


def to_json(tx: Transaction) -> dict:
    payload = {}
    for name, ftype in PAYLOAD_FIELDS[tx.kind]:
        value = tx.payload[name]
        payload[name] = to_hex(value) if ftype == "address" else value
    return {
        "sender": to_hex(tx.sender),
        "nonce": tx.nonce,
        "fee": tx.fee,
        "kind": KIND_NAMES[tx.kind],
        "payload": payload,
        "public_key": to_hex(tx.public_key),
        "signature": to_hex(tx.signature),
    }


def from_json(raw: Mapping[str, Any]) -> Transaction:
    try:
        kind = KINDS_BY_NAME[raw["kind"]]
    except KeyError:
        raise ValueError(f"unknown transaction kind {raw.get('kind')!r}") from None
    payload = {}
    for name, ftype in PAYLOAD_FIELDS[kind]:
        value = raw["payload"][name]
        if ftype == "address":
            payload[name] = from_hex(value, ADDRESS_LEN)
        else:
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ValueError(f"payload field {name!r} must be a non-negative integer")
            payload[name] = value
    return Transaction(
        sender=from_hex(raw["sender"], ADDRESS_LEN),
        nonce=int(raw["nonce"]),
        fee=int(raw["fee"]),
        kind=kind,
        payload=payload,
        public_key=from_hex(raw.get("public_key", "")),
        signature=from_hex(raw.get("signature", "")),
    )


def dumps(tx: Transaction) -> str:
    return json.dumps(to_json(tx), sort_keys=True, separators=(",", ":"))
