"""Regenerate signing_vectors.json at the repo root.

The file is a frozen cross-implementation contract: one vector per
transaction kind with fixed keys and payloads, pinning the canonical
signing bytes, Ed25519 signature, and transaction hash that every
conforming implementation must reproduce bit for bit. Only regenerate
it on a deliberate, versioned change to the wire format.
"""

import json
from pathlib import Path

from carchain.codec import to_hex
from carchain.keys import generate_keypair
from carchain.tx import Transaction, TxKind, canonical_encode, sign, to_json, tx_hash

SENDER_SEED = bytes(range(1, 33))
OTHER_SEED = bytes(range(33, 65))

sender = generate_keypair(SENDER_SEED)
other = generate_keypair(OTHER_SEED)

CASES = [
    (TxKind.TRANSFER, {"to": other.address, "amount": 12345}, 0),
    (
        TxKind.ADD_CAR,
        {"owner": other.address, "initial_price": 10000, "age_years": 2, "miles": 50000},
        1,
    ),
    (TxKind.UPLOAD_ACCIDENT_COST, {"car_id": 1, "cost": 500}, 2),
    (TxKind.START_AUCTION, {"car_id": 1, "duration_seconds": 600}, 3),
    (TxKind.BID, {"auction_id": 1, "amount": 6000}, 4),
    (TxKind.WITHDRAW, {"auction_id": 1}, 5),
    (TxKind.END_AUCTION, {"auction_id": 1}, 6),
    # Extremes: zero and max u64 exercise fixed-width encoding.
    (TxKind.TRANSFER, {"to": other.address, "amount": 0}, 2**64 - 1),
    (TxKind.BID, {"auction_id": 2**64 - 1, "amount": 2**64 - 1}, 7),
]


def main():
    vectors = []
    for kind, payload, nonce in CASES:
        tx = sign(
            Transaction(sender=sender.address, nonce=nonce, fee=10, kind=kind, payload=payload),
            sender,
        )
        vectors.append(
            {
                "secret_seed": to_hex(SENDER_SEED),
                "signing_bytes": to_hex(canonical_encode(tx)),
                "tx_hash": to_hex(tx_hash(tx)),
                "wire": to_json(tx),
            }
        )
    doc = {
        "comment": "Frozen canonical-encoding and signature vectors. Do not edit by hand.",
        "public_key": to_hex(sender.public),
        "address": to_hex(sender.address),
        "vectors": vectors,
    }
    out = Path(__file__).resolve().parents[1] / "signing_vectors.json"
    out.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {out} ({len(vectors)} vectors)")


if __name__ == "__main__":
    main()
