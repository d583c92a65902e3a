"""Ed25519 keypairs and account addresses.

An address is the first 20 bytes of SHA-256 over the raw 32-byte public
key. Ed25519 signatures are deterministic, which keeps signed workloads
byte-for-byte reproducible.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .codec import ADDRESS_LEN, from_hex, sha256, to_hex

ZERO_ADDRESS = b"\x00" * ADDRESS_LEN


def address_from_public_key(public_key: bytes) -> bytes:
    return sha256(public_key)[:ADDRESS_LEN]


@dataclass(frozen=True)
class KeyPair:
    secret: bytes  # 32-byte Ed25519 seed
    public: bytes  # 32-byte raw public key

    @property
    def address(self) -> bytes:
        return address_from_public_key(self.public)

    def to_json(self) -> dict:
        return {
            "secret_key": to_hex(self.secret),
            "public_key": to_hex(self.public),
            "address": to_hex(self.address),
        }


def generate_keypair(seed: bytes | None = None) -> KeyPair:
    """Create a keypair, optionally from a fixed 32-byte seed."""
    if seed is None:
        seed = os.urandom(32)
    if len(seed) != 32:
        raise ValueError("seed must be exactly 32 bytes")
    private = Ed25519PrivateKey.from_private_bytes(seed)
    public = private.public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )
    return KeyPair(secret=seed, public=public)


def sign_message(secret: bytes, message: bytes) -> bytes:
    return Ed25519PrivateKey.from_private_bytes(secret).sign(message)


def verify_signature(public_key: bytes, signature: bytes, message: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False


def save_keyfile(path: str | Path, keypair: KeyPair) -> None:
    path = Path(path)
    path.write_text(json.dumps(keypair.to_json(), indent=2) + "\n")
    os.chmod(path, 0o600)


def load_keyfile(path: str | Path) -> KeyPair:
    raw = json.loads(Path(path).read_text())
    pair = KeyPair(secret=from_hex(raw["secret_key"], 32), public=from_hex(raw["public_key"], 32))
    if "address" in raw and from_hex(raw["address"], ADDRESS_LEN) != pair.address:
        raise ValueError("keyfile address does not match public key")
    return pair
