// Transaction construction mirroring the chain's canonical encoding:
// sender(20) || nonce u64 || fee u64 || kind u8 || payload fields in
// declared order, addresses raw and integers big-endian u64. The
// public key and signature ride on the wire but are never signed.

import { ADDRESS_LEN, concat, fromHex, packU64, sha256, toHex } from "./codec.js";
import { KeyPair, signBytes } from "./keys.js";

export type TxKind =
  | "Transfer"
  | "AddCar"
  | "UploadAccidentCost"
  | "StartAuction"
  | "Bid"
  | "Withdraw"
  | "EndAuction";

type FieldType = "address" | "u64";

const KIND_TAGS: Record<TxKind, number> = {
  Transfer: 0,
  AddCar: 1,
  UploadAccidentCost: 2,
  StartAuction: 3,
  Bid: 4,
  Withdraw: 5,
  EndAuction: 6,
};

// Field order is consensus-critical; it matches the chain exactly.
const PAYLOAD_FIELDS: Record<TxKind, [string, FieldType][]> = {
  Transfer: [
    ["to", "address"],
    ["amount", "u64"],
  ],
  AddCar: [
    ["owner", "address"],
    ["initial_price", "u64"],
    ["age_years", "u64"],
    ["miles", "u64"],
  ],
  UploadAccidentCost: [
    ["car_id", "u64"],
    ["cost", "u64"],
  ],
  StartAuction: [
    ["car_id", "u64"],
    ["duration_seconds", "u64"],
  ],
  Bid: [
    ["auction_id", "u64"],
    ["amount", "u64"],
  ],
  Withdraw: [["auction_id", "u64"]],
  EndAuction: [["auction_id", "u64"]],
};

export type PayloadValue = string | number | bigint; // addresses as hex strings

export interface Tx {
  sender: string; // address hex
  nonce: number | bigint;
  fee: number | bigint;
  kind: TxKind;
  payload: Record<string, PayloadValue>;
}

export interface SignedTx extends Tx {
  publicKey: Uint8Array;
  signature: Uint8Array;
}

export function canonicalEncode(tx: Tx): Uint8Array {
  const parts: Uint8Array[] = [
    fromHex(tx.sender, ADDRESS_LEN),
    packU64(tx.nonce),
    packU64(tx.fee),
    Uint8Array.of(KIND_TAGS[tx.kind]),
  ];
  for (const [name, ftype] of PAYLOAD_FIELDS[tx.kind]) {
    const value = tx.payload[name];
    if (value === undefined) throw new Error(`${tx.kind} payload missing field '${name}'`);
    if (ftype === "address") {
      parts.push(fromHex(String(value), ADDRESS_LEN));
    } else {
      if (typeof value === "string") throw new Error(`field '${name}' must be an integer`);
      parts.push(packU64(value));
    }
  }
  return concat(...parts);
}

export async function txHash(tx: SignedTx): Promise<string> {
  return toHex(await sha256(concat(canonicalEncode(tx), tx.publicKey, tx.signature)));
}

export async function signTx(tx: Tx, keypair: KeyPair): Promise<SignedTx> {
  if (tx.sender !== keypair.addressHex) {
    throw new Error("sender must be the signing key's address");
  }
  const signature = await signBytes(keypair, canonicalEncode(tx));
  return { ...tx, publicKey: keypair.publicKey, signature };
}

// JSON numbers above 2^53 would silently lose precision; the UI never
// produces values that large, so refuse rather than corrupt.
function wireInt(value: number | bigint, name: string): number {
  const v = BigInt(value);
  if (v < 0n || v > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new Error(`${name} exceeds the JSON-safe integer range`);
  }
  return Number(v);
}

export function toWire(tx: SignedTx): Record<string, unknown> {
  const payload: Record<string, unknown> = {};
  for (const [name, ftype] of PAYLOAD_FIELDS[tx.kind]) {
    const value = tx.payload[name]!;
    payload[name] = ftype === "address" ? String(value) : wireInt(value as number | bigint, name);
  }
  return {
    sender: tx.sender,
    nonce: wireInt(tx.nonce, "nonce"),
    fee: wireInt(tx.fee, "fee"),
    kind: tx.kind,
    payload,
    public_key: toHex(tx.publicKey),
    signature: toHex(tx.signature),
  };
}
