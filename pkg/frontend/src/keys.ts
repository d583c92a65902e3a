// Client-side Ed25519 via WebCrypto (Node 20+ and current browsers).
// The secret never leaves the client; the node only ever sees the
// public key and signatures on the transaction wire format.

import { concat, fromHex, sha256, toHex } from "./codec.js";

// DER scaffolding for raw Ed25519 key material.
const PKCS8_PREFIX = fromHex("302e020100300506032b657004220420");
const ALG = { name: "Ed25519" };

export interface KeyPair {
  seed: Uint8Array; // 32-byte Ed25519 seed
  publicKey: Uint8Array; // 32 raw bytes
  address: Uint8Array; // sha256(publicKey)[0..20]
  addressHex: string;
}

function base64urlToBytes(s: string): Uint8Array {
  const b64 = s.replace(/-/g, "+").replace(/_/g, "/");
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

async function importSeed(seed: Uint8Array): Promise<CryptoKey> {
  const pkcs8 = concat(PKCS8_PREFIX, seed);
  return crypto.subtle.importKey("pkcs8", pkcs8 as BufferSource, ALG, true, ["sign"]);
}

export async function keypairFromSeed(seed: Uint8Array): Promise<KeyPair> {
  if (seed.length !== 32) throw new Error("seed must be 32 bytes");
  const key = await importSeed(seed);
  // The private JWK carries the public half in `x`.
  const jwk = await crypto.subtle.exportKey("jwk", key);
  if (!jwk.x) throw new Error("WebCrypto returned no public key");
  const publicKey = base64urlToBytes(jwk.x);
  const address = (await sha256(publicKey)).slice(0, 20);
  return { seed, publicKey, address, addressHex: toHex(address) };
}

export async function generateKeypair(): Promise<KeyPair> {
  const seed = new Uint8Array(32);
  crypto.getRandomValues(seed);
  return keypairFromSeed(seed);
}

export async function signBytes(keypair: KeyPair, message: Uint8Array): Promise<Uint8Array> {
  const key = await importSeed(keypair.seed);
  const sig = await crypto.subtle.sign(ALG, key, message as BufferSource);
  return new Uint8Array(sig);
}

export async function verifyBytes(
  publicKey: Uint8Array,
  signature: Uint8Array,
  message: Uint8Array,
): Promise<boolean> {
  const key = await crypto.subtle.importKey("raw", publicKey as BufferSource, ALG, false, [
    "verify",
  ]);
  return crypto.subtle.verify(ALG, key, signature as BufferSource, message as BufferSource);
}
