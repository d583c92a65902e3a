// A browser session: one locally held keypair plus the node client.
// Signing happens here, client-side; only signed wire JSON goes out.

import { NodeClient, Receipt } from "./api.js";
import { fromHex, toHex } from "./codec.js";
import { KeyPair, generateKeypair, keypairFromSeed } from "./keys.js";
import { PayloadValue, TxKind, signTx, txHash } from "./tx.js";

const STORAGE_KEY = "carchain.seed";

// localStorage in the browser, a plain map under test.
export interface KeyStore {
  get(key: string): string | null;
  set(key: string, value: string): void;
  remove(key: string): void;
}

export class MemoryStore implements KeyStore {
  private map = new Map<string, string>();
  get(key: string) {
    return this.map.get(key) ?? null;
  }
  set(key: string, value: string) {
    this.map.set(key, value);
  }
  remove(key: string) {
    this.map.delete(key);
  }
}

function defaultStore(): KeyStore {
  if (typeof localStorage !== "undefined") {
    return {
      get: (k) => localStorage.getItem(k),
      set: (k, v) => localStorage.setItem(k, v),
      remove: (k) => localStorage.removeItem(k),
    };
  }
  return new MemoryStore();
}

export interface SubmitResult {
  txHash: string;
  receipt: Receipt;
}

export class Session {
  keypair: KeyPair | null = null;

  constructor(
    public client: NodeClient,
    private store: KeyStore = defaultStore(),
  ) {}

  get addressHex(): string | null {
    return this.keypair ? this.keypair.addressHex : null;
  }

  // Restore a persisted key, if any.
  async restore(): Promise<boolean> {
    const seedHex = this.store.get(STORAGE_KEY);
    if (!seedHex) return false;
    this.keypair = await keypairFromSeed(fromHex(seedHex, 32));
    return true;
  }

  async createKey(): Promise<KeyPair> {
    this.keypair = await generateKeypair();
    this.store.set(STORAGE_KEY, toHex(this.keypair.seed));
    return this.keypair;
  }

  async importSeed(seedHex: string): Promise<KeyPair> {
    this.keypair = await keypairFromSeed(fromHex(seedHex.trim(), 32));
    this.store.set(STORAGE_KEY, seedHex.trim());
    return this.keypair;
  }

  forgetKey(): void {
    this.keypair = null;
    this.store.remove(STORAGE_KEY);
  }

  async balance(): Promise<number> {
    if (!this.keypair) throw new Error("no session key");
    return (await this.client.account(this.keypair.addressHex)).balance;
  }

  // Signs with the chain's flat fee and the account's next nonce, then
  // submits and waits for the receipt.
  async send(kind: TxKind, payload: Record<string, PayloadValue>): Promise<SubmitResult> {
    if (!this.keypair) throw new Error("no session key");
    const [account, genesis] = await Promise.all([
      this.client.account(this.keypair.addressHex),
      this.client.genesis(),
    ]);
    const signed = await signTx(
      {
        sender: this.keypair.addressHex,
        nonce: account.nonce,
        fee: genesis.gas_fee,
        kind,
        payload,
      },
      this.keypair,
    );
    const submitted = await this.client.submit(signed);
    const receipt = await this.client.waitForReceipt(submitted.tx_hash);
    return { txHash: await txHash(signed), receipt };
  }

  bid(auctionId: number, amount: number) {
    return this.send("Bid", { auction_id: auctionId, amount });
  }

  withdraw(auctionId: number) {
    return this.send("Withdraw", { auction_id: auctionId });
  }

  endAuction(auctionId: number) {
    return this.send("EndAuction", { auction_id: auctionId });
  }

  transfer(toHexAddr: string, amount: number) {
    return this.send("Transfer", { to: toHexAddr, amount });
  }

  // Agent-only calls; the node rejects them for anyone else.
  addCar(ownerHex: string, initialPrice: number, ageYears: number, miles: number) {
    return this.send("AddCar", {
      owner: ownerHex,
      initial_price: initialPrice,
      age_years: ageYears,
      miles,
    });
  }

  startAuction(carId: number, durationSeconds: number) {
    return this.send("StartAuction", { car_id: carId, duration_seconds: durationSeconds });
  }

  uploadAccident(carId: number, cost: number) {
    return this.send("UploadAccidentCost", { car_id: carId, cost });
  }
}
