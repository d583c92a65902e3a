// Typed fetch client for the node's HTTP+JSON surface. This module is
// the frontend's only connection to the chain.

import { SignedTx, toWire } from "./tx.js";

export interface CarSnapshot {
  car_id: number;
  owner: string;
  initial_price: number;
  age_years: number;
  miles: number;
  accident_costs: number[];
  total_accident_cost: number;
  trade_times: number;
  in_auction: boolean;
  estimated_price: number;
}

export interface AuctionSnapshot {
  auction_id: number;
  car_id: number;
  beneficiary: string;
  tprice: number;
  end_time: number;
  highest_bid: number;
  highest_bidder: string | null;
  pending_returns: Record<string, number>;
  ended: boolean;
  remaining_seconds: number;
}

export interface AccountInfo {
  address: string;
  balance: number;
  nonce: number;
}

export interface HeadInfo {
  height: number;
  hash: string;
  state_root: string;
  timestamp: number;
}

export interface GenesisInfo {
  agent: string;
  gas_fee: number;
  block_reward: number;
  genesis_hash: string;
  [key: string]: unknown;
}

export interface Receipt {
  tx_hash: string;
  status: "pending" | "ok" | "reverted";
  error_code?: string | null;
  error_message?: string | null;
  events?: EventRecord[];
  block_height?: number | null;
}

export interface EventRecord {
  seq: number;
  block_height: number | null;
  kind: string;
  payload: Record<string, unknown>;
}

export interface EventPage {
  events: EventRecord[];
  next: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(res: Response): Promise<never> {
  let code = "Unknown";
  let message = res.statusText;
  try {
    const body = await res.json();
    if (body && typeof body.code === "string") code = body.code;
    if (body && typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, code, message);
}

export class NodeClient {
  constructor(public baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async get<T>(path: string): Promise<T> {
    const res = await fetch(this.baseUrl + path);
    if (!res.ok) await parseError(res);
    return res.json() as Promise<T>;
  }

  async submit(tx: SignedTx): Promise<{ accepted: boolean; tx_hash: string }> {
    const res = await fetch(this.baseUrl + "/tx", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(toWire(tx)),
    });
    if (!res.ok) await parseError(res);
    return res.json();
  }

  receipt(txHashHex: string): Promise<Receipt> {
    return this.get(`/tx/${txHashHex}`);
  }

  // Polls until the transaction leaves the mempool or the deadline hits.
  async waitForReceipt(txHashHex: string, timeoutMs = 30_000): Promise<Receipt> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const receipt = await this.receipt(txHashHex);
      if (receipt.status !== "pending") return receipt;
      if (Date.now() > deadline) throw new Error(`timed out waiting for ${txHashHex}`);
      await new Promise((resolve) => setTimeout(resolve, 150));
    }
  }

  async cars(): Promise<CarSnapshot[]> {
    return (await this.get<{ cars: CarSnapshot[] }>("/cars")).cars;
  }

  car(carId: number): Promise<CarSnapshot> {
    return this.get(`/cars/${carId}`);
  }

  carPrice(carId: number): Promise<{ car_id: number; tprice: number }> {
    return this.get(`/cars/${carId}/price`);
  }

  async auctions(): Promise<AuctionSnapshot[]> {
    return (await this.get<{ auctions: AuctionSnapshot[] }>("/auctions")).auctions;
  }

  auction(auctionId: number): Promise<AuctionSnapshot> {
    return this.get(`/auctions/${auctionId}`);
  }

  account(addressHex: string): Promise<AccountInfo> {
    return this.get(`/accounts/${addressHex}`);
  }

  head(): Promise<HeadInfo> {
    return this.get("/chain/head");
  }

  genesis(): Promise<GenesisInfo> {
    return this.get("/genesis");
  }

  // Long-polls when timeoutSeconds > 0; `since` is the last seen seq.
  events(since: number, timeoutSeconds = 0): Promise<EventPage> {
    return this.get(`/events?since=${since}&timeout=${timeoutSeconds}`);
  }
}
