// Pure view-model helpers: everything the DOM layer renders is
// computed here so it can be tested without a browser.

import { AuctionSnapshot, CarSnapshot, EventRecord } from "./api.js";

export function shortAddress(hex: string | null): string {
  if (!hex) return "-";
  return hex.length > 12 ? `${hex.slice(0, 6)}..${hex.slice(-4)}` : hex;
}

export function formatUnits(amount: number): string {
  return amount.toLocaleString("en-US");
}

// Seconds left on an auction clock given the client's wall time.
// Consensus time is block timestamps (wall-clock on a live node), so
// this is an estimate until the closing block lands.
export function remainingSeconds(auction: AuctionSnapshot, nowMs: number): number {
  if (auction.ended) return 0;
  return Math.max(0, auction.end_time - Math.floor(nowMs / 1000));
}

export function formatCountdown(seconds: number): string {
  const m = Math.floor(seconds / 60);
  const s = seconds % 60;
  if (m >= 60) {
    const h = Math.floor(m / 60);
    return `${h}h ${m % 60}m`;
  }
  return `${m}:${String(s).padStart(2, "0")}`;
}

export type AuctionPhase = "open" | "closing" | "settleable" | "ended";

// "closing" drives the red countdown; "settleable" shows the end
// button: time is up but no EndAuction transaction has landed yet.
export function auctionPhase(auction: AuctionSnapshot, nowMs: number): AuctionPhase {
  if (auction.ended) return "ended";
  const left = remainingSeconds(auction, nowMs);
  if (left === 0) return "settleable";
  return left <= 30 ? "closing" : "open";
}

export interface BidCheck {
  ok: boolean;
  reason?: string;
}

// Client-side preflight mirroring the contract's checks, so obviously
// doomed bids never cost their sender a fee. The chain re-checks all
// of it; this is UX only.
export function checkBid(
  auction: AuctionSnapshot,
  amount: number,
  bidderHex: string,
  balance: number,
  nowMs: number,
): BidCheck {
  if (!Number.isInteger(amount) || amount <= 0) return { ok: false, reason: "enter a whole amount" };
  if (auctionPhase(auction, nowMs) !== "open" && auctionPhase(auction, nowMs) !== "closing") {
    return { ok: false, reason: "auction is over" };
  }
  if (amount <= auction.highest_bid) {
    return { ok: false, reason: `must beat the current bid of ${formatUnits(auction.highest_bid)}` };
  }
  if (amount < auction.tprice) {
    return { ok: false, reason: `reserve price is ${formatUnits(auction.tprice)}` };
  }
  if (bidderHex === auction.beneficiary) return { ok: false, reason: "sellers cannot bid" };
  if (balance < amount) return { ok: false, reason: "insufficient balance" };
  return { ok: true };
}

// Funds the viewer can withdraw from an auction right now.
export function myPendingReturn(auction: AuctionSnapshot, addressHex: string | null): number {
  if (!addressHex) return 0;
  return auction.pending_returns[addressHex] ?? 0;
}

export function describeEvent(event: EventRecord): string {
  const p = event.payload;
  switch (event.kind) {
    case "CarAdded":
      return `car #${p.car_id} listed for ${formatUnits(Number(p.initial_price))}`;
    case "AccidentRecorded":
      return `car #${p.car_id}: accident cost ${formatUnits(Number(p.cost))} recorded`;
    case "AuctionStarted":
      return `auction #${p.auction_id} opened on car #${p.car_id} (reserve ${formatUnits(Number(p.tprice))})`;
    case "BidPlaced":
      return `${shortAddress(String(p.bidder))} bid ${formatUnits(Number(p.amount))} on auction #${p.auction_id}`;
    case "Withdrawal":
      return `${shortAddress(String(p.who))} withdrew ${formatUnits(Number(p.amount))} from auction #${p.auction_id}`;
    case "AuctionEnded":
      return p.winner
        ? `auction #${p.auction_id} won by ${shortAddress(String(p.winner))} at ${formatUnits(Number(p.amount))}`
        : `auction #${p.auction_id} closed with no valid bids`;
    case "OwnerChanged":
      return `car #${p.car_id} transferred to ${shortAddress(String(p.new_owner))}`;
    default:
      return `${event.kind}: ${JSON.stringify(p)}`;
  }
}

// Appends a page of events to a capped tail, newest first, deduped by
// seq so overlapping polls are harmless.
export function mergeEventTail(
  tail: EventRecord[],
  incoming: EventRecord[],
  cap = 50,
): EventRecord[] {
  const seen = new Set(tail.map((e) => e.seq));
  const merged = [...tail];
  for (const event of incoming) {
    if (!seen.has(event.seq)) {
      merged.push(event);
      seen.add(event.seq);
    }
  }
  merged.sort((a, b) => b.seq - a.seq);
  return merged.slice(0, cap);
}

export interface CarRow {
  car: CarSnapshot;
  auction: AuctionSnapshot | null; // the open auction on this car, if any
  mine: boolean;
}

export function carRows(
  cars: CarSnapshot[],
  auctions: AuctionSnapshot[],
  viewerHex: string | null,
): CarRow[] {
  const openByCar = new Map<number, AuctionSnapshot>();
  for (const a of auctions) {
    if (!a.ended) openByCar.set(a.car_id, a);
  }
  return cars.map((car) => ({
    car,
    auction: car.in_auction ? (openByCar.get(car.car_id) ?? null) : null,
    mine: viewerHex !== null && car.owner === viewerHex,
  }));
}
