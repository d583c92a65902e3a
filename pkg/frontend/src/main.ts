// DOM wiring. All chain logic lives in the tested modules; this file
// only renders state and forwards form input.

import { ApiError, AuctionSnapshot, CarSnapshot, EventRecord, NodeClient } from "./api.js";
import { Session } from "./session.js";
import {
  auctionPhase,
  carRows,
  checkBid,
  describeEvent,
  formatCountdown,
  formatUnits,
  mergeEventTail,
  myPendingReturn,
  remainingSeconds,
  shortAddress,
} from "./views.js";

const DEFAULT_NODE = "http://127.0.0.1:8545";

let session = new Session(new NodeClient(DEFAULT_NODE));
let cars: CarSnapshot[] = [];
let auctions: AuctionSnapshot[] = [];
let eventTail: EventRecord[] = [];
let agentHex: string | null = null;
let selectedAuction: number | null = null;
let cursor = 0;
let polling = false;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function setStatus(message: string, isError = false) {
  const bar = byId<HTMLDivElement>("status");
  bar.textContent = message;
  bar.className = isError ? "status error" : "status";
}

async function runTx(label: string, fn: () => Promise<{ receipt: { status: string; error_code?: string | null } }>) {
  setStatus(`${label}...`);
  try {
    const { receipt } = await fn();
    if (receipt.status === "ok") setStatus(`${label}: confirmed`);
    else setStatus(`${label}: reverted (${receipt.error_code})`, true);
  } catch (err) {
    if (err instanceof ApiError) setStatus(`${label}: ${err.code} - ${err.message}`, true);
    else setStatus(`${label}: ${String(err)}`, true);
  }
  await refresh();
}

// -- session panel ----------------------------------------------------------

async function renderSession() {
  const panel = byId<HTMLDivElement>("session");
  panel.replaceChildren();
  if (!session.keypair) {
    const create = el("button", "", "new key");
    create.onclick = async () => {
      await session.createKey();
      await refresh();
    };
    const seedInput = el("input");
    seedInput.placeholder = "or paste a 64-hex seed";
    const importBtn = el("button", "", "import");
    importBtn.onclick = async () => {
      try {
        await session.importSeed(seedInput.value);
        await refresh();
      } catch (err) {
        setStatus(String(err), true);
      }
    };
    panel.append(create, seedInput, importBtn);
    return;
  }
  const me = session.keypair.addressHex;
  const balance = await session.balance().catch(() => 0);
  panel.append(
    el("span", "addr mono", me),
    el("span", "balance", `${formatUnits(balance)} units`),
  );
  if (me === agentHex) panel.append(el("span", "tag", "agent"));
  const forget = el("button", "", "forget key");
  forget.onclick = () => {
    session.forgetKey();
    void refresh();
  };
  panel.append(forget);
}

// -- car list ---------------------------------------------------------------

function renderCars() {
  const list = byId<HTMLDivElement>("cars");
  list.replaceChildren();
  const rows = carRows(cars, auctions, session.addressHex);
  if (rows.length === 0) list.append(el("p", "empty", "no cars listed yet"));
  for (const row of rows) {
    const card = el("div", row.mine ? "card mine" : "card");
    card.append(
      el("h3", "", `car #${row.car.car_id}`),
      el("div", "", `estimate ${formatUnits(row.car.estimated_price)}`),
      el(
        "div",
        "detail",
        `${row.car.age_years}y, ${formatUnits(row.car.miles)} mi, ` +
          `${row.car.accident_costs.length} accidents, ${row.car.trade_times} trades`,
      ),
      el("div", "detail mono", `owner ${shortAddress(row.car.owner)}${row.mine ? " (you)" : ""}`),
    );
    if (row.auction) {
      const btn = el("button", "", `auction #${row.auction.auction_id} - open`);
      const id = row.auction.auction_id;
      btn.onclick = () => {
        selectedAuction = id;
        renderAuction();
      };
      card.append(btn);
    }
    list.append(card);
  }
}

// -- auction room -----------------------------------------------------------

function renderAuction() {
  const room = byId<HTMLDivElement>("auction");
  room.replaceChildren();
  const auction = auctions.find((a) => a.auction_id === selectedAuction);
  if (!auction) {
    room.append(el("p", "empty", "pick an auction from the car list"));
    return;
  }
  const now = Date.now();
  const phase = auctionPhase(auction, now);
  const car = cars.find((c) => c.car_id === auction.car_id);

  room.append(el("h3", "", `auction #${auction.auction_id} on car #${auction.car_id}`));
  const clock = el(
    "div",
    phase === "closing" ? "clock closing" : "clock",
    phase === "ended"
      ? "ended"
      : phase === "settleable"
        ? "time up - awaiting settlement"
        : formatCountdown(remainingSeconds(auction, now)),
  );
  room.append(
    clock,
    el("div", "", `reserve ${formatUnits(auction.tprice)}`),
    el(
      "div",
      "",
      auction.highest_bidder
        ? `leading: ${formatUnits(auction.highest_bid)} by ${shortAddress(auction.highest_bidder)}`
        : "no bids yet",
    ),
    el("div", "detail mono", `seller ${shortAddress(auction.beneficiary)}`),
  );
  if (car) room.append(el("div", "detail", `current estimate ${formatUnits(car.estimated_price)}`));

  const me = session.addressHex;
  if (me && (phase === "open" || phase === "closing")) {
    const amount = el("input");
    amount.type = "number";
    amount.placeholder = String(Math.max(auction.tprice, auction.highest_bid + 1));
    const bidBtn = el("button", "primary", "bid");
    bidBtn.onclick = async () => {
      const value = Number(amount.value);
      const balance = await session.balance().catch(() => 0);
      const check = checkBid(auction, value, me, balance, Date.now());
      if (!check.ok) {
        setStatus(check.reason ?? "bid rejected", true);
        return;
      }
      await runTx(`bid ${formatUnits(value)}`, () => session.bid(auction.auction_id, value));
    };
    room.append(amount, bidBtn);
  }
  if (me && phase === "settleable") {
    const endBtn = el("button", "primary", "settle auction");
    endBtn.onclick = () => runTx("settle", () => session.endAuction(auction.auction_id));
    room.append(endBtn);
  }
  const owed = myPendingReturn(auction, me);
  if (owed > 0) {
    const withdrawBtn = el("button", "", `withdraw ${formatUnits(owed)}`);
    withdrawBtn.onclick = () => runTx("withdraw", () => session.withdraw(auction.auction_id));
    room.append(withdrawBtn);
  }
}

// -- agent panel ------------------------------------------------------------

function renderAgentPanel() {
  const panel = byId<HTMLDivElement>("agent-panel");
  const isAgent = session.addressHex !== null && session.addressHex === agentHex;
  panel.style.display = isAgent ? "" : "none";
  if (!isAgent || panel.childElementCount > 0) return;

  const owner = el("input");
  owner.placeholder = "owner address (hex)";
  const price = el("input");
  price.type = "number";
  price.placeholder = "initial price";
  const age = el("input");
  age.type = "number";
  age.placeholder = "age (years)";
  const miles = el("input");
  miles.type = "number";
  miles.placeholder = "miles";
  const addBtn = el("button", "", "list car");
  addBtn.onclick = () =>
    runTx("list car", () =>
      session.addCar(owner.value.trim(), Number(price.value), Number(age.value), Number(miles.value)),
    );

  const carId = el("input");
  carId.type = "number";
  carId.placeholder = "car id";
  const duration = el("input");
  duration.type = "number";
  duration.placeholder = "duration (s)";
  const startBtn = el("button", "", "start auction");
  startBtn.onclick = () =>
    runTx("start auction", () => session.startAuction(Number(carId.value), Number(duration.value)));

  panel.append(
    el("h3", "", "agent desk"),
    owner, price, age, miles, addBtn,
    el("hr"),
    carId, duration, startBtn,
  );
}

// -- event feed -------------------------------------------------------------

function renderEvents() {
  const feed = byId<HTMLUListElement>("events");
  feed.replaceChildren();
  for (const event of eventTail) {
    feed.append(el("li", "", `#${event.seq} ${describeEvent(event)}`));
  }
}

async function pollEvents() {
  if (polling) return;
  polling = true;
  while (polling) {
    try {
      const page = await session.client.events(cursor, 20);
      if (page.events.length > 0) {
        cursor = page.next;
        eventTail = mergeEventTail(eventTail, page.events);
        renderEvents();
        await refresh(false); // chain state changed; repaint
      }
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 2000));
    }
  }
}

// -- top-level --------------------------------------------------------------

async function refresh(fetchChain = true) {
  if (fetchChain) {
    try {
      [cars, auctions] = await Promise.all([session.client.cars(), session.client.auctions()]);
      agentHex = String((await session.client.genesis()).agent);
      byId<HTMLSpanElement>("conn").textContent = `connected: ${session.client.baseUrl}`;
    } catch {
      byId<HTMLSpanElement>("conn").textContent = `cannot reach ${session.client.baseUrl}`;
    }
  }
  await renderSession();
  renderCars();
  renderAuction();
  renderAgentPanel();
  renderEvents();
}

function connect(url: string) {
  polling = false;
  cursor = 0;
  eventTail = [];
  session = new Session(new NodeClient(url));
  void session.restore().then(async () => {
    await refresh();
    void pollEvents();
  });
}

window.addEventListener("DOMContentLoaded", () => {
  const input = byId<HTMLInputElement>("node-url");
  input.value = DEFAULT_NODE;
  byId<HTMLButtonElement>("connect").onclick = () => connect(input.value.trim());
  setInterval(renderAuction, 1000); // tick the countdown
  connect(DEFAULT_NODE);
});
