/**
 * DOM wiring for the what-if console.
 *
 * One latest-wins gate guards the pricing round trip: slider input ->
 * debounced request -> gate -> store -> render. While a request is in
 * flight the previous numbers stay visible but are visually marked stale.
 */

import { HedgeDeskClient, MarketSummary, PricePayload } from "./api.js";
import { buildClaim, ClaimKind } from "./claims.js";
import { PricingController } from "./controller.js";
import { formatExact } from "./format.js";
import { renderHedgePanel, renderHistogram, renderPricePanel } from "./panels.js";
import { debounce } from "./requests.js";
import {
  SLIDER_RANGES,
  WhatIfState,
  initialState,
  pinCurrent,
  pinDeltas,
  setSlider,
} from "./state.js";

const serviceUrl =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8750";
const client = new HedgeDeskClient(serviceUrl);

let controller: PricingController;
let market: MarketSummary;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function sliderRow(name: keyof typeof SLIDER_RANGES, label: string): string {
  const r = SLIDER_RANGES[name];
  return (
    `<label class="slider-row">${label}` +
    `<input type="range" id="slider-${name}" min="${r.min}" max="${r.max}" step="${r.step}">` +
    `<span id="value-${name}" class="slider-value"></span></label>`
  );
}

function mount(): void {
  el<HTMLDivElement>("app").innerHTML = `
    <header><h1>hedgedesk what-if console</h1>
      <div id="market-line" class="muted"></div></header>
    <section class="controls">
      <h3>view</h3>
      ${sliderRow("mu", "mean")} ${sliderRow("sigma", "scale")}
      ${sliderRow("nu", "tail df")}
      <label><input type="checkbox" id="gaussian"> Gaussian limit</label>
      <h3>preferences &amp; position</h3>
      ${sliderRow("lambda", "risk aversion")} ${sliderRow("wealth", "wealth")}
      ${sliderRow("inventory", "claim units owed")}
      <h3>claim</h3>
      <select id="claim-kind">
        <option value="call">call</option><option value="put">put</option>
        <option value="digital">digital</option>
        <option value="quadratic_forward">quadratic forward</option>
        <option value="log_forward">log forward</option>
        <option value="piecewise_linear">custom piecewise linear</option>
        <option value="constant">constant</option>
      </select>
      <div id="claim-fields"></div>
      <label><input type="checkbox" id="exclude-twin"> exclude quoted twin from hedging</label>
      <button id="pin">pin result</button>
    </section>
    <section id="error" class="error" hidden></section>
    <section><h3>prices</h3><div id="price-panel"></div></section>
    <section><h3>hedge</h3><div id="hedge-panel"></div></section>
    <section><h3>payoff distribution (after sale)</h3><div id="histogram"></div></section>
    <section><h3>pinned comparisons</h3><div id="pins"></div></section>
  `;
}

function claimFieldsHtml(kind: ClaimKind): string {
  const strike = `<label>strike <input type="number" id="claim-strike" step="10"></label>`;
  switch (kind) {
    case "digital":
      return strike + `<label>amount <input type="number" id="claim-amount"></label>`;
    case "log_forward":
      return strike + `<label>scale <input type="number" id="claim-scale"></label>`;
    case "constant":
      return `<label>value <input type="number" id="claim-value"></label>`;
    case "piecewise_linear":
      return (
        `<textarea id="claim-table" rows="4" spellcheck="false" ` +
        `title="level,payoff per line"></textarea>`
      );
    default:
      return strike;
  }
}

function readClaimFields(): void {
  const builder = { ...controller.state.claim };
  const grab = (id: string): number | null => {
    const node = document.getElementById(id) as HTMLInputElement | null;
    return node ? Number(node.value) : null;
  };
  builder.strike = grab("claim-strike") ?? builder.strike;
  builder.amount = grab("claim-amount") ?? builder.amount;
  builder.scale = grab("claim-scale") ?? builder.scale;
  builder.value = grab("claim-value") ?? builder.value;
  const table = document.getElementById("claim-table") as HTMLTextAreaElement | null;
  if (table) {
    const rows = table.value
      .split("\n")
      .map((line) => line.split(",").map(Number))
      .filter((pair) => pair.length === 2 && pair.every(Number.isFinite));
    if (rows.length >= 2) {
      builder.breakpoints = rows.map(([level, payoff]) => ({ level, payoff }));
    }
  }
  controller.update((s) => ({ ...s, claim: builder }));
}

function renderControls(): void {
  const state = controller.state;
  for (const name of ["mu", "sigma", "nu", "lambda", "wealth", "inventory"] as const) {
    const input = el<HTMLInputElement>(`slider-${name}`);
    input.value = String(state[name]);
    el<HTMLSpanElement>(`value-${name}`).textContent = formatExact(state[name]);
  }
}

let lastRenderedPayload: PricePayload | null = null;

function renderResult(state: WhatIfState): void {
  const panel = el<HTMLDivElement>("price-panel");
  const error = el<HTMLDivElement>("error");
  error.hidden = state.error === null;
  error.textContent = state.error ?? "";
  if (state.lastResult === null) {
    panel.innerHTML = `<p class="muted">adjust anything to price</p>`;
    return;
  }
  const payload = state.lastResult.payload;
  panel.innerHTML = renderPricePanel(payload, state.stale);
  el<HTMLDivElement>("hedge-panel").innerHTML = renderHedgePanel(
    payload,
    [],
    buildClaim(state.claim),
  );
  const pins = pinDeltas(state)
    .map(
      (d) =>
        `<li>${d.label}: sell ${d.sellDelta >= 0 ? "+" : ""}${formatExact(d.sellDelta)}, ` +
        `buy ${d.buyDelta >= 0 ? "+" : ""}${formatExact(d.buyDelta)}</li>`,
    )
    .join("");
  el<HTMLDivElement>("pins").innerHTML = pins ? `<ul>${pins}</ul>` : "<p class='muted'>none</p>";
  if (!state.stale && payload !== lastRenderedPayload) {
    lastRenderedPayload = payload;
    void refreshHistogram(payload);
  }
}

async function refresh(): Promise<void> {
  readClaimFields();
  await controller.refresh();
}

async function refreshHistogram(payload: PricePayload): Promise<void> {
  try {
    const distribution = await client.distribution({
      portfolio: payload.portfolio_after_sell.map((row) => ({
        id: row.id,
        net_units: row.net_units,
      })),
      n: 100_000,
      bins: 60,
    });
    el<HTMLDivElement>("histogram").innerHTML = renderHistogram(distribution);
  } catch {
    // histogram is cosmetic; pricing errors surface elsewhere
  }
}

const scheduleRefresh = debounce(() => void refresh(), 180);

function wire(): void {
  for (const name of ["mu", "sigma", "nu", "lambda", "wealth", "inventory"] as const) {
    el<HTMLInputElement>(`slider-${name}`).addEventListener("input", (event) => {
      controller.update((s) =>
        setSlider(s, name, Number((event.target as HTMLInputElement).value)));
      renderControls();
      scheduleRefresh();
    });
  }
  el<HTMLInputElement>("gaussian").addEventListener("change", (event) => {
    controller.update((s) => ({
      ...s, gaussian: (event.target as HTMLInputElement).checked }));
    scheduleRefresh();
  });
  el<HTMLInputElement>("exclude-twin").addEventListener("change", (event) => {
    controller.update((s) => ({
      ...s, excludeQuotedTwin: (event.target as HTMLInputElement).checked }));
    scheduleRefresh();
  });
  const kindSelect = el<HTMLSelectElement>("claim-kind");
  const renderClaimFields = () => {
    el<HTMLDivElement>("claim-fields").innerHTML = claimFieldsHtml(
      kindSelect.value as ClaimKind,
    );
    const strikeInput = document.getElementById("claim-strike") as HTMLInputElement | null;
    if (strikeInput) strikeInput.value = String(controller.state.claim.strike);
    el<HTMLDivElement>("claim-fields")
      .querySelectorAll("input,textarea")
      .forEach((node) => node.addEventListener("input", scheduleRefresh));
  };
  kindSelect.addEventListener("change", () => {
    controller.update((s) => ({
      ...s, claim: { ...s.claim, kind: kindSelect.value as ClaimKind } }));
    renderClaimFields();
    scheduleRefresh();
  });
  renderClaimFields();
  el<HTMLButtonElement>("pin").addEventListener("click", () => {
    controller.update((s) => pinCurrent(s, `pin ${s.pins.length + 1}`));
  });
}

async function start(): Promise<void> {
  mount();
  market = await client.market();
  el<HTMLDivElement>("market-line").textContent =
    `spot ${formatExact(market.spot)} | T ${formatExact(market.maturity_years)}y | ` +
    `${market.instrument_count} instruments | service ${serviceUrl}`;
  controller = new PricingController(client, initialState(market.spot), renderResult);
  renderControls();
  wire();
  void refresh();
}

void start().catch((err) => {
  document.body.innerHTML = `<p class="error">service unreachable: ${String(err)}</p>`;
});
