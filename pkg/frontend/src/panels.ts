/**
 * Render helpers producing SVG/HTML strings from service payloads.
 *
 * Pure functions of payload data: the price panel draws the buy/sell
 * markers between the hedge-bound markers on a number line; the hedge panel
 * draws net-position bars before/after plus payoff curves; the histogram
 * panel draws the sampled payoff distribution. No prices are computed here.
 */

import type { ClaimJson, DistributionPayload, PortfolioRow, PricePayload } from "./api.js";
import { claimPayoff } from "./claims.js";
import { formatExact, formatFixed } from "./format.js";

const WIDTH = 720;

export interface PriceMarker {
  label: "subhedge" | "buy" | "sell" | "superhedge";
  value: number;
  x: number;
}

/** Marker layout for the price number line, ordered left to right. */
export function priceMarkers(payload: PricePayload): PriceMarker[] {
  const entries: { label: PriceMarker["label"]; value: number }[] = [
    { label: "buy", value: payload.buy_price },
    { label: "sell", value: payload.sell_price },
  ];
  if (payload.subhedge_cost !== undefined) {
    entries.push({ label: "subhedge", value: payload.subhedge_cost });
  }
  if (payload.superhedge_cost !== undefined) {
    entries.push({ label: "superhedge", value: payload.superhedge_cost });
  }
  const values = entries.map((e) => e.value);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  const pad = 0.08 * span;
  const scale = (v: number) =>
    ((v - lo + pad) / (span + 2 * pad)) * (WIDTH - 40) + 20;
  return entries
    .map((e) => ({ ...e, x: scale(e.value) }))
    .sort((a, b) => a.x - b.x);
}

export function renderPricePanel(payload: PricePayload, stale: boolean): string {
  const markers = priceMarkers(payload);
  const color: Record<PriceMarker["label"], string> = {
    subhedge: "#888",
    superhedge: "#888",
    buy: "#0a6",
    sell: "#c33",
  };
  const parts = [
    `<svg class="priceline${stale ? " stale" : ""}" viewBox="0 0 ${WIDTH} 90" role="img">`,
    `<line x1="20" y1="45" x2="${WIDTH - 20}" y2="45" stroke="#444"/>`,
  ];
  for (const m of markers) {
    parts.push(
      `<line x1="${m.x.toFixed(1)}" y1="30" x2="${m.x.toFixed(1)}" y2="60" ` +
        `stroke="${color[m.label]}" stroke-width="2"/>`,
      `<text x="${m.x.toFixed(1)}" y="${m.label === "buy" || m.label === "subhedge" ? 24 : 76}" ` +
        `text-anchor="middle" font-size="11">${m.label} ${formatFixed(m.value, 4)}</text>`,
    );
  }
  parts.push("</svg>");
  parts.push(
    `<div class="price-exact">sell ${formatExact(payload.sell_price)} / ` +
      `buy ${formatExact(payload.buy_price)} ` +
      `(tol ${formatExact(payload.price_tol)})</div>`,
  );
  return parts.join("");
}

function barChart(rows: PortfolioRow[], title: string): string {
  const shown = rows
    .filter((r) => Math.abs(r.net_units) > 1e-6)
    .slice()
    .sort((a, b) => a.id.localeCompare(b.id));
  if (shown.length === 0) {
    return `<div class="bars"><h4>${title}</h4><p class="flat">flat</p></div>`;
  }
  const peak = Math.max(...shown.map((r) => Math.abs(r.net_units)));
  const rowsHtml = shown
    .map((r) => {
      const pct = ((Math.abs(r.net_units) / peak) * 100).toFixed(1);
      return (
        `<div class="bar-row"><span class="bar-id">${r.id}</span>` +
        `<span class="bar ${r.side}" style="width:${pct}%"></span>` +
        `<span class="bar-value">${formatFixed(r.net_units, 2)}</span></div>`
      );
    })
    .join("");
  return `<div class="bars"><h4>${title}</h4>${rowsHtml}</div>`;
}

export function renderHedgePanel(
  payload: PricePayload,
  basePortfolio: PortfolioRow[],
  claim: ClaimJson,
): string {
  const curve = payoffCurveSvg(payload.hedge_sell, claim);
  return [
    curve,
    barChart(basePortfolio, "optimal before sale"),
    barChart(payload.portfolio_after_sell, "optimal after sale"),
    barChart(payload.hedge_sell, "hedge (difference)"),
  ].join("");
}

/** Payoff of the hedge (piecewise-linear in the terminal level) versus the
 * claim on [100, 5000]; drawing only, prices come from the service. */
export function payoffCurveSvg(
  hedge: PortfolioRow[],
  claim: ClaimJson,
  strikes: number[] = [],
): string {
  const levels: number[] = [];
  for (let i = 0; i <= 240; i++) {
    levels.push(100 + (4900 * i) / 240);
  }
  const claimValues = levels.map((x) => claimPayoff(claim, x));
  const lo = Math.min(...claimValues, 0);
  const hi = Math.max(...claimValues, 1);
  const sx = (x: number) => ((x - 100) / 4900) * (WIDTH - 40) + 20;
  const sy = (y: number) => 150 - ((y - lo) / (hi - lo || 1)) * 130;
  const path = (vals: number[]) =>
    vals.map((y, i) => `${i ? "L" : "M"}${sx(levels[i]).toFixed(1)},${sy(y).toFixed(1)}`).join("");
  const marks = strikes
    .map((k) => `<line x1="${sx(k).toFixed(1)}" y1="145" x2="${sx(k).toFixed(1)}" y2="155" stroke="#bbb"/>`)
    .join("");
  return (
    `<svg class="payoff" viewBox="0 0 ${WIDTH} 160" role="img">` +
    `<path d="${path(claimValues)}" fill="none" stroke="#c33" stroke-dasharray="4 3"/>` +
    marks +
    `</svg>`
  );
}

export function renderHistogram(payload: DistributionPayload): string {
  const peak = Math.max(...payload.counts, 1);
  const n = payload.counts.length;
  const bars = payload.counts
    .map((count, i) => {
      const h = (count / peak) * 120;
      const x = 20 + (i * (WIDTH - 40)) / n;
      return `<rect x="${x.toFixed(1)}" y="${(140 - h).toFixed(1)}" width="${((WIDTH - 40) / n - 1).toFixed(1)}" height="${h.toFixed(1)}" fill="#369"/>`;
    })
    .join("");
  return (
    `<svg class="histogram" viewBox="0 0 ${WIDTH} 170" role="img">${bars}` +
    `<text x="20" y="162" font-size="11">mean ${formatFixed(payload.mean, 2)}` +
    ` | std ${formatFixed(payload.std, 2)} | p01 ${formatFixed(payload.p01, 2)}` +
    ` | p99 ${formatFixed(payload.p99, 2)} | n=${payload.n}</text></svg>`
  );
}
