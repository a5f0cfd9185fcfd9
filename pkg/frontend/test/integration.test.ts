/**
 * Live-service checks; run with HEDGEDESK_URL pointing at a running
 * `hedgedesk serve` instance (skipped otherwise):
 *
 *     hedgedesk serve --bind 127.0.0.1:8750 &
 *     HEDGEDESK_URL=http://127.0.0.1:8750 npx vitest run test/integration.test.ts
 */

import { describe, expect, it } from "vitest";

import { HedgeDeskClient } from "../src/api.js";
import { buildClaim, defaultClaimBuilder } from "../src/claims.js";
import type { ClaimKind } from "../src/claims.js";
import { displaysFaithfully, formatExact } from "../src/format.js";
import { priceMarkers, renderPricePanel } from "../src/panels.js";

const url = process.env.HEDGEDESK_URL;

describe.skipIf(!url)("against the live service", () => {
  const client = new HedgeDeskClient(url ?? "");

  it("reports the market snapshot", async () => {
    const market = await client.market();
    expect(market.instrument_count).toBeGreaterThan(0);
    expect(market.spot).toBeGreaterThan(0);
  });

  it("prices every builder claim kind with buy <= sell and faithful digits",
     { timeout: 300_000 }, async () => {
    const market = await client.market();
    const kinds: ClaimKind[] = [
      "call", "put", "digital", "quadratic_forward", "log_forward",
      "piecewise_linear", "constant",
    ];
    for (const kind of kinds) {
      const claim = buildClaim({ ...defaultClaimBuilder(market.spot), kind });
      const payload = await client.price({ claim, include_bounds: true });
      expect(payload.buy_price)
        .toBeLessThanOrEqual(payload.sell_price + 2 * payload.price_tol);
      const markers = priceMarkers(payload);
      const x = Object.fromEntries(markers.map((m) => [m.label, m.x]));
      expect(x.buy).toBeLessThanOrEqual(x.sell + 1e-9);
      const html = renderPricePanel(payload, false);
      expect(html).toContain(formatExact(payload.sell_price));
      expect(html).toContain(formatExact(payload.buy_price));
      expect(displaysFaithfully(formatExact(payload.sell_price),
                                payload.sell_price)).toBe(true);
    }
  });

  it("serves a histogram for an explicit portfolio", async () => {
    const distribution = await client.distribution({
      portfolio: [{ id: "C2050", net_units: 5 }],
      n: 20_000,
      bins: 30,
      seed: 1,
    });
    expect(distribution.counts.reduce((a, b) => a + b, 0)).toBe(20_000);
    expect(distribution.bin_edges.length).toBe(31);
  });
});
