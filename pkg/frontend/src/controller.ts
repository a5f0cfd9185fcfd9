/**
 * Pricing round-trip controller: state + latest-wins gate + service client.
 *
 * Owns the invariant that the rendered result always corresponds to the
 * newest submitted request; superseded responses are dropped before they
 * can touch the store. The DOM layer only forwards events and re-renders
 * on the callback.
 */

import type { HedgeDeskClient, PricePayload } from "./api.js";
import { validateClaimBuilder } from "./claims.js";
import { LatestRequestGate, SUPERSEDED } from "./requests.js";
import {
  WhatIfState,
  applyError,
  applyResult,
  markPending,
  priceRequestBody,
  settingsLabel,
} from "./state.js";

export interface PriceService {
  price: HedgeDeskClient["price"];
}

export class PricingController {
  private gate = new LatestRequestGate();
  private requestCounter = 0;

  constructor(
    private service: PriceService,
    public state: WhatIfState,
    private onRender: (state: WhatIfState) => void = () => {},
  ) {}

  update(mutate: (state: WhatIfState) => WhatIfState): void {
    this.state = mutate(this.state);
    this.onRender(this.state);
  }

  /** Submit a pricing request for the current state; resolves after the
   * store has been updated (or the response was superseded/errored). */
  async refresh(): Promise<void> {
    const invalid = validateClaimBuilder(this.state.claim);
    if (invalid !== null) {
      this.update((s) => applyError(s, invalid));
      return;
    }
    this.update(markPending);
    const body = priceRequestBody(this.state);
    const label = settingsLabel(this.state);
    const requestId = ++this.requestCounter;
    let outcome: PricePayload | typeof SUPERSEDED;
    try {
      outcome = await this.gate.run(() => this.service.price(body));
    } catch (err) {
      if (requestId === this.requestCounter) {
        this.update((s) => applyError(s, String(err)));
      }
      return;
    }
    if (outcome === SUPERSEDED) {
      return; // a newer request owns the panel
    }
    this.update((s) => applyResult(s, { payload: outcome, label, requestId }));
  }
}
