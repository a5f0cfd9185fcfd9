/**
 * What-if session state: view sliders, preferences, inventory, claim
 * builder, the last completed result, and immutable comparison pins.
 *
 * Slider setters clamp to valid ranges (sigma > 0, nu > 2, lambda > 0,
 * wealth > 0). Results enter the store only through `applyResult`, which is
 * fed exclusively by the latest-wins request gate, so the rendered numbers
 * always describe one consistent response.
 */

import type { PricePayload, ViewOverride } from "./api.js";
import { ClaimBuilderState, buildClaim, defaultClaimBuilder } from "./claims.js";

export interface SliderRange {
  min: number;
  max: number;
  step: number;
}

export const SLIDER_RANGES: Record<string, SliderRange> = {
  mu: { min: -0.2, max: 0.2, step: 0.005 },
  sigma: { min: 0.01, max: 0.4, step: 0.0025 },
  nu: { min: 2.1, max: 30, step: 0.1 },
  lambda: { min: 0.25, max: 10, step: 0.25 },
  wealth: { min: 10_000, max: 1_000_000, step: 10_000 },
  inventory: { min: -20, max: 20, step: 1 },
};

export interface CompletedResult {
  payload: PricePayload;
  label: string;
  requestId: number;
}

export interface Pin {
  label: string;
  sellPrice: number;
  buyPrice: number;
  subhedge: number | null;
  superhedge: number | null;
  settings: string;
}

export interface WhatIfState {
  mu: number;
  sigma: number;
  nu: number;
  gaussian: boolean;
  lambda: number;
  wealth: number;
  inventory: number; // units of the claim owed before the trade
  excludeQuotedTwin: boolean;
  claim: ClaimBuilderState;
  lastResult: CompletedResult | null;
  stale: boolean; // a newer request is in flight
  error: string | null;
  pins: readonly Pin[];
}

export function initialState(spot: number): WhatIfState {
  return {
    mu: 0.0,
    sigma: 0.0554,
    nu: 4.8355,
    gaussian: false,
    lambda: 2.0,
    wealth: 100_000,
    inventory: 0,
    excludeQuotedTwin: false,
    claim: defaultClaimBuilder(spot),
    lastResult: null,
    stale: false,
    error: null,
    pins: [],
  };
}

function clamp(value: number, range: SliderRange): number {
  return Math.min(range.max, Math.max(range.min, value));
}

export function setSlider(
  state: WhatIfState,
  name: "mu" | "sigma" | "nu" | "lambda" | "wealth" | "inventory",
  raw: number,
): WhatIfState {
  const value = clamp(raw, SLIDER_RANGES[name]);
  return { ...state, [name]: value };
}

export function viewOverride(state: WhatIfState): ViewOverride {
  return {
    mu: state.mu,
    sigma: state.sigma,
    nu: state.gaussian ? "inf" : state.nu,
  };
}

export function priceRequestBody(state: WhatIfState) {
  const claim = buildClaim(state.claim);
  return {
    claim,
    exclude_from_hedging: state.excludeQuotedTwin,
    include_bounds: true,
    view: viewOverride(state),
    preferences: { risk_aversion: state.lambda, wealth: state.wealth },
    ...(state.inventory !== 0
      ? { liability: [{ claim, quantity: state.inventory }] }
      : {}),
  };
}

export function markPending(state: WhatIfState): WhatIfState {
  return { ...state, stale: true, error: null };
}

export function applyResult(
  state: WhatIfState,
  result: CompletedResult,
): WhatIfState {
  return { ...state, lastResult: result, stale: false, error: null };
}

export function applyError(state: WhatIfState, message: string): WhatIfState {
  return { ...state, stale: false, error: message };
}

export function settingsLabel(state: WhatIfState): string {
  const nu = state.gaussian ? "inf" : String(state.nu);
  return (
    `mu=${state.mu} sigma=${state.sigma} nu=${nu} ` +
    `lambda=${state.lambda} w=${state.wealth} inv=${state.inventory}`
  );
}

export function pinCurrent(state: WhatIfState, label: string): WhatIfState {
  if (state.lastResult === null) {
    return state;
  }
  const payload = state.lastResult.payload;
  const pin: Pin = Object.freeze({
    label,
    sellPrice: payload.sell_price,
    buyPrice: payload.buy_price,
    subhedge: payload.subhedge_cost ?? null,
    superhedge: payload.superhedge_cost ?? null,
    settings: settingsLabel(state),
  });
  return { ...state, pins: Object.freeze([...state.pins, pin]) };
}

export interface PinDelta {
  label: string;
  sellDelta: number;
  buyDelta: number;
}

export function pinDeltas(state: WhatIfState): PinDelta[] {
  const current = state.lastResult;
  if (current === null) {
    return [];
  }
  return state.pins.map((pin) => ({
    label: pin.label,
    sellDelta: current.payload.sell_price - pin.sellPrice,
    buyDelta: current.payload.buy_price - pin.buyPrice,
  }));
}
