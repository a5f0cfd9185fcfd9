/**
 * Claim builder: form state to claim JSON, mirroring the wire format
 * in docs/api.md exactly. Custom payoffs are entered as a breakpoint table.
 */

import type { ClaimJson } from "./api.js";

export type ClaimKind =
  | "call"
  | "put"
  | "digital"
  | "quadratic_forward"
  | "log_forward"
  | "piecewise_linear"
  | "constant";

export interface ClaimBuilderState {
  kind: ClaimKind;
  strike: number;
  amount: number;
  scale: number;
  value: number;
  multiplier: number;
  breakpoints: { level: number; payoff: number }[];
}

export function defaultClaimBuilder(spot: number): ClaimBuilderState {
  const strike = Math.round(spot / 10) * 10;
  return {
    kind: "call",
    strike,
    amount: 10_000,
    scale: 100_000,
    value: 1_000,
    multiplier: 1,
    breakpoints: [
      { level: strike - 200, payoff: 0 },
      { level: strike, payoff: 100 },
      { level: strike + 200, payoff: 0 },
    ],
  };
}

export function buildClaim(state: ClaimBuilderState): ClaimJson {
  let inner: ClaimJson;
  switch (state.kind) {
    case "call":
      inner = { kind: "call", strike: state.strike };
      break;
    case "put":
      inner = { kind: "put", strike: state.strike };
      break;
    case "digital":
      inner = { kind: "digital", strike: state.strike, amount: state.amount };
      break;
    case "quadratic_forward":
      inner = { kind: "quadratic_forward", strike: state.strike };
      break;
    case "log_forward":
      inner = { kind: "log_forward", strike: state.strike, scale: state.scale };
      break;
    case "constant":
      inner = { kind: "constant", value: state.value };
      break;
    case "piecewise_linear": {
      const rows = [...state.breakpoints].sort((a, b) => a.level - b.level);
      inner = {
        kind: "piecewise_linear",
        breakpoints: rows.map((r) => r.level),
        values: rows.map((r) => r.payoff),
      };
      break;
    }
  }
  return state.multiplier === 1
    ? inner
    : { kind: "scaled", multiplier: state.multiplier, inner };
}

export function validateClaimBuilder(state: ClaimBuilderState): string | null {
  if (state.kind !== "constant" && !(state.strike > 0)) {
    return "strike must be positive";
  }
  if (state.kind === "piecewise_linear") {
    if (state.breakpoints.length < 2) {
      return "need at least two breakpoints";
    }
    const levels = state.breakpoints.map((r) => r.level);
    const sorted = [...levels].sort((a, b) => a - b);
    for (let i = 1; i < sorted.length; i++) {
      if (sorted[i] <= sorted[i - 1]) {
        return "breakpoint levels must be distinct";
      }
    }
  }
  if (!(state.multiplier !== 0) || !Number.isFinite(state.multiplier)) {
    return "multiplier must be a nonzero number";
  }
  return null;
}

export function describeClaim(claim: ClaimJson): string {
  switch (claim.kind) {
    case "call":
      return `call @ ${claim.strike}`;
    case "put":
      return `put @ ${claim.strike}`;
    case "digital":
      return `digital ${claim.amount} @ ${claim.strike}`;
    case "quadratic_forward":
      return `quadratic fwd @ ${claim.strike}`;
    case "log_forward":
      return `log fwd x${claim.scale} @ ${claim.strike}`;
    case "piecewise_linear":
      return `custom (${claim.breakpoints.length} pts)`;
    case "constant":
      return `constant ${claim.value}`;
    case "scaled":
      return `${claim.multiplier} x ${describeClaim(claim.inner)}`;
  }
}

/** Client-side payoff evaluation, used only to DRAW the claim curve; every
 * price shown in the UI comes from the service. */
export function claimPayoff(claim: ClaimJson, level: number): number {
  switch (claim.kind) {
    case "call":
      return Math.max(level - claim.strike, 0);
    case "put":
      return Math.max(claim.strike - level, 0);
    case "digital":
      return level >= claim.strike ? claim.amount : 0;
    case "quadratic_forward":
      return (level - claim.strike) ** 2;
    case "log_forward":
      return claim.scale * Math.log(claim.strike / level);
    case "constant":
      return claim.value;
    case "scaled":
      return claim.multiplier * claimPayoff(claim.inner, level);
    case "piecewise_linear": {
      const { breakpoints, values } = claim;
      if (level <= breakpoints[0]) return values[0];
      const last = breakpoints.length - 1;
      if (level >= breakpoints[last]) return values[last];
      let i = 1;
      while (breakpoints[i] < level) i++;
      const t =
        (level - breakpoints[i - 1]) / (breakpoints[i] - breakpoints[i - 1]);
      return values[i - 1] + t * (values[i] - values[i - 1]);
    }
  }
}
