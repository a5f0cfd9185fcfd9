/**
 * Typed client for the hedgedesk JSON service (contract: docs/api.md).
 *
 * Every number rendered anywhere in the UI originates from one of these
 * payloads; the client performs no arithmetic on prices.
 */

export type ClaimJson =
  | { kind: "call"; strike: number }
  | { kind: "put"; strike: number }
  | { kind: "digital"; strike: number; amount: number }
  | { kind: "quadratic_forward"; strike: number }
  | { kind: "log_forward"; strike: number; scale: number }
  | { kind: "piecewise_linear"; breakpoints: number[]; values: number[] }
  | { kind: "constant"; value: number }
  | { kind: "scaled"; multiplier: number; inner: ClaimJson };

export interface ViewOverride {
  mu?: number;
  sigma?: number;
  nu?: number | "inf";
}

export interface PreferencesOverride {
  risk_aversion?: number;
  wealth?: number;
}

export interface BaselinePosition {
  claim: ClaimJson;
  quantity: number;
}

export interface PortfolioRow {
  id: string;
  net_units: number;
  long_units: number;
  short_units: number;
  side: "long" | "short";
}

export interface MarketInstrument {
  id: string;
  kind: string;
  strike: number | null;
  bid: number;
  ask: number;
  bid_depth: number | null;
  ask_depth: number | null;
}

export interface MarketSummary {
  spot: number;
  maturity_years: number;
  instrument_count: number;
  option_count: number;
  lend_rate: number;
  borrow_rate: number;
  spread_stats: { mean_abs: number; max_abs: number; mean_rel: number };
  instruments: MarketInstrument[];
}

export interface SolvePayload {
  objective: number;
  entropic_risk: number;
  budget_slack: number;
  kkt_residual: number;
  duality_gap: number;
  iterations: number;
  converged: boolean;
  wealth: number;
  portfolio: PortfolioRow[];
  scenario_payoff_min: number;
  scenario_payoff_max: number;
}

export interface PricePayload {
  sell_price: number;
  buy_price: number;
  price_tol: number;
  baseline_entropic_risk: number;
  iterations: number;
  bracket: [number, number];
  hedge_sell: PortfolioRow[];
  hedge_buy: PortfolioRow[];
  portfolio_after_sell: PortfolioRow[];
  portfolio_after_buy: PortfolioRow[];
  subhedge_cost?: number;
  superhedge_cost?: number;
}

export interface DistributionPayload {
  n: number;
  seed: number;
  bin_edges: number[];
  counts: number[];
  mean: number;
  std: number;
  p01: number;
  p99: number;
}

export interface PriceRequest {
  claim: ClaimJson;
  exclude_from_hedging?: boolean;
  price_tol?: number;
  include_bounds?: boolean;
  view?: ViewOverride;
  preferences?: PreferencesOverride;
  liability?: BaselinePosition[];
}

export interface DistributionRequest {
  portfolio?: { id: string; net_units: number }[];
  n?: number;
  seed?: number;
  bins?: number;
  view?: ViewOverride;
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    public errorType: string,
    detail: string,
  ) {
    super(`${errorType}: ${detail}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class HedgeDeskClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, body?: unknown): Promise<T> {
    const init: RequestInit =
      body === undefined
        ? { method: "GET" }
        : {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
          };
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const payload = await response.json();
    if (!response.ok) {
      throw new ServiceError(
        response.status,
        String(payload?.error ?? "unknown"),
        typeof payload?.detail === "string"
          ? payload.detail
          : JSON.stringify(payload?.detail ?? payload),
      );
    }
    return payload as T;
  }

  market(): Promise<MarketSummary> {
    return this.request<MarketSummary>("/market");
  }

  solve(body: {
    view?: ViewOverride;
    preferences?: PreferencesOverride;
    liability?: BaselinePosition[];
  }): Promise<SolvePayload> {
    return this.request<SolvePayload>("/solve", body);
  }

  price(body: PriceRequest): Promise<PricePayload> {
    return this.request<PricePayload>("/price", body);
  }

  distribution(body: DistributionRequest): Promise<DistributionPayload> {
    return this.request<DistributionPayload>("/distribution", body);
  }
}
