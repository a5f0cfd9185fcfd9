"""Bundled synthetic market fixture.

A deterministic S&P-style snapshot: Black-76 mid prices at 41 round strikes
around spot 2056.32, proportional bid/ask spreads, uniform lot depths, one
forward, and cash at asymmetric rates. Used by the acceptance suite, the
demo CLI, and as the default book for the what-if service when no quote file
is supplied. A three-row sample book mirroring a real market snapshot is
also provided for parser round-trips.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm

from .instruments import (CASH_ID, Call, Cash, Forward, MarketConfig, Put,
                          Quote, QuoteBook, RatePair, save_quote_book)
from .scenarios import ViewModel
from .solver import Preferences

SPOT = 2056.32
MATURITY = 0.19
LEND_RATE = 0.0043
BORROW_RATE = 0.03
BS_VOL = 0.1478
STRIKE_LO = 1650.0
STRIKE_STEP = 20.0
N_STRIKES = 41
DEPTH_LOTS = 100.0
LOT_FORWARD = 50.0
LOT_OPTION = 100.0
FORWARD_HALF_SPREAD = 0.125

VIEW_MU = 0.0
VIEW_SIGMA = 0.0554
VIEW_NU = 4.8355

WEALTH = 100_000.0
RISK_AVERSION = 2.0


def black76(forward: float, strike: float, vol: float, maturity: float,
            rate: float, kind: str) -> float:
    """Undiscounted-forward Black-76 price with lend-rate discounting."""
    sd = vol * math.sqrt(maturity)
    d1 = (math.log(forward / strike) + 0.5 * sd * sd) / sd
    d2 = d1 - sd
    df = math.exp(-rate * maturity)
    if kind == "call":
        return df * (forward * norm.cdf(d1) - strike * norm.cdf(d2))
    return df * (strike * norm.cdf(-d2) - forward * norm.cdf(-d1))


def synthetic_view() -> ViewModel:
    return ViewModel(mu=VIEW_MU, sigma=VIEW_SIGMA, nu=VIEW_NU, spot=SPOT)


def synthetic_preferences() -> Preferences:
    return Preferences(wealth=WEALTH, risk_aversion=RISK_AVERSION)


def synthetic_book(spread_pct: float = 0.01, depth_lots: float = DEPTH_LOTS,
                   unlimited_depth: bool = False, pricing: str = "bs") -> QuoteBook:
    """The 41-strike call+put book. ``spread_pct`` is the full proportional
    spread (ask - bid as a fraction of mid); zero collapses to mid quotes.

    ``pricing`` selects the mid-price rule: ``bs`` (Black-76 at a flat vol)
    or ``grid_measure`` (discounted expected payoff under the default
    scenario grid of the bundled view model). Unlimited-depth books must use
    ``grid_measure``: mids priced under any other density leave positions
    that profit without bound against the discretized measure, so the
    optimization would be ill-posed.
    """
    if unlimited_depth and pricing != "grid_measure":
        raise ValueError("unlimited depth requires pricing='grid_measure'")
    strikes = STRIKE_LO + STRIKE_STEP * np.arange(N_STRIKES)
    df = math.exp(-LEND_RATE * MATURITY)
    if pricing == "grid_measure":
        from .scenarios import build_grid

        grid = build_grid(synthetic_view())
        forward_mid = grid.expectation(grid.nodes)

        def mid_price(strike, kind):
            if kind == "call":
                return df * grid.expectation(np.maximum(grid.nodes - strike, 0.0))
            return df * grid.expectation(np.maximum(strike - grid.nodes, 0.0))
    elif pricing == "bs":
        forward_mid = SPOT * math.exp(LEND_RATE * MATURITY)

        def mid_price(strike, kind):
            return black76(forward_mid, strike, BS_VOL, MATURITY, LEND_RATE, kind)
    else:
        raise ValueError(f"unknown pricing rule {pricing!r}")

    instruments = [Cash(CASH_ID, RatePair(BORROW_RATE, LEND_RATE))]
    quotes = [Quote(CASH_ID, 1.0, 1.0, math.inf, math.inf)]
    half_fwd = 0.0 if spread_pct == 0.0 else FORWARD_HALF_SPREAD
    fwd_depth = math.inf if unlimited_depth else depth_lots * LOT_FORWARD
    instruments.append(Forward("FWD", fwd_ask=forward_mid + half_fwd,
                               fwd_bid=forward_mid - half_fwd))
    quotes.append(Quote("FWD", 0.0, 0.0, fwd_depth, fwd_depth))
    opt_depth = math.inf if unlimited_depth else depth_lots * LOT_OPTION
    for strike in strikes:
        label = f"{strike:.0f}"
        for kind, cls in (("call", Call), ("put", Put)):
            mid = mid_price(float(strike), kind)
            half = 0.5 * spread_pct * mid
            ticker = f"{'C' if kind == 'call' else 'P'}{label}"
            instruments.append(cls(ticker, float(strike)))
            quotes.append(Quote(ticker, mid - half, mid + half, opt_depth, opt_depth))
    return QuoteBook(tuple(instruments), tuple(quotes), SPOT, MATURITY)


def synthetic_fixture(spread_pct: float = 0.01, depth_lots: float = DEPTH_LOTS,
                      unlimited_depth: bool = False):
    """(book, view model, preferences) for the standard test market."""
    return (synthetic_book(spread_pct, depth_lots, unlimited_depth),
            synthetic_view(), synthetic_preferences())


def synthetic_market_config() -> MarketConfig:
    return MarketConfig(spot=SPOT, maturity_years=MATURITY, lend_rate=LEND_RATE,
                        borrow_rate=BORROW_RATE, lot_forward=LOT_FORWARD,
                        lot_option=LOT_OPTION)


def sample_book() -> QuoteBook:
    """Three-instrument snapshot (forward, one call, one put) plus cash."""
    instruments = (
        Cash(CASH_ID, RatePair(BORROW_RATE, LEND_RATE)),
        Forward("ESM6", fwd_ask=2049.0, fwd_bid=2048.75),
        Call("C2095", 2095.0),
        Put("P2095", 2095.0),
    )
    quotes = (
        Quote(CASH_ID, 1.0, 1.0, math.inf, math.inf),
        Quote("ESM6", 0.0, 0.0, bid_depth=258 * LOT_FORWARD, ask_depth=377 * LOT_FORWARD),
        Quote("C2095", 26.90, 28.20, bid_depth=623 * LOT_OPTION, ask_depth=506 * LOT_OPTION),
        Quote("P2095", 72.60, 74.70, bid_depth=27 * LOT_OPTION, ask_depth=22 * LOT_OPTION),
    )
    return QuoteBook(instruments, quotes, SPOT, MATURITY)


def write_fixture_csv(path, spread_pct: float = 0.01,
                      depth_lots: float = DEPTH_LOTS) -> None:
    save_quote_book(synthetic_book(spread_pct, depth_lots), path,
                    synthetic_market_config())


def write_sample_csv(path) -> None:
    save_quote_book(sample_book(), path, synthetic_market_config())
