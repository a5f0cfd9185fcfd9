"""Indifference buy/sell prices, hedge extraction, and static replication.

The selling price of a claim is the smallest wealth increment that keeps the
optimal expected loss at or below its pre-trade level once the claim joins
the liability; the buying price mirrors it with flipped signs. Both reduce
to a one-dimensional root along the strictly decreasing wealth axis of the
optimum-value function, found by bracketed bisection at a currency
tolerance. Sub/superhedging costs seed the bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bounds as bounds_mod
from .claims import (DEFAULT_INTERVAL, CallClaim, ClaimSpec, PutClaim,
                     ScaledClaim, claim_scale)
from .errors import HedgeDeskError, SolverFailure, UnpriceableClaim, UnsupportedClaim
from .instruments import Call, Put, QuoteBook
from .scenarios import ScenarioGrid
from .solver import (Liability, Preferences, Problem, SolveResult,
                     SplitPortfolio, assemble, solve)

MAX_BRACKET_EXPANSIONS = 60


def default_price_tol(claim: ClaimSpec, interval=DEFAULT_INTERVAL) -> float:
    """Bisection tolerance: 1e-4 of the claim's payoff scale (floored at 1)."""
    return 1e-4 * claim_scale(claim, interval)


@dataclass
class IndifferenceQuote:
    """One side of an indifference price with its hedge and search trace."""

    price: float
    hedge: SplitPortfolio
    portfolio_after: SplitPortfolio
    iterations: int
    solves: int
    bracket: tuple


@dataclass
class PriceResult:
    """Both indifference prices for a claim plus diagnostics."""

    sell: IndifferenceQuote
    buy: IndifferenceQuote
    baseline_value: float
    baseline_risk: float
    price_tol: float

    @property
    def sell_price(self) -> float:
        return self.sell.price

    @property
    def buy_price(self) -> float:
        return self.buy.price

    @property
    def hedge_sell(self) -> SplitPortfolio:
        return self.sell.hedge

    @property
    def hedge_buy(self) -> SplitPortfolio:
        return self.buy.hedge

    @property
    def iterations(self) -> int:
        return self.sell.iterations + self.buy.iterations

    @property
    def bracket(self) -> tuple:
        return self.sell.bracket


def value_function(book: QuoteBook, grid: ScenarioGrid, prefs: Preferences,
                   liability: Liability, wealth: float) -> float:
    """Optimal expected loss at the given wealth (best value found)."""
    problem = assemble(book, grid, prefs, liability).with_wealth(wealth)
    return solve(problem).objective


def match_quoted_instrument(book: QuoteBook, claim: ClaimSpec):
    """Id of a quoted option whose payoff equals the claim, else None."""
    if isinstance(claim, ScaledClaim) and claim.multiplier > 0:
        return match_quoted_instrument(book, claim.inner)
    for instr in book.instruments:
        if isinstance(claim, CallClaim) and isinstance(instr, Call) \
                and math.isclose(instr.strike, claim.strike, rel_tol=1e-12):
            return instr.id
        if isinstance(claim, PutClaim) and isinstance(instr, Put) \
                and math.isclose(instr.strike, claim.strike, rel_tol=1e-12):
            return instr.id
    return None


class PricingEngine:
    """Caches the baseline solve and prices claims against it.

    Immutable context (book, grid, preferences, baseline liability); the
    exponent scale is frozen at the construction-time wealth so candidate
    prices never alter the preference order mid-search.
    """

    def __init__(self, book: QuoteBook, grid: ScenarioGrid, prefs: Preferences,
                 baseline: Liability = Liability.zero(), solver_tol: float = 1e-10,
                 interval=DEFAULT_INTERVAL):
        self.book = book
        self.grid = grid
        self.prefs = prefs  # scale_wealth already frozen at construction
        self.baseline = baseline
        self.solver_tol = solver_tol
        self.interval = interval
        self._baseline_result: SolveResult | None = None

    @property
    def baseline_result(self) -> SolveResult:
        if self._baseline_result is None:
            problem = assemble(self.book, self.grid, self.prefs, self.baseline)
            self._baseline_result = self._solve(problem)
        return self._baseline_result

    def _solve(self, problem: Problem, x0=None, accept_kkt: float = 0.0) -> SolveResult:
        # the engine targets a tighter certificate than the per-solve default
        # so that value-function comparisons resolve the price tolerance;
        # results stalled at the float floor remain usable while they certify
        # the standard 1e-8 residual, or the caller's noise budget when the
        # price tolerance is looser
        result = solve(problem, tol=self.solver_tol, x0=x0)
        floor = max(self.solver_tol, 1e-8, accept_kkt)
        if not result.converged and result.kkt_residual > floor:
            raise SolverFailure(f"solve did not certify optimality ({result.status})",
                                result)
        return result

    def excluding(self, instrument_id: str) -> "PricingEngine":
        """Engine on the book without one hedging instrument; the baseline is
        re-optimized on the reduced instrument set."""
        return PricingEngine(self.book.without_instrument(instrument_id), self.grid,
                             self.prefs, self.baseline, self.solver_tol, self.interval)

    def hedge_bounds(self, claim: ClaimSpec, interval=None):
        interval = interval or self.interval
        sup = bounds_mod.superhedge(self.book, claim, interval)
        inf = bounds_mod.subhedge(self.book, claim, interval)
        return inf, sup

    def sell(self, claim: ClaimSpec, price_tol: float | None = None) -> IndifferenceQuote:
        """Indifference selling price: smallest w with
        value(wealth + w, baseline + claim) <= baseline value."""
        price_tol = price_tol if price_tol is not None else default_price_tol(claim, self.interval)
        return self._search(claim, sign=+1.0, price_tol=price_tol)

    def buy(self, claim: ClaimSpec, price_tol: float | None = None) -> IndifferenceQuote:
        """Indifference buying price; the exact mirror of selling -claim."""
        price_tol = price_tol if price_tol is not None else default_price_tol(claim, self.interval)
        quote = self._search(ScaledClaim(-1.0, claim), sign=+1.0, price_tol=price_tol)
        lo, hi = quote.bracket
        return IndifferenceQuote(price=-quote.price, hedge=quote.hedge,
                                 portfolio_after=quote.portfolio_after,
                                 iterations=quote.iterations, solves=quote.solves,
                                 bracket=(-hi, -lo))

    def price(self, claim: ClaimSpec, price_tol: float | None = None,
              exclude_from_hedging: bool = False) -> PriceResult:
        """Both indifference prices; optionally drops the quoted twin of the
        claim from the hedging set first."""
        if exclude_from_hedging:
            quoted = match_quoted_instrument(self.book, claim)
            if quoted is None:
                raise UnsupportedClaim("claim does not match any quoted instrument")
            return self.excluding(quoted).price(claim, price_tol=price_tol)
        price_tol = price_tol if price_tol is not None else default_price_tol(claim, self.interval)
        sell = self.sell(claim, price_tol)
        buy = self.buy(claim, price_tol)
        base = self.baseline_result
        return PriceResult(sell=sell, buy=buy, baseline_value=base.objective,
                           baseline_risk=base.entropic_risk, price_tol=price_tol)

    def _initial_bracket(self, claim: ClaimSpec, price_tol: float):
        scale = claim_scale(claim, self.interval)
        buffer = max(10.0 * price_tol, 1e-3 * scale)
        try:
            inf_res, sup_res = self.hedge_bounds(claim)
            lo = max(-0.5 * self.prefs.wealth, inf_res.cost - buffer)
            hi = sup_res.cost + buffer
            if lo < hi:
                return lo, hi
        except HedgeDeskError:
            pass
        return max(-0.5 * self.prefs.wealth, -1.1 * scale), 1.1 * scale + buffer

    def _search(self, claim: ClaimSpec, sign: float, price_tol: float) -> IndifferenceQuote:
        base = self.baseline_result
        target = base.entropic_risk
        liability = self.baseline.plus(claim, sign)
        problem = assemble(self.book, self.grid, self.prefs, liability)
        warm = {"z": base.raw}
        solves = 0
        # value-function noise a solve may contribute without displacing the
        # bisection root by more than a fraction of the price tolerance
        noise_budget = 0.05 * price_tol * problem.coef

        def excess(w: float) -> float:
            nonlocal solves
            result = self._solve(problem.with_wealth(self.prefs.wealth + w),
                                 x0=warm["z"], accept_kkt=noise_budget)
            warm["z"] = result.raw
            warm["last"] = result
            solves += 1
            return result.entropic_risk - target

        lo, hi = self._initial_bracket(claim, price_tol)
        iterations = 0
        h_lo = excess(lo)
        h_hi = excess(hi)
        step = max(price_tol, 0.25 * (hi - lo))
        for _ in range(MAX_BRACKET_EXPANSIONS):
            if h_lo > 0.0:
                break
            hi, h_hi = lo, h_lo
            lo -= step
            step *= 2.0
            if self.prefs.wealth + lo <= -1e12:
                raise UnpriceableClaim("no lower bracket for the indifference price")
            h_lo = excess(lo)
            iterations += 1
        else:
            raise UnpriceableClaim("indifference bracket expansion failed (low side)")
        step = max(price_tol, 0.25 * (hi - lo))
        for _ in range(MAX_BRACKET_EXPANSIONS):
            if h_hi <= 0.0:
                break
            lo, h_lo = hi, h_hi
            hi += step
            step *= 2.0
            h_hi = excess(hi)
            iterations += 1
        else:
            raise UnpriceableClaim(
                "claim risk exceeds market capacity: optimal loss stays above "
                "the pre-trade level at every candidate price")
        while hi - lo > price_tol:
            mid = 0.5 * (lo + hi)
            if excess(mid) <= 0.0:
                hi = mid
            else:
                lo = mid
            iterations += 1
        price = 0.5 * (lo + hi)
        final = self._solve(problem.with_wealth(self.prefs.wealth + price),
                            x0=warm["z"], accept_kkt=noise_budget)
        solves += 1
        after = final.portfolio
        hedge = SplitPortfolio.from_net(after.ids, after.net - base.portfolio.net)
        return IndifferenceQuote(price=price, hedge=hedge, portfolio_after=after,
                                 iterations=iterations, solves=solves, bracket=(lo, hi))


def indifference_sell(book, grid, prefs, baseline, claim, price_tol=None,
                      solver_tol=1e-8) -> IndifferenceQuote:
    engine = PricingEngine(book, grid, prefs, baseline, solver_tol)
    return engine.sell(claim, price_tol)


def indifference_buy(book, grid, prefs, baseline, claim, price_tol=None,
                     solver_tol=1e-8) -> IndifferenceQuote:
    engine = PricingEngine(book, grid, prefs, baseline, solver_tol)
    return engine.buy(claim, price_tol)


@dataclass
class BLReplication:
    """Static replication of a smooth claim from the quoted call spectrum.

    Diagnostic only: optimized indifference hedges generally differ from it.
    """

    cost: float
    bond_units: float
    underlying_units: float
    call_weights: dict
    discount_factor: float
    forward_price: float

    def reconstruct(self, levels) -> np.ndarray:
        """Terminal payoff of the replicating portfolio."""
        levels = np.asarray(levels, dtype=float)
        total = self.bond_units + self.underlying_units * (levels - self.forward_price)
        for strike, weight in self.call_weights.items():
            total = total + weight * np.maximum(levels - strike, 0.0)
        return total


def bl_replication(book: QuoteBook, claim: ClaimSpec, interval=DEFAULT_INTERVAL,
                   discounting: str = "lend") -> BLReplication:
    """Discretize the claim's slope measure onto quoted call strikes.

    Each strike receives the measure mass between the midpoints of its
    neighboring strikes (the first cell starts at zero, the last ends at the
    interval top). Positive weights price at the call ask, negative at the
    bid; the bond leg discounts at the lending rate by default and the linear
    leg trades through the forward.
    """
    c0, slope0, atoms, density = claim.bl_parts()
    calls = sorted((i for i in book.instruments if isinstance(i, Call)),
                   key=lambda c: c.strike)
    if len(calls) < 2:
        raise UnsupportedClaim("need at least two quoted call strikes")
    strikes = np.array([c.strike for c in calls])
    edges = np.concatenate([[0.0], 0.5 * (strikes[1:] + strikes[:-1]), [interval[1]]])
    weights = np.zeros(strikes.size)
    for level, mass in atoms:
        if level > edges[-1]:
            continue
        cell = min(int(np.searchsorted(edges, level, side="left") - 1), strikes.size - 1)
        weights[max(cell, 0)] += mass
    if density is not None:
        for i in range(strikes.size):
            gl_x, gl_w = np.polynomial.legendre.leggauss(20)
            half = 0.5 * (edges[i + 1] - edges[i])
            mid = 0.5 * (edges[i + 1] + edges[i])
            weights[i] += float(np.dot(gl_w, density(mid + half * gl_x)) * half)

    rates = book.rates
    rate = rates.lend_rate if discounting == "lend" else rates.borrow_rate
    discount = math.exp(-rate * book.maturity)
    underlying_units = slope0
    forward = book.forward
    if underlying_units != 0.0:
        if forward is None:
            raise UnsupportedClaim("claim has a linear leg but the book quotes no forward")
        fwd_price = forward.fwd_ask if underlying_units > 0 else forward.fwd_bid
    else:
        fwd_price = 0.0
    bond_units = c0 + underlying_units * fwd_price
    cost = bond_units * discount  # forward leg enters at zero cost
    call_weights = {}
    for call, weight in zip(calls, weights):
        if weight == 0.0:
            continue
        call_weights[call.strike] = float(weight)
        quote = book.quote_for(call.id)
        cost += weight * (quote.ask_price if weight > 0 else quote.bid_price)
    return BLReplication(cost=float(cost), bond_units=float(bond_units),
                         underlying_units=float(underlying_units),
                         call_weights=call_weights, discount_factor=discount,
                         forward_price=float(fwd_price))
