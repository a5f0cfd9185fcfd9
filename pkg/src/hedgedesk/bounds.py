"""Super- and subhedging costs by linear programming.

The hedge payoff is piecewise linear between consecutive strikes, so
dominance over a piecewise-linear claim is certified by constraints at the
breakpoints alone. Where the hedge-minus-claim residual can bend the wrong
way between breakpoints (subhedging a convex claim, for instance), a
refinement grid plus post-solve verification on a much finer grid backstops
the LP, adding cuts and re-solving until the dominance margin is clean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .claims import DEFAULT_INTERVAL, ClaimSpec, ScaledClaim, claim_scale
from .errors import DomainError, HedgeDeskError, InfeasibleHedge
from .instruments import QuoteBook, payoff_unit_long, payoff_unit_short
from .solver import SplitPortfolio

DIGITAL_EPS_REL = 1e-6
REFINE_POINTS = 8
MAX_CUT_ROUNDS = 10
MAX_CUTS_PER_ROUND = 400
GRID_SPACING_FRACTION = 1 / 800  # cap on gap width relative to the interval


@dataclass
class HedgeBoundResult:
    """Cost and portfolio of a pathwise-dominating hedge on an interval."""

    cost: float
    portfolio: SplitPortfolio
    binding_points: np.ndarray
    verification_margin: float
    interval: tuple
    dual_prices: np.ndarray
    grid: np.ndarray


def _split_matrices(book: QuoteBook, levels: np.ndarray):
    n = len(book.instruments)
    payoffs = np.empty((levels.size, 2 * n))
    cost = np.empty(2 * n)
    upper = np.empty(2 * n)
    for j, instr in enumerate(book.instruments):
        q = book.quote_for(instr.id)
        payoffs[:, j] = payoff_unit_long(instr, levels, book.maturity)
        payoffs[:, n + j] = payoff_unit_short(instr, levels, book.maturity)
        cost[j] = q.ask_price
        cost[n + j] = -q.bid_price
        upper[j] = q.ask_depth
        upper[n + j] = q.bid_depth
    return payoffs, cost, upper


def constraint_grid(book: QuoteBook, claim: ClaimSpec, interval,
                    refine: int = REFINE_POINTS) -> np.ndarray:
    """Dominance-constraint levels: endpoints, strikes, claim kinks and jump
    two-sided anchors, plus ``refine`` interior points per gap."""
    lo, hi = interval
    if not (lo > 0 and hi > lo):
        raise DomainError(f"invalid interval [{lo}, {hi}]")
    base = {lo, hi}
    for strike in book.option_strikes():
        if lo <= strike <= hi:
            base.add(float(strike))
    for kink in claim.kinks():
        if lo < kink < hi:
            base.add(float(kink))
    for jump in claim.jumps():
        eps = DIGITAL_EPS_REL * jump
        for p in (jump - eps, jump):
            if lo < p < hi:
                base.add(float(p))
    pts = np.array(sorted(base))
    if refine > 0:
        max_gap = (hi - lo) * GRID_SPACING_FRACTION
        fills = []
        for a, b in zip(pts[:-1], pts[1:]):
            # at least `refine` interior points, more where strikes are sparse
            pieces = max(refine + 1, math.ceil((b - a) / max_gap))
            fills.append(np.linspace(a, b, pieces + 1)[1:-1])
        pts = np.unique(np.concatenate([pts] + fills))
    return pts


def _verification_grid(claim: ClaimSpec, base_grid: np.ndarray, interval) -> np.ndarray:
    lo, hi = interval
    n = max(1000, 10 * base_grid.size)
    pts = [np.linspace(lo, hi, n), base_grid]
    for jump in claim.jumps():
        eps = DIGITAL_EPS_REL * jump
        pts.append(np.array([p for p in (jump - eps, jump) if lo <= p <= hi]))
    return np.unique(np.concatenate(pts))


def verify_dominance(book: QuoteBook, portfolio: SplitPortfolio, claim: ClaimSpec,
                     interval=DEFAULT_INTERVAL, grid_points: int = 2000) -> float:
    """Minimum of (hedge payoff - claim) over a deterministic dense grid."""
    if grid_points < 1000:
        raise DomainError("grid_points must be at least 1000")
    lo, hi = interval
    levels = _verification_grid(claim, np.linspace(lo, hi, grid_points), interval)
    payoffs, _, _ = _split_matrices(book, levels)
    z = np.concatenate([portfolio.long, portfolio.short])
    slack = payoffs @ z - claim.payoff(levels)
    return float(slack.min())


def superhedge(book: QuoteBook, claim: ClaimSpec, interval=DEFAULT_INTERVAL,
               grid_override=None, refine: int = REFINE_POINTS) -> HedgeBoundResult:
    """Least-cost portfolio whose payoff dominates the claim on the interval."""
    levels = (np.asarray(grid_override, dtype=float) if grid_override is not None
              else constraint_grid(book, claim, interval, refine))
    scale = claim_scale(claim, interval)
    dom_tol = 1e-6 * (1.0 + scale)
    extra: list = []
    for _round in range(MAX_CUT_ROUNDS):
        grid = np.unique(np.concatenate([levels] + extra)) if extra else levels
        payoffs, cost, upper = _split_matrices(book, grid)
        target = claim.payoff(grid)
        res = linprog(
            c=cost,
            A_ub=-payoffs,
            b_ub=-target,
            bounds=[(0.0, u if np.isfinite(u) else None) for u in upper],
            method="highs",
        )
        if res.status == 2:
            _report_infeasible(book, claim, grid, payoffs, cost, upper, target)
        if res.status == 3:
            raise HedgeDeskError(
                "dominance LP unbounded below: the book admits a costless "
                "dominating position (arbitrage-like quotes)")
        if res.status != 0:
            raise HedgeDeskError(f"dominance LP failed: {res.message}")
        n = len(book.instruments)
        portfolio = SplitPortfolio(book.ids, res.x[:n], res.x[n:])
        if grid_override is not None:
            margin = float((payoffs @ res.x - target).min())
            duals = -np.asarray(res.ineqlin.marginals)
            binding = grid[duals > 1e-12]
            return HedgeBoundResult(float(res.fun), portfolio, binding, margin,
                                    tuple(interval), duals, grid)
        margin = verify_dominance(book, portfolio, claim, interval,
                                  grid_points=max(1000, 10 * grid.size))
        if margin >= -dom_tol:
            duals = -np.asarray(res.ineqlin.marginals)
            binding = grid[duals > 1e-12]
            return HedgeBoundResult(float(res.fun), portfolio, binding, margin,
                                    tuple(interval), duals, grid)
        extra.append(_violating_levels(book, portfolio, claim, interval, grid))
    raise HedgeDeskError(
        f"dominance refinement did not converge after {MAX_CUT_ROUNDS} rounds "
        f"(last margin {margin:.3g})")


def _violating_levels(book, portfolio, claim, interval, grid,
                      max_new: int = MAX_CUTS_PER_ROUND):
    levels = _verification_grid(claim, grid, interval)
    payoffs, _, _ = _split_matrices(book, levels)
    z = np.concatenate([portfolio.long, portfolio.short])
    slack = payoffs @ z - claim.payoff(levels)
    order = np.argsort(slack)
    worst = levels[order[:max_new]][slack[order[:max_new]] < 0]
    return worst


def _report_infeasible(book, claim, grid, payoffs, cost, upper, target):
    """Elastic relaxation: maximize the uniform slack to expose where
    dominance fails even at full depth."""
    n_var = cost.size
    c = np.zeros(n_var + 1)
    c[-1] = -1.0  # maximize tau
    a_ub = np.hstack([-payoffs, np.ones((payoffs.shape[0], 1))])
    res = linprog(
        c=c, A_ub=a_ub, b_ub=-target,
        bounds=[(0.0, u if np.isfinite(u) else None) for u in upper] + [(None, None)],
        method="highs",
    )
    region = ()
    best = None
    if res.status == 0:
        best = float(res.x[-1])
        slack = payoffs @ res.x[:-1] - target
        region = tuple(grid[slack <= best + 1e-9 * (1 + abs(best))])
    raise InfeasibleHedge(
        "claim cannot be dominated within the quoted depths on the interval",
        violating_region=region, best_slack=best)


def subhedge(book: QuoteBook, claim: ClaimSpec, interval=DEFAULT_INTERVAL,
             grid_override=None, refine: int = REFINE_POINTS) -> HedgeBoundResult:
    """Greatest revenue from a position whose payoff plus the claim stays
    nonnegative; computed as the exact mirror of ``superhedge`` on -claim."""
    mirrored = superhedge(book, ScaledClaim(-1.0, claim), interval,
                          grid_override=grid_override, refine=refine)
    mirrored.cost = -mirrored.cost
    return mirrored


