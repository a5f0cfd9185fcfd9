"""Batch sensitivity studies over view, preference, and claim parameters.

Each sweep point rebuilds only the affected component (grid for sigma or mu,
preferences for lambda, baseline liability for the initial position, claim
for the multiplier), prices or solves, and records a row. Points run
concurrently on a bounded worker pool; rows keep input order and failed
points carry an error marker instead of disappearing.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .claims import ClaimSpec, ScaledClaim
from .errors import DomainError, HedgeDeskError
from .instruments import QuoteBook, payoff_unit_long, payoff_unit_short
from .pricing import PricingEngine
from .scenarios import ViewModel, build_grid, sample
from .solver import Liability, Preferences, SplitPortfolio

SWEEP_PARAMETERS = ("sigma", "lambda", "initial_position_units", "multiplier",
                    "mu_sigma_grid")
CSV_HEADER_1D = "param_1,sell_price,buy_price,entropic_risk,status"
CSV_HEADER_2D = "param_1,param_2,sell_price,buy_price,entropic_risk,status"


@dataclass(frozen=True)
class GridParams:
    panels: int = 100
    nodes_per_panel: int = 25
    tail_mass: float = 1e-6


@dataclass(frozen=True)
class SweepContext:
    """Immutable slice of market/model/preference state shared by all points."""

    book: QuoteBook
    model: ViewModel
    prefs: Preferences
    baseline: Liability = Liability.zero()
    grid_params: GridParams = GridParams()
    price_tol: float | None = None
    solver_tol: float = 1e-8
    seed: int = 0


@dataclass(frozen=True)
class SweepSpec:
    """What to vary, over which values, and what to report."""

    parameter: str
    values: tuple
    claim: ClaimSpec | None = None
    target: str = "claim"  # or "portfolio-risk"

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise DomainError(f"unknown sweep parameter {self.parameter!r}; "
                              f"expected one of {SWEEP_PARAMETERS}")
        if self.target not in ("claim", "portfolio-risk"):
            raise DomainError("target must be 'claim' or 'portfolio-risk'")
        if self.parameter == "mu_sigma_grid":
            mu_vals, sigma_vals = self.values
            if len(mu_vals) == 0 or len(sigma_vals) == 0:
                raise DomainError("mu_sigma_grid needs both axes nonempty")
            object.__setattr__(self, "values",
                               (tuple(float(v) for v in mu_vals),
                                tuple(float(v) for v in sigma_vals)))
        else:
            vals = tuple(float(v) for v in self.values)
            if not vals:
                raise DomainError("sweep values must be nonempty")
            if any(not math.isfinite(v) for v in vals):
                raise DomainError("sweep values must be finite")
            if list(vals) != sorted(vals):
                raise DomainError("sweep values must be sorted ascending")
            object.__setattr__(self, "values", vals)
        if self.target == "claim" and self.claim is None:
            raise DomainError("claim target requires a claim")


@dataclass
class SweepRow:
    params: tuple
    sell_price: float | None
    buy_price: float | None
    entropic_risk: float | None
    status: str


@dataclass
class SweepResult:
    rows: list
    two_dimensional: bool
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        """Deterministic CSV; floats in shortest round-trip decimal form."""
        lines = [CSV_HEADER_2D if self.two_dimensional else CSV_HEADER_1D]
        for row in self.rows:
            cells = [repr(p) for p in row.params]
            for value in (row.sell_price, row.buy_price, row.entropic_risk):
                cells.append("" if value is None else repr(value))
            cells.append(row.status)
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _config_hash(context: SweepContext, spec: SweepSpec) -> str:
    payload = {
        "ids": context.book.ids,
        "model": (context.model.mu, context.model.sigma, context.model.nu),
        "prefs": (context.prefs.wealth, context.prefs.risk_aversion),
        "seed": context.seed,
        "parameter": spec.parameter,
        "values": spec.values,
        "claim": spec.claim.to_json() if spec.claim else None,
        "target": spec.target,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str)
                          .encode()).hexdigest()[:16]


def _point_context(context: SweepContext, spec: SweepSpec, value):
    """Per-point (book, model, prefs, baseline, claim) after the one rebind."""
    model, prefs, baseline, claim = (context.model, context.prefs,
                                     context.baseline, spec.claim)
    if spec.parameter == "sigma":
        model = replace(model, sigma=float(value))
    elif spec.parameter == "lambda":
        prefs = Preferences(prefs.wealth, float(value), prefs.scale_wealth)
    elif spec.parameter == "initial_position_units":
        # signed units of the claim already owed in the baseline position
        baseline = context.baseline.plus(spec.claim, float(value))
    elif spec.parameter == "multiplier":
        claim = ScaledClaim(float(value), spec.claim)
    elif spec.parameter == "mu_sigma_grid":
        mu, sigma = value
        model = replace(model, mu=float(mu), sigma=float(sigma))
    return model, prefs, baseline, claim


def _evaluate_point(context: SweepContext, spec: SweepSpec, params: tuple):
    value = params[0] if len(params) == 1 else params
    model, prefs, baseline, claim = _point_context(context, spec, value)
    gp = context.grid_params
    grid = build_grid(model, gp.panels, gp.nodes_per_panel, gp.tail_mass)
    engine = PricingEngine(context.book, grid, prefs, baseline,
                           solver_tol=context.solver_tol)
    risk = float(engine.baseline_result.entropic_risk)
    if spec.target == "portfolio-risk":
        return SweepRow(params, None, None, risk, "ok")
    result = engine.price(claim, price_tol=context.price_tol)
    return SweepRow(params, float(result.sell_price), float(result.buy_price),
                    risk, "ok")


def run_sweep(context: SweepContext, spec: SweepSpec,
              max_workers: int = 4) -> SweepResult:
    """Evaluate every sweep point; deterministic output for a fixed config."""
    if spec.parameter == "mu_sigma_grid":
        mu_vals, sigma_vals = spec.values
        points = [(mu, sigma) for mu in mu_vals for sigma in sigma_vals]
        two_dimensional = True
    else:
        points = [(v,) for v in spec.values]
        two_dimensional = False

    def run_point(params):
        try:
            return _evaluate_point(context, spec, params)
        except HedgeDeskError as exc:
            return SweepRow(params, None, None, None,
                            f"error:{type(exc).__name__}")

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(run_point, points))
    metadata = {
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config_hash": _config_hash(context, spec),
        "points": len(points),
    }
    return SweepResult(rows=rows, two_dimensional=two_dimensional, metadata=metadata)


def payoff_distribution(book: QuoteBook, portfolio: SplitPortfolio, model: ViewModel,
                        n: int, seed: int, bins: int | None = None):
    """Monte Carlo sample of the portfolio's terminal payoff.

    Returns the raw samples, or (bin_edges, counts) when ``bins`` is given.
    """
    if n < 10_000:
        raise DomainError("need at least 10,000 samples")
    levels = sample(model, n, seed)
    total = np.zeros(n)
    for j, instr in enumerate(book.instruments):
        if portfolio.long[j] != 0.0:
            total += portfolio.long[j] * payoff_unit_long(instr, levels, book.maturity)
        if portfolio.short[j] != 0.0:
            total += portfolio.short[j] * payoff_unit_short(instr, levels, book.maturity)
    if bins is None:
        return total
    counts, edges = np.histogram(total, bins=bins)
    return edges, counts
