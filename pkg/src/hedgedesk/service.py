"""JSON-over-HTTP service exposing the engine to scripts and the desk UI.

One quote book per process (reload via restart); request handling is
concurrent over the immutable session, with a bounded response cache keyed
by the canonical request body. Endpoints and schemas are documented in
docs/api.md and consumed verbatim by the what-if frontend.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from typing import Any, Optional, Union

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from dataclasses import replace as _dc_replace

from .claims import claim_from_json
from .errors import (DomainError, HedgeDeskError, InfeasibleHedge, ModelError,
                     QuoteError, UnpriceableClaim, UnsupportedClaim)
from .instruments import Call, Put
from .pricing import match_quoted_instrument
from .session import Session
from .solver import Liability, SplitPortfolio
from .sweeps import SweepSpec, payoff_distribution, run_sweep

VALIDATION_ERRORS = (DomainError, QuoteError, ModelError, UnsupportedClaim)
CAPACITY_ERRORS = (UnpriceableClaim, InfeasibleHedge)


class ViewOverride(BaseModel):
    mu: Optional[float] = None
    sigma: Optional[float] = None
    nu: Optional[Union[float, str]] = None


class PreferencesOverride(BaseModel):
    risk_aversion: Optional[float] = None
    wealth: Optional[float] = None


class BaselinePosition(BaseModel):
    claim: dict
    quantity: float = 1.0


class SolveRequest(BaseModel):
    view: Optional[ViewOverride] = None
    preferences: Optional[PreferencesOverride] = None
    liability: Optional[list[BaselinePosition]] = None


class PriceRequest(SolveRequest):
    claim: dict
    exclude_from_hedging: bool = False
    price_tol: Optional[float] = Field(default=None, gt=0)
    include_bounds: bool = True


class BoundsRequest(BaseModel):
    claim: dict
    interval: Optional[tuple[float, float]] = None


class SweepRequest(SolveRequest):
    parameter: str
    values: Optional[list[float]] = None
    mu_values: Optional[list[float]] = None
    sigma_values: Optional[list[float]] = None
    claim: Optional[dict] = None
    target: str = "claim"
    price_tol: Optional[float] = Field(default=None, gt=0)


class PortfolioEntry(BaseModel):
    id: str
    net_units: float


class DistributionRequest(SolveRequest):
    portfolio: Optional[list[PortfolioEntry]] = None
    n: int = Field(default=100_000, ge=10_000)
    seed: Optional[int] = None
    bins: int = Field(default=60, ge=2)


def _portfolio_rows(portfolio: SplitPortfolio, min_units: float = 1e-9):
    rows = []
    for i, instrument_id in enumerate(portfolio.ids):
        net = float(portfolio.net[i])
        if abs(net) > min_units:
            rows.append({
                "id": instrument_id,
                "net_units": net,
                "long_units": float(portfolio.long[i]),
                "short_units": float(portfolio.short[i]),
                "side": "long" if net > 0 else "short",
            })
    return rows


def _solve_payload(result):
    return {
        "objective": result.objective,
        "entropic_risk": result.entropic_risk,
        "budget_slack": result.budget_slack,
        "kkt_residual": result.kkt_residual,
        "duality_gap": result.duality_gap,
        "iterations": result.iterations,
        "converged": result.converged,
        "wealth": result.wealth,
        "portfolio": _portfolio_rows(result.portfolio),
        "scenario_payoff_min": float(np.min(result.scenario_payoffs)),
        "scenario_payoff_max": float(np.max(result.scenario_payoffs)),
    }


def _bound_payload(bound):
    return {
        "cost": bound.cost,
        "portfolio": _portfolio_rows(bound.portfolio),
        "verification_margin": bound.verification_margin,
        "binding_points": [float(x) for x in bound.binding_points],
        "interval": list(bound.interval),
    }


def _liability_from(request_liability) -> Liability:
    liability = Liability.zero()
    if request_liability:
        for entry in request_liability:
            liability = liability.plus(claim_from_json(entry.claim), entry.quantity)
    return liability


class _ResponseCache:
    """Bounded FIFO cache; single-writer updates behind a lock."""

    def __init__(self, capacity: int = 256):
        self.capacity = capacity
        self._data: dict = {}
        self._order: list = []
        self._lock = threading.Lock()

    @staticmethod
    def key(endpoint: str, body: Any) -> str:
        canon = json.dumps(body, sort_keys=True, separators=(",", ":"), default=str)
        return endpoint + ":" + hashlib.sha256(canon.encode()).hexdigest()

    def get(self, key: str):
        return self._data.get(key)

    def put(self, key: str, value) -> None:
        with self._lock:
            if key not in self._data:
                if len(self._order) >= self.capacity:
                    self._data.pop(self._order.pop(0), None)
                self._order.append(key)
            self._data[key] = value


def create_app(session: Session) -> FastAPI:
    app = FastAPI(title="hedgedesk", version=__version__)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    cache = _ResponseCache()

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={
            "error": "validation", "detail": exc.errors()})

    @app.exception_handler(HedgeDeskError)
    async def _on_engine_error(request: Request, exc: HedgeDeskError):
        if isinstance(exc, VALIDATION_ERRORS):
            status = 400
        elif isinstance(exc, CAPACITY_ERRORS):
            status = 422
        else:
            status = 500
        return JSONResponse(status_code=status, content={
            "error": type(exc).__name__, "detail": str(exc)})

    def engine_for(req: SolveRequest):
        view = None
        if req.view is not None:
            view = session.view(req.view.mu, req.view.sigma, req.view.nu)
        prefs = None
        if req.preferences is not None:
            prefs = session.preferences(req.preferences.risk_aversion,
                                        req.preferences.wealth)
        return session.engine(view=view, prefs=prefs,
                              baseline=_liability_from(req.liability))

    @app.get("/market")
    def market():
        book = session.book
        rows = []
        spreads = []
        rel_spreads = []
        for instr in book.instruments:
            q = book.quote_for(instr.id)
            kind = type(instr).__name__.lower()
            rows.append({
                "id": instr.id,
                "kind": kind,
                "strike": getattr(instr, "strike", None),
                "bid": q.bid_price,
                "ask": q.ask_price,
                "bid_depth": None if math.isinf(q.bid_depth) else q.bid_depth,
                "ask_depth": None if math.isinf(q.ask_depth) else q.ask_depth,
            })
            if isinstance(instr, (Call, Put)):
                spreads.append(q.spread)
                if q.mid > 0:
                    rel_spreads.append(q.spread / q.mid)
        return {
            "spot": book.spot,
            "maturity_years": book.maturity,
            "instrument_count": len(book.instruments),
            "option_count": len(book.options),
            "lend_rate": book.rates.lend_rate,
            "borrow_rate": book.rates.borrow_rate,
            "spread_stats": {
                "mean_abs": float(np.mean(spreads)) if spreads else 0.0,
                "max_abs": float(np.max(spreads)) if spreads else 0.0,
                "mean_rel": float(np.mean(rel_spreads)) if rel_spreads else 0.0,
            },
            "instruments": rows,
        }

    @app.post("/solve")
    def solve_endpoint(req: SolveRequest):
        key = cache.key("solve", req.model_dump())
        hit = cache.get(key)
        if hit is not None:
            return hit
        engine = engine_for(req)
        payload = _solve_payload(engine.baseline_result)
        cache.put(key, payload)
        return payload

    @app.post("/price")
    def price_endpoint(req: PriceRequest):
        key = cache.key("price", req.model_dump())
        hit = cache.get(key)
        if hit is not None:
            return hit
        engine = engine_for(req)
        claim = claim_from_json(req.claim)
        result = engine.price(claim, price_tol=req.price_tol,
                              exclude_from_hedging=req.exclude_from_hedging)
        payload = {
            "sell_price": result.sell_price,
            "buy_price": result.buy_price,
            "price_tol": result.price_tol,
            "baseline_entropic_risk": result.baseline_risk,
            "iterations": result.iterations,
            "bracket": list(result.bracket),
            "hedge_sell": _portfolio_rows(result.hedge_sell),
            "hedge_buy": _portfolio_rows(result.hedge_buy),
            "portfolio_after_sell": _portfolio_rows(result.sell.portfolio_after),
            "portfolio_after_buy": _portfolio_rows(result.buy.portfolio_after),
        }
        if req.include_bounds:
            target = engine
            if req.exclude_from_hedging:
                quoted = match_quoted_instrument(engine.book, claim)
                if quoted is not None:
                    target = engine.excluding(quoted)
            inf_res, sup_res = target.hedge_bounds(claim)
            payload["subhedge_cost"] = inf_res.cost
            payload["superhedge_cost"] = sup_res.cost
        cache.put(key, payload)
        return payload

    @app.post("/bounds")
    def bounds_endpoint(req: BoundsRequest):
        key = cache.key("bounds", req.model_dump())
        hit = cache.get(key)
        if hit is not None:
            return hit
        engine = session.engine()
        claim = claim_from_json(req.claim)
        inf_res, sup_res = engine.hedge_bounds(claim, req.interval)
        payload = {"subhedge": _bound_payload(inf_res),
                   "superhedge": _bound_payload(sup_res)}
        cache.put(key, payload)
        return payload

    @app.post("/sweep")
    def sweep_endpoint(req: SweepRequest):
        key = cache.key("sweep", req.model_dump())
        hit = cache.get(key)
        if hit is not None:
            return hit
        if req.parameter == "mu_sigma_grid":
            if not (req.mu_values and req.sigma_values):
                raise DomainError("mu_sigma_grid requires mu_values and sigma_values")
            values = (tuple(req.mu_values), tuple(req.sigma_values))
        else:
            if not req.values:
                raise DomainError("sweep requires values")
            values = tuple(req.values)
        claim = claim_from_json(req.claim) if req.claim is not None else None
        spec = SweepSpec(parameter=req.parameter, values=values, claim=claim,
                         target=req.target)
        context = session.sweep_context(baseline=_liability_from(req.liability))
        if req.price_tol is not None:
            context = _dc_replace(context, price_tol=req.price_tol)
        result = run_sweep(context, spec)
        payload = {
            "rows": [{
                "params": list(row.params),
                "sell_price": row.sell_price,
                "buy_price": row.buy_price,
                "entropic_risk": row.entropic_risk,
                "status": row.status,
            } for row in result.rows],
            "csv": result.to_csv(),
            "metadata": result.metadata,
        }
        cache.put(key, payload)
        return payload

    @app.post("/distribution")
    def distribution_endpoint(req: DistributionRequest):
        key = cache.key("distribution", req.model_dump())
        hit = cache.get(key)
        if hit is not None:
            return hit
        engine = engine_for(req)
        if req.portfolio is None:
            portfolio = engine.baseline_result.portfolio
        else:
            ids = session.book.ids
            known = set(ids)
            net = np.zeros(len(ids))
            for entry in req.portfolio:
                if entry.id not in known:
                    raise DomainError(f"unknown instrument id {entry.id!r}")
                net[ids.index(entry.id)] += entry.net_units
            portfolio = SplitPortfolio.from_net(ids, net)
        view = session.view(req.view.mu, req.view.sigma, req.view.nu) \
            if req.view is not None else session.view()
        seed = session.config.seed if req.seed is None else req.seed
        samples = payoff_distribution(session.book, portfolio, view, req.n, seed)
        counts, edges = np.histogram(samples, bins=req.bins)
        payload = {
            "n": req.n,
            "seed": seed,
            "bin_edges": [float(e) for e in edges],
            "counts": [int(c) for c in counts],
            "mean": float(np.mean(samples)),
            "std": float(np.std(samples)),
            "p01": float(np.quantile(samples, 0.01)),
            "p99": float(np.quantile(samples, 0.99)),
        }
        cache.put(key, payload)
        return payload

    return app
