"""Session configuration shared by the CLI and the JSON service.

A session pins one quote book (from a file or the bundled synthetic market),
one view model, preferences, grid resolution, and tolerances. Engines are
derived per request for parameter overrides, with baselines cached.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from . import fixture
from .claims import DEFAULT_INTERVAL
from .errors import DomainError
from .instruments import MarketConfig, load_quote_book
from .pricing import PricingEngine
from .scenarios import ViewModel, build_grid
from .solver import Liability, Preferences
from .sweeps import GridParams, SweepContext


def parse_nu(raw) -> float:
    """Degrees of freedom from config text; 'inf' selects the Gaussian."""
    if isinstance(raw, (int, float)):
        return float(raw)
    text = str(raw).strip().lower()
    if text in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        return float(text)
    except ValueError as exc:
        raise DomainError(f"nu must be a number or 'inf', got {raw!r}") from exc


@dataclass(frozen=True)
class SessionConfig:
    """Everything needed to reproduce one engine session."""

    quotes_path: str | None = None
    market: MarketConfig | None = None
    mu: float = fixture.VIEW_MU
    sigma: float = fixture.VIEW_SIGMA
    nu: float = fixture.VIEW_NU
    risk_aversion: float = fixture.RISK_AVERSION
    wealth: float = fixture.WEALTH
    grid_params: GridParams = GridParams()
    price_tol: float | None = None
    solver_tol: float = 1e-10
    seed: int = 0
    interval: tuple = DEFAULT_INTERVAL


class Session:
    """Loaded book plus lazily built engines keyed by parameter overrides."""

    def __init__(self, config: SessionConfig):
        self.config = config
        if config.quotes_path is None:
            self.book = fixture.synthetic_book()
        else:
            if config.market is None:
                raise DomainError("a quote file needs market config (spot, maturity, rates)")
            self.book = load_quote_book(config.quotes_path, config.market)
        self._engines: dict = {}
        self._lock = threading.Lock()

    def view(self, mu=None, sigma=None, nu=None) -> ViewModel:
        cfg = self.config
        return ViewModel(
            mu=cfg.mu if mu is None else float(mu),
            sigma=cfg.sigma if sigma is None else float(sigma),
            nu=cfg.nu if nu is None else parse_nu(nu),
            spot=self.book.spot,
        )

    def preferences(self, risk_aversion=None, wealth=None) -> Preferences:
        cfg = self.config
        return Preferences(
            wealth=cfg.wealth if wealth is None else float(wealth),
            risk_aversion=(cfg.risk_aversion if risk_aversion is None
                           else float(risk_aversion)),
        )

    def engine(self, view: ViewModel | None = None, prefs: Preferences | None = None,
               baseline: Liability = Liability.zero()) -> PricingEngine:
        """Engine for the given overrides; baseline solves are cached per key
        and computed eagerly under the lock so concurrent requests share one
        deterministic result."""
        view = view or self.view()
        prefs = prefs or self.preferences()
        key = (view.mu, view.sigma, view.nu, prefs.wealth, prefs.risk_aversion,
               tuple((str(c.to_json()), q) for c, q in baseline.components))
        with self._lock:
            engine = self._engines.get(key)
            if engine is None:
                gp = self.config.grid_params
                grid = build_grid(view, gp.panels, gp.nodes_per_panel, gp.tail_mass)
                engine = PricingEngine(self.book, grid, prefs, baseline,
                                       solver_tol=self.config.solver_tol,
                                       interval=self.config.interval)
                engine.baseline_result  # warm the cache inside the lock
                if len(self._engines) >= 32:
                    self._engines.pop(next(iter(self._engines)))
                self._engines[key] = engine
        return engine

    def sweep_context(self, baseline: Liability = Liability.zero()) -> SweepContext:
        return SweepContext(
            book=self.book,
            model=self.view(),
            prefs=self.preferences(),
            baseline=baseline,
            grid_params=self.config.grid_params,
            price_tol=self.config.price_tol,
            solver_tol=self.config.solver_tol,
            seed=self.config.seed,
        )
