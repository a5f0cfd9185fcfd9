"""Static-hedging and indifference-pricing engine for European claims under
bid/ask spreads and finite quote depth."""

from .bounds import HedgeBoundResult, subhedge, superhedge, verify_dominance
from .claims import (CallClaim, ClaimSpec, ConstantClaim, DigitalClaim,
                     LogForward, PiecewiseLinearClaim, PutClaim,
                     QuadraticForward, ScaledClaim, ZERO_CLAIM, claim_from_json,
                     claim_scale)
from .errors import (AssemblyError, DepthError, DomainError, HedgeDeskError,
                     InfeasibleHedge, ModelError, QuoteError, SolverFailure,
                     UnpriceableClaim, UnsupportedClaim)
from .instruments import (Call, Cash, Forward, Instrument, MarketConfig, Put,
                          Quote, QuoteBook, RatePair, entry_cost,
                          load_quote_book, payoff_unit_long, payoff_unit_short,
                          save_quote_book)
from .pricing import (BLReplication, IndifferenceQuote, PriceResult,
                      PricingEngine, bl_replication, default_price_tol,
                      indifference_buy, indifference_sell, value_function)
from .scenarios import ScenarioGrid, ViewModel, build_grid, quantile, sample
from .solver import (Liability, Preferences, Problem, SolveResult,
                     SplitPortfolio, assemble, entropic_risk, solve)
from .sweeps import (GridParams, SweepContext, SweepResult, SweepRow, SweepSpec,
                     payoff_distribution, run_sweep)

__version__ = "0.1.0"
