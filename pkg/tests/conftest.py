import math

import pytest

from hedgedesk import fixture
from hedgedesk.instruments import (CASH_ID, Call, Cash, Forward, Put, Quote,
                                   QuoteBook, RatePair)
from hedgedesk.scenarios import build_grid
from hedgedesk.solver import Preferences

RATES = RatePair(borrow_rate=fixture.BORROW_RATE, lend_rate=fixture.LEND_RATE)


@pytest.fixture(scope="session")
def view_model():
    return fixture.synthetic_view()


@pytest.fixture(scope="session")
def prefs():
    return fixture.synthetic_preferences()


@pytest.fixture(scope="session")
def book():
    return fixture.synthetic_book()


@pytest.fixture(scope="session")
def grid(view_model):
    return build_grid(view_model)


@pytest.fixture(scope="session")
def small_grid(view_model):
    """Coarser grid for tests that only need a consistent discrete measure."""
    return build_grid(view_model, panels=20, nodes_per_panel=10)


@pytest.fixture(scope="session")
def sample_book():
    return fixture.sample_book()


def make_book(options, spot=fixture.SPOT, maturity=fixture.MATURITY,
              forward=None, rates=RATES):
    """Small test book: cash plus explicit options (and optional forward).

    ``options`` rows: (id, kind, strike, bid, ask, bid_depth, ask_depth).
    ``forward``: (id, fwd_bid, fwd_ask, bid_depth, ask_depth).
    """
    instruments = [Cash(CASH_ID, rates)]
    quotes = [Quote(CASH_ID, 1.0, 1.0, math.inf, math.inf)]
    if forward is not None:
        fid, fwd_bid, fwd_ask, bd, ad = forward
        instruments.append(Forward(fid, fwd_ask=fwd_ask, fwd_bid=fwd_bid))
        quotes.append(Quote(fid, 0.0, 0.0, bd, ad))
    for oid, kind, strike, bid, ask, bd, ad in options:
        cls = Call if kind == "call" else Put
        instruments.append(cls(oid, strike))
        quotes.append(Quote(oid, bid, ask, bd, ad))
    return QuoteBook(tuple(instruments), tuple(quotes), spot, maturity)


@pytest.fixture(scope="session")
def cash_only_book():
    return make_book([])


@pytest.fixture
def small_prefs():
    return Preferences(wealth=50.0, risk_aversion=2.0)


def assert_close(actual, expected, tol, label=""):
    assert abs(actual - expected) <= tol, (
        f"{label}: {actual!r} vs {expected!r} (tol {tol!r}, "
        f"diff {actual - expected!r})")
