"""Tradable assets, bid/ask quotes with finite depth, and quote-book I/O.

The market consists of cash (with distinct borrowing and lending rates), at
most one forward, and European calls and puts, all sharing one maturity.
Entry costs are piecewise linear in the signed position: longs pay the ask,
shorts receive the bid, and each side is capped by the quoted depth.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import DepthError, DomainError, QuoteError

CASH_ID = "CASH"


@dataclass(frozen=True)
class RatePair:
    """Annualized continuously-compounded borrowing and lending rates."""

    borrow_rate: float
    lend_rate: float

    def __post_init__(self):
        if self.borrow_rate < self.lend_rate:
            raise QuoteError(
                f"borrow rate {self.borrow_rate} below lend rate {self.lend_rate}"
            )


@dataclass(frozen=True)
class Cash:
    id: str
    rates: RatePair


@dataclass(frozen=True)
class Forward:
    """Forward contract; entering long trades at ``fwd_ask``, short at ``fwd_bid``."""

    id: str
    fwd_ask: float
    fwd_bid: float

    def __post_init__(self):
        if self.fwd_ask < self.fwd_bid:
            raise QuoteError(
                f"forward {self.id}: ask forward price {self.fwd_ask} below bid {self.fwd_bid}"
            )


@dataclass(frozen=True)
class Call:
    id: str
    strike: float

    def __post_init__(self):
        if not self.strike > 0:
            raise QuoteError(f"call {self.id}: strike must be positive")


@dataclass(frozen=True)
class Put:
    id: str
    strike: float

    def __post_init__(self):
        if not self.strike > 0:
            raise QuoteError(f"put {self.id}: strike must be positive")


Instrument = Union[Cash, Forward, Call, Put]


def _check_level(x_T, T):
    if np.any(np.asarray(x_T) <= 0):
        raise DomainError("underlying level must be positive")
    if T < 0:
        raise DomainError("maturity must be nonnegative")


def payoff_unit_long(instr: Instrument, x_T, T: float):
    """Payoff per unit of a one-unit long position at maturity.

    Vectorized over ``x_T``.
    """
    _check_level(x_T, T)
    x_T = np.asarray(x_T, dtype=float)
    if isinstance(instr, Cash):
        return np.full_like(x_T, math.exp(instr.rates.lend_rate * T))
    if isinstance(instr, Forward):
        return x_T - instr.fwd_ask
    if isinstance(instr, Call):
        return np.maximum(x_T - instr.strike, 0.0)
    if isinstance(instr, Put):
        return np.maximum(instr.strike - x_T, 0.0)
    raise TypeError(f"unknown instrument type {type(instr)!r}")


def payoff_unit_short(instr: Instrument, x_T, T: float):
    """Payoff coefficient multiplying a nonnegative short quantity.

    For a split position x = x_plus - x_minus, total payoff is
    payoff_unit_long * x_plus + payoff_unit_short * x_minus.
    """
    _check_level(x_T, T)
    x_T = np.asarray(x_T, dtype=float)
    if isinstance(instr, Cash):
        return np.full_like(x_T, -math.exp(instr.rates.borrow_rate * T))
    if isinstance(instr, Forward):
        return -(x_T - instr.fwd_bid)
    return -payoff_unit_long(instr, x_T, T)


@dataclass(frozen=True)
class Quote:
    """Best bid/ask with the units tradable at each side."""

    instrument_id: str
    bid_price: float
    ask_price: float
    bid_depth: float  # max units sellable; may be math.inf
    ask_depth: float  # max units buyable; may be math.inf

    def __post_init__(self):
        if self.bid_price > self.ask_price:
            raise QuoteError(
                f"{self.instrument_id}: crossed quote, bid {self.bid_price} > ask {self.ask_price}"
            )
        if self.bid_depth < 0 or self.ask_depth < 0:
            raise QuoteError(f"{self.instrument_id}: negative depth")

    @property
    def mid(self) -> float:
        return 0.5 * (self.bid_price + self.ask_price)

    @property
    def spread(self) -> float:
        return self.ask_price - self.bid_price


def entry_cost(quote: Quote, x: float) -> float:
    """Cost of entering ``x`` signed units: ask for buys, bid for sells."""
    tol = 1e-12 * max(1.0, abs(x))
    if x > quote.ask_depth + tol or x < -quote.bid_depth - tol:
        raise DepthError(
            f"{quote.instrument_id}: position {x} outside depth box "
            f"[{-quote.bid_depth}, {quote.ask_depth}]"
        )
    return quote.ask_price * x if x >= 0 else quote.bid_price * x


def split_entry_cost(quote: Quote, long_units: float, short_units: float) -> float:
    """Cost of a split position: pay ask on the long leg, receive bid on the short."""
    return quote.ask_price * long_units - quote.bid_price * short_units


@dataclass(frozen=True)
class QuoteBook:
    """Immutable snapshot of all tradable instruments with quotes.

    Contains exactly one cash instrument and at most one forward; safe to
    share read-only across concurrent solves.
    """

    instruments: tuple
    quotes: tuple
    spot: float
    maturity: float

    def __post_init__(self):
        if self.spot <= 0:
            raise QuoteError("spot must be positive")
        if self.maturity <= 0:
            raise QuoteError("maturity must be positive")
        ids = [i.id for i in self.instruments]
        if len(set(ids)) != len(ids):
            raise QuoteError("instrument ids must be unique")
        n_cash = sum(isinstance(i, Cash) for i in self.instruments)
        n_fwd = sum(isinstance(i, Forward) for i in self.instruments)
        if n_cash != 1:
            raise QuoteError(f"expected exactly one cash instrument, found {n_cash}")
        if n_fwd > 1:
            raise QuoteError(f"expected at most one forward, found {n_fwd}")
        if len(self.quotes) != len(self.instruments):
            raise QuoteError("need exactly one quote per instrument")
        by_id = {i.id: i for i in self.instruments}
        for q in self.quotes:
            instr = by_id.get(q.instrument_id)
            if instr is None:
                raise QuoteError(f"quote references unknown instrument {q.instrument_id}")
            if isinstance(instr, Cash):
                if q.bid_price != 1.0 or q.ask_price != 1.0:
                    raise QuoteError("cash must quote bid = ask = 1")
                if not (math.isinf(q.bid_depth) and math.isinf(q.ask_depth)):
                    raise QuoteError("cash depth must be unbounded")
            if isinstance(instr, Forward) and (q.bid_price != 0.0 or q.ask_price != 0.0):
                raise QuoteError("forward entry cost must be zero; prices live on the instrument")

    def __len__(self):
        return len(self.instruments)

    @property
    def ids(self):
        return tuple(i.id for i in self.instruments)

    def quote_for(self, instrument_id: str) -> Quote:
        for q in self.quotes:
            if q.instrument_id == instrument_id:
                return q
        raise KeyError(instrument_id)

    def instrument(self, instrument_id: str) -> Instrument:
        for i in self.instruments:
            if i.id == instrument_id:
                return i
        raise KeyError(instrument_id)

    @property
    def cash(self) -> Cash:
        return next(i for i in self.instruments if isinstance(i, Cash))

    @property
    def forward(self):
        return next((i for i in self.instruments if isinstance(i, Forward)), None)

    @property
    def options(self):
        return tuple(i for i in self.instruments if isinstance(i, (Call, Put)))

    @property
    def rates(self) -> RatePair:
        return self.cash.rates

    def call_strikes(self):
        return tuple(sorted(i.strike for i in self.instruments if isinstance(i, Call)))

    def option_strikes(self):
        return tuple(sorted({i.strike for i in self.options}))

    def without_instrument(self, instrument_id: str) -> "QuoteBook":
        """Copy of the book with one non-cash instrument removed."""
        instr = self.instrument(instrument_id)
        if isinstance(instr, Cash):
            raise QuoteError("cannot remove the cash instrument")
        return QuoteBook(
            instruments=tuple(i for i in self.instruments if i.id != instrument_id),
            quotes=tuple(q for q in self.quotes if q.instrument_id != instrument_id),
            spot=self.spot,
            maturity=self.maturity,
        )

    def with_zero_spread(self) -> "QuoteBook":
        """Collapse every bid/ask pair (and the forward prices) to the mid."""
        instruments = []
        quotes = []
        for instr, q in zip(self.instruments, self.quotes):
            if isinstance(instr, Forward):
                mid_k = 0.5 * (instr.fwd_ask + instr.fwd_bid)
                instr = replace(instr, fwd_ask=mid_k, fwd_bid=mid_k)
                instruments.append(instr)
                quotes.append(q)
            elif isinstance(instr, Cash):
                instruments.append(instr)
                quotes.append(q)
            else:
                instruments.append(instr)
                quotes.append(replace(q, bid_price=q.mid, ask_price=q.mid))
        return QuoteBook(tuple(instruments), tuple(quotes), self.spot, self.maturity)

    def with_unlimited_depth(self) -> "QuoteBook":
        quotes = tuple(
            replace(q, bid_depth=math.inf, ask_depth=math.inf) for q in self.quotes
        )
        return QuoteBook(self.instruments, quotes, self.spot, self.maturity)

    def with_depth_scale(self, factor: float) -> "QuoteBook":
        quotes = tuple(
            q
            if q.instrument_id == self.cash.id
            else replace(q, bid_depth=q.bid_depth * factor, ask_depth=q.ask_depth * factor)
            for q in self.quotes
        )
        return QuoteBook(self.instruments, quotes, self.spot, self.maturity)


@dataclass(frozen=True)
class MarketConfig:
    """Market-level settings required to turn a quote file into a book."""

    spot: float
    maturity_years: float
    lend_rate: float
    borrow_rate: float
    lot_forward: float = 50.0
    lot_option: float = 100.0

    @staticmethod
    def from_file(path) -> "MarketConfig":
        """Parse a key=value file; '#' starts a comment."""
        values = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise QuoteError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, value = (part.strip() for part in line.split("=", 1))
                try:
                    values[key] = float(value)
                except ValueError as exc:
                    raise QuoteError(f"{path}:{lineno}: bad number for {key}: {value!r}") from exc
        try:
            return MarketConfig(**values)
        except TypeError as exc:
            raise QuoteError(f"{path}: {exc}") from exc


QUOTE_FILE_HEADER = ["ticker", "type", "strike", "bid_qty_lots", "bid", "ask", "ask_qty_lots"]


def _parse_float(row, field, path, lineno):
    raw = row.get(field, "")
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise QuoteError(f"{path}:{lineno}: bad value for {field}: {raw!r}") from None


def load_quote_book(path, config: MarketConfig) -> QuoteBook:
    """Read a quote CSV and synthesize the cash instrument from config rates.

    Depths are converted from lots to units here, once; the optimizer's
    feasible box is in units.
    """
    instruments = [Cash(CASH_ID, RatePair(config.borrow_rate, config.lend_rate))]
    quotes = [Quote(CASH_ID, 1.0, 1.0, math.inf, math.inf)]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != QUOTE_FILE_HEADER:
            raise QuoteError(
                f"{path}: expected header {','.join(QUOTE_FILE_HEADER)}, got {reader.fieldnames}"
            )
        for row in reader:
            lineno = reader.line_num
            ticker = (row.get("ticker") or "").strip()
            kind = (row.get("type") or "").strip().lower()
            if not ticker:
                raise QuoteError(f"{path}:{lineno}: missing ticker")
            bid = _parse_float(row, "bid", path, lineno)
            ask = _parse_float(row, "ask", path, lineno)
            bid_lots = _parse_float(row, "bid_qty_lots", path, lineno)
            ask_lots = _parse_float(row, "ask_qty_lots", path, lineno)
            if bid > ask:
                raise QuoteError(f"{path}:{lineno}: crossed quote, bid {bid} > ask {ask}")
            if bid_lots < 0 or ask_lots < 0:
                raise QuoteError(f"{path}:{lineno}: negative quantity")
            if kind == "forward":
                if (row.get("strike") or "").strip():
                    raise QuoteError(f"{path}:{lineno}: forward row must leave strike empty")
                instruments.append(Forward(ticker, fwd_ask=ask, fwd_bid=bid))
                quotes.append(
                    Quote(ticker, 0.0, 0.0,
                          bid_depth=bid_lots * config.lot_forward,
                          ask_depth=ask_lots * config.lot_forward)
                )
            elif kind in ("call", "put"):
                strike = _parse_float(row, "strike", path, lineno)
                cls = Call if kind == "call" else Put
                instruments.append(cls(ticker, strike))
                quotes.append(
                    Quote(ticker, bid, ask,
                          bid_depth=bid_lots * config.lot_option,
                          ask_depth=ask_lots * config.lot_option)
                )
            else:
                raise QuoteError(f"{path}:{lineno}: unknown type {kind!r}")
    return QuoteBook(tuple(instruments), tuple(quotes), config.spot, config.maturity_years)


def save_quote_book(book: QuoteBook, path, config: MarketConfig) -> None:
    """Write the non-cash rows back in the quote-file schema (depths in lots)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(QUOTE_FILE_HEADER)
        for instr in book.instruments:
            if isinstance(instr, Cash):
                continue
            q = book.quote_for(instr.id)
            if isinstance(instr, Forward):
                writer.writerow([
                    instr.id, "forward", "",
                    repr(float(q.bid_depth / config.lot_forward)),
                    repr(float(instr.fwd_bid)), repr(float(instr.fwd_ask)),
                    repr(float(q.ask_depth / config.lot_forward)),
                ])
            else:
                kind = "call" if isinstance(instr, Call) else "put"
                writer.writerow([
                    instr.id, kind, repr(float(instr.strike)),
                    repr(float(q.bid_depth / config.lot_option)),
                    repr(float(q.bid_price)), repr(float(q.ask_price)),
                    repr(float(q.ask_depth / config.lot_option)),
                ])
