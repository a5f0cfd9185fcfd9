"""Command-line interface: optimize, price, bounds, sweep, serve.

Exit codes: 0 success, 2 validation error, 3 solver/infeasibility failure.
Human-readable diagnostics go to stderr; reports and CSV to stdout or files.
"""

from __future__ import annotations

import json
import sys

import click

from . import fixture
from .claims import claim_from_json
from .errors import (DomainError, HedgeDeskError, InfeasibleHedge, ModelError,
                     QuoteError, SolverFailure, UnpriceableClaim,
                     UnsupportedClaim)
from .instruments import MarketConfig
from .session import Session, SessionConfig, parse_nu
from .sweeps import GridParams, SweepSpec, run_sweep

VALIDATION_EXIT = 2
SOLVER_EXIT = 3


def _fail(exc: Exception) -> int:
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, (DomainError, QuoteError, ModelError, UnsupportedClaim,
                        json.JSONDecodeError)):
        return VALIDATION_EXIT
    if isinstance(exc, (SolverFailure, UnpriceableClaim, InfeasibleHedge,
                        HedgeDeskError)):
        return SOLVER_EXIT
    raise exc


def session_options(fn):
    options = [
        click.option("--quotes", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="Quote CSV; omit to use the bundled synthetic market."),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="Market config key=value file."),
        click.option("--spot", type=float, default=None),
        click.option("--maturity", type=float, default=None, help="Year fraction."),
        click.option("--lend", type=float, default=None, help="Lending rate."),
        click.option("--borrow", type=float, default=None, help="Borrowing rate."),
        click.option("--mu", type=float, default=fixture.VIEW_MU),
        click.option("--sigma", type=float, default=fixture.VIEW_SIGMA),
        click.option("--nu", default=str(fixture.VIEW_NU),
                     help="Degrees of freedom; 'inf' for Gaussian."),
        click.option("--lambda", "risk_aversion", type=float, default=fixture.RISK_AVERSION),
        click.option("--wealth", type=float, default=fixture.WEALTH),
        click.option("--panels", type=int, default=100),
        click.option("--nodes-per-panel", type=int, default=25),
        click.option("--tail-mass", type=float, default=1e-6),
        click.option("--tol-price", type=float, default=None),
        click.option("--tol-solver", type=float, default=1e-10),
        click.option("--seed", type=int, default=0),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def build_session(quotes, config_path, spot, maturity, lend, borrow, mu, sigma, nu,
                  risk_aversion, wealth, panels, nodes_per_panel, tail_mass,
                  tol_price, tol_solver, seed) -> Session:
    market = None
    if quotes is not None:
        if config_path is not None:
            market = MarketConfig.from_file(config_path)
            overrides = {k: v for k, v in (("spot", spot), ("maturity_years", maturity),
                                           ("lend_rate", lend), ("borrow_rate", borrow))
                         if v is not None}
            if overrides:
                from dataclasses import replace

                market = replace(market, **overrides)
        else:
            missing = [name for name, v in (("--spot", spot), ("--maturity", maturity),
                                            ("--lend", lend), ("--borrow", borrow))
                       if v is None]
            if missing:
                raise DomainError(f"--quotes needs {', '.join(missing)} or --config")
            market = MarketConfig(spot=spot, maturity_years=maturity,
                                  lend_rate=lend, borrow_rate=borrow)
    config = SessionConfig(
        quotes_path=quotes,
        market=market,
        mu=mu, sigma=sigma, nu=parse_nu(nu),
        risk_aversion=risk_aversion, wealth=wealth,
        grid_params=GridParams(panels, nodes_per_panel, tail_mass),
        price_tol=tol_price, solver_tol=tol_solver, seed=seed,
    )
    return Session(config)


def _load_json_arg(raw: str) -> dict:
    """Inline JSON, or @path to read it from a file."""
    if raw.startswith("@"):
        with open(raw[1:]) as fh:
            return json.load(fh)
    return json.loads(raw)


def _print_portfolio(portfolio, min_units: float = 1e-6):
    rows = list(portfolio.rows(min_units))
    if not rows:
        click.echo("  (flat)")
        return
    click.echo(f"  {'instrument':<12} {'net units':>14}  side")
    for instrument_id, net, side in rows:
        click.echo(f"  {instrument_id:<12} {net:>14.4f}  {side}")


@click.group()
def main():
    """Static-hedging and indifference-pricing desk engine."""


@main.command()
@session_options
def optimize(**kwargs):
    """Solve the baseline portfolio problem and report the optimum."""
    try:
        session = build_session(**kwargs)
        engine = session.engine()
        result = engine.baseline_result
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        sys.exit(_fail(exc))
    click.echo(f"instruments     : {len(session.book.instruments)}")
    click.echo(f"objective       : {result.objective!r}")
    click.echo(f"entropic risk   : {result.entropic_risk!r}")
    click.echo(f"budget slack    : {result.budget_slack:.6g}")
    click.echo(f"kkt residual    : {result.kkt_residual:.3e}")
    click.echo("portfolio:")
    _print_portfolio(result.portfolio)


@main.command()
@session_options
@click.argument("claim_json")
@click.option("--exclude-from-hedging", is_flag=True, default=False,
              help="Drop the quoted twin of the claim from the hedging set.")
def price(claim_json, exclude_from_hedging, **kwargs):
    """Indifference buy/sell prices for CLAIM_JSON (inline or @file)."""
    try:
        session = build_session(**kwargs)
        claim = claim_from_json(_load_json_arg(claim_json))
        engine = session.engine()
        result = engine.price(claim, price_tol=session.config.price_tol,
                              exclude_from_hedging=exclude_from_hedging)
    except Exception as exc:  # noqa: BLE001
        sys.exit(_fail(exc))
    click.echo(f"sell price      : {result.sell_price!r}")
    click.echo(f"buy price       : {result.buy_price!r}")
    click.echo(f"price tolerance : {result.price_tol!r}")
    click.echo(f"baseline risk   : {result.baseline_risk!r}")
    click.echo(f"bisections      : {result.iterations}")
    click.echo("hedge (sell side):")
    _print_portfolio(result.hedge_sell, min_units=1e-4)
    click.echo("hedge (buy side):")
    _print_portfolio(result.hedge_buy, min_units=1e-4)


@main.command()
@session_options
@click.argument("claim_json")
@click.option("--interval", nargs=2, type=float, default=(100.0, 5000.0),
              help="Dominance interval (lo hi).")
def bounds(claim_json, interval, **kwargs):
    """Super/subhedging costs for CLAIM_JSON on the interval."""
    try:
        session = build_session(**kwargs)
        claim = claim_from_json(_load_json_arg(claim_json))
        engine = session.engine()
        inf_res, sup_res = engine.hedge_bounds(claim, tuple(interval))
    except Exception as exc:  # noqa: BLE001
        sys.exit(_fail(exc))
    click.echo(f"subhedge cost   : {inf_res.cost!r}")
    click.echo(f"superhedge cost : {sup_res.cost!r}")
    click.echo(f"verification    : sub {inf_res.verification_margin:.3e}, "
               f"sup {sup_res.verification_margin:.3e}")
    click.echo("superhedge portfolio:")
    _print_portfolio(sup_res.portfolio, min_units=1e-4)


@main.command()
@session_options
@click.argument("spec_json")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="CSV output path.")
@click.option("--workers", type=int, default=4)
def sweep(spec_json, out, workers, **kwargs):
    """Run a sensitivity sweep from SPEC_JSON and write a CSV.

    Spec fields: parameter (sigma | lambda | initial_position_units |
    multiplier | mu_sigma_grid), values (or mu_values + sigma_values),
    claim, target (claim | portfolio-risk).
    """
    try:
        session = build_session(**kwargs)
        spec_obj = _load_json_arg(spec_json)
        parameter = spec_obj.get("parameter")
        if parameter == "mu_sigma_grid":
            values = (tuple(spec_obj.get("mu_values", ())),
                      tuple(spec_obj.get("sigma_values", ())))
        else:
            values = tuple(spec_obj.get("values", ()))
        claim = None
        if spec_obj.get("claim") is not None:
            claim = claim_from_json(spec_obj["claim"])
        spec = SweepSpec(parameter=parameter, values=values, claim=claim,
                         target=spec_obj.get("target", "claim"))
        result = run_sweep(session.sweep_context(), spec, max_workers=workers)
        result.write_csv(out)
    except Exception as exc:  # noqa: BLE001
        sys.exit(_fail(exc))
    failures = sum(1 for row in result.rows if row.status != "ok")
    click.echo(f"wrote {len(result.rows)} rows to {out}"
               + (f" ({failures} failed points)" if failures else ""))
    if failures:
        sys.exit(SOLVER_EXIT)


@main.command()
@session_options
@click.option("--bind", default="127.0.0.1:8750", help="ADDR:PORT to listen on.")
def serve(bind, **kwargs):
    """Run the JSON service for scripts and the what-if desk UI."""
    try:
        session = build_session(**kwargs)
        host, _, port_text = bind.rpartition(":")
        port = int(port_text)
        if not host:
            raise DomainError(f"--bind must be ADDR:PORT, got {bind!r}")
    except Exception as exc:  # noqa: BLE001
        sys.exit(_fail(exc))
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(session), host=host, port=port, log_level="info")


@main.command("fixture-csv")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--sample", is_flag=True, default=False,
              help="Write the three-instrument sample book instead.")
@click.option("--spread-pct", type=float, default=0.01)
def fixture_csv(out, sample, spread_pct):
    """Write the bundled synthetic (or sample) quote book as CSV."""
    try:
        if sample:
            fixture.write_sample_csv(out)
        else:
            fixture.write_fixture_csv(out, spread_pct=spread_pct)
    except Exception as exc:  # noqa: BLE001
        sys.exit(_fail(exc))
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
