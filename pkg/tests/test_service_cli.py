import json
import math
import threading

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from hedgedesk.cli import main as cli_main
from hedgedesk.service import create_app
from hedgedesk.session import Session, SessionConfig, parse_nu
from hedgedesk.sweeps import GridParams

FAST_GRID = GridParams(panels=20, nodes_per_panel=10)
DIGITAL = {"kind": "digital", "strike": 2050, "amount": 10000}


@pytest.fixture(scope="module")
def session():
    return Session(SessionConfig(grid_params=FAST_GRID, price_tol=1.0))


@pytest.fixture(scope="module")
def client(session):
    return TestClient(create_app(session))


@pytest.fixture()
def runner():
    return CliRunner()


def fast_args(extra=()):
    return ["--panels", "20", "--nodes-per-panel", "10", *extra]


class TestParseNu:
    def test_values(self):
        assert parse_nu("inf") == math.inf
        assert parse_nu("4.8355") == 4.8355
        assert parse_nu(7) == 7.0
        with pytest.raises(Exception):
            parse_nu("seven")


class TestCli:
    def test_optimize_sample_book(self, runner, tmp_path):
        quotes = tmp_path / "quotes.csv"
        quotes.write_text(
            "ticker,type,strike,bid_qty_lots,bid,ask,ask_qty_lots\n"
            "ESM6,forward,,258,2048.75,2049,377\n"
            "SPXC2095,call,2095,623,26.90,28.20,506\n"
            "SPXP2095,put,2095,27,72.60,74.70,22\n")
        result = runner.invoke(cli_main, [
            "optimize", "--quotes", str(quotes), "--spot", "2056.32",
            "--maturity", "0.19", "--lend", "0.0043", "--borrow", "0.03",
            *fast_args()])
        assert result.exit_code == 0, result.output
        assert "instruments     : 4" in result.output
        assert "entropic risk" in result.output
        assert "CASH" in result.output

    def test_price_zero_claim(self, runner):
        result = runner.invoke(cli_main, [
            "price", *fast_args(), '{"kind": "constant", "value": 0}'])
        assert result.exit_code == 0, result.output
        sell = float(result.output.split("sell price      : ")[1].splitlines()[0])
        buy = float(result.output.split("buy price       : ")[1].splitlines()[0])
        assert abs(sell) <= 1e-4
        assert abs(buy) <= 1e-4

    def test_bounds_quoted_call_below_ask(self, runner, session):
        result = runner.invoke(cli_main, [
            "bounds", *fast_args(), '{"kind": "call", "strike": 2050}'])
        assert result.exit_code == 0, result.output
        sup = float(result.output.split("superhedge cost : ")[1].splitlines()[0])
        ask = session.book.quote_for("C2050").ask_price
        assert sup <= ask + 1e-9

    def test_validation_error_exit_code(self, runner):
        result = runner.invoke(cli_main, [
            "price", *fast_args(), '{"kind": "unobtainium"}'])
        assert result.exit_code == 2

    def test_malformed_quote_file_exit_code(self, runner, tmp_path):
        quotes = tmp_path / "bad.csv"
        quotes.write_text(
            "ticker,type,strike,bid_qty_lots,bid,ask,ask_qty_lots\n"
            "X,call,2095,1,74.70,72.60,1\n")
        result = runner.invoke(cli_main, [
            "optimize", "--quotes", str(quotes), "--spot", "2056.32",
            "--maturity", "0.19", "--lend", "0.0043", "--borrow", "0.03"])
        assert result.exit_code == 2
        assert "error" in result.output or result.exception is not None

    def test_quotes_require_market_config(self, runner, tmp_path):
        quotes = tmp_path / "q.csv"
        quotes.write_text("ticker,type,strike,bid_qty_lots,bid,ask,ask_qty_lots\n")
        result = runner.invoke(cli_main, ["optimize", "--quotes", str(quotes)])
        assert result.exit_code == 2

    def test_sweep_writes_csv(self, runner, tmp_path):
        out = tmp_path / "sweep.csv"
        spec = json.dumps({"parameter": "lambda", "values": [1, 2],
                           "claim": DIGITAL})
        result = runner.invoke(cli_main, [
            "sweep", *fast_args(["--tol-price", "2.0"]), spec,
            "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "param_1,sell_price,buy_price,entropic_risk,status"
        assert len(lines) == 3
        assert all(line.endswith(",ok") for line in lines[1:])

    def test_fixture_csv_round_trips(self, runner, tmp_path):
        out = tmp_path / "book.csv"
        result = runner.invoke(cli_main, ["fixture-csv", "--out", str(out)])
        assert result.exit_code == 0
        check = runner.invoke(cli_main, [
            "optimize", "--quotes", str(out), "--spot", "2056.32",
            "--maturity", "0.19", "--lend", "0.0043", "--borrow", "0.03",
            *fast_args()])
        assert check.exit_code == 0, check.output


class TestService:
    def test_market_summary(self, client, session):
        response = client.get("/market")
        assert response.status_code == 200
        body = response.json()
        assert body["instrument_count"] == len(session.book.instruments)
        assert body["option_count"] == 82
        assert body["spread_stats"]["mean_rel"] == pytest.approx(0.01, rel=1e-6)
        cash_row = next(r for r in body["instruments"] if r["kind"] == "cash")
        assert cash_row["bid_depth"] is None

    def test_solve_baseline(self, client):
        response = client.post("/solve", json={})
        assert response.status_code == 200
        body = response.json()
        assert body["converged"] is True
        assert body["kkt_residual"] <= 1e-8
        assert body["budget_slack"] >= -1e-3

    def test_price_digital(self, client):
        response = client.post("/price", json={"claim": DIGITAL})
        assert response.status_code == 200
        body = response.json()
        assert body["buy_price"] <= body["sell_price"] + 2 * body["price_tol"]
        assert body["subhedge_cost"] <= body["buy_price"] + 2 * body["price_tol"]
        assert body["sell_price"] <= body["superhedge_cost"] + 2 * body["price_tol"]
        assert body["hedge_sell"], "expected a nonempty hedge"

    def test_solve_with_view_override(self, client):
        base = client.post("/solve", json={}).json()
        bumped = client.post("/solve", json={
            "view": {"sigma": 0.08}}).json()
        assert bumped["entropic_risk"] != pytest.approx(base["entropic_risk"],
                                                        abs=1e-6)

    def test_gaussian_nu_string(self, client):
        response = client.post("/solve", json={"view": {"nu": "inf"}})
        assert response.status_code == 200

    def test_bounds_endpoint(self, client, session):
        response = client.post("/bounds", json={
            "claim": {"kind": "call", "strike": 2050}})
        assert response.status_code == 200
        body = response.json()
        assert body["subhedge"]["cost"] <= body["superhedge"]["cost"]
        assert body["superhedge"]["cost"] <= session.book.quote_for("C2050").ask_price + 1e-9

    def test_malformed_claim_field_message(self, client):
        response = client.post("/price", json={"claim": {"kind": "digital",
                                                         "strike": 2050}})
        assert response.status_code == 400
        assert "amount" in response.json()["detail"]

    def test_validation_error_is_400(self, client):
        response = client.post("/price", json={"claim": DIGITAL,
                                               "price_tol": -1.0})
        assert response.status_code == 400

    def test_unpriceable_is_422(self, client, monkeypatch):
        # unbounded cash makes every bounded claim priceable in practice, so
        # drive the capacity-error mapping directly
        from hedgedesk.errors import UnpriceableClaim
        from hedgedesk.pricing import PricingEngine

        def boom(self, *args, **kwargs):
            raise UnpriceableClaim("claim risk exceeds market capacity")

        monkeypatch.setattr(PricingEngine, "price", boom)
        response = client.post("/price", json={
            "claim": {"kind": "digital", "strike": 1234.5, "amount": 10},
            "include_bounds": False})
        assert response.status_code == 422
        assert response.json()["error"] == "UnpriceableClaim"

    def test_solver_failure_is_500(self, client, monkeypatch):
        from hedgedesk.errors import SolverFailure
        from hedgedesk.pricing import PricingEngine

        def boom(self, *args, **kwargs):
            raise SolverFailure("no certificate")

        monkeypatch.setattr(PricingEngine, "price", boom)
        response = client.post("/price", json={
            "claim": {"kind": "call", "strike": 1234.25},
            "include_bounds": False})
        assert response.status_code == 500

    def test_sweep_endpoint_csv(self, client):
        body = {"parameter": "lambda", "values": [1, 2], "claim": DIGITAL,
                "price_tol": 2.0}
        response = client.post("/sweep", json=body)
        assert response.status_code == 200
        payload = response.json()
        assert len(payload["rows"]) == 2
        again = client.post("/sweep", json=body).json()
        assert again["csv"] == payload["csv"]

    def test_distribution_explicit_portfolio(self, client):
        response = client.post("/distribution", json={
            "portfolio": [{"id": "C2050", "net_units": 10}],
            "n": 20000, "bins": 15, "seed": 4})
        assert response.status_code == 200
        body = response.json()
        assert len(body["bin_edges"]) == 16
        assert sum(body["counts"]) == 20000

    def test_distribution_unknown_id(self, client):
        response = client.post("/distribution", json={
            "portfolio": [{"id": "NOPE", "net_units": 1}], "n": 20000})
        assert response.status_code == 400

    def test_cli_and_service_agree(self, client, session):
        payload = client.post("/price", json={"claim": DIGITAL,
                                              "include_bounds": False}).json()
        from hedgedesk.claims import claim_from_json

        engine = session.engine()
        direct = engine.price(claim_from_json(DIGITAL),
                              price_tol=session.config.price_tol)
        assert payload["sell_price"] == direct.sell_price
        assert payload["buy_price"] == direct.buy_price

    def test_concurrent_requests_match_serial(self, client):
        claims = [
            {"kind": "digital", "strike": 2030, "amount": 10000},
            {"kind": "call", "strike": 2010},
            {"kind": "put", "strike": 2090},
            {"kind": "constant", "value": 500},
        ]
        serial = [client.post("/price", json={"claim": c, "price_tol": 1.0,
                                              "include_bounds": False}).json()
                  for c in claims]
        results = [None] * 32
        def hit(i):
            body = {"claim": claims[i % 4], "price_tol": 1.0,
                    "include_bounds": False}
            results[i] = client.post("/price", json=body).json()
        threads = [threading.Thread(target=hit, args=(i,)) for i in range(32)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for i, payload in enumerate(results):
            expected = serial[i % 4]
            assert payload["sell_price"] == expected["sell_price"]
            assert payload["buy_price"] == expected["buy_price"]
