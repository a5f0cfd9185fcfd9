import math

import numpy as np
import pytest

from hedgedesk.claims import CallClaim, DigitalClaim
from hedgedesk.errors import DomainError
from hedgedesk.pricing import PricingEngine
from hedgedesk.scenarios import ViewModel, build_grid
from hedgedesk.solver import SplitPortfolio
from hedgedesk.sweeps import (GridParams, SweepContext, SweepSpec,
                              payoff_distribution, run_sweep)

GRID_PARAMS = GridParams(panels=20, nodes_per_panel=10)


@pytest.fixture(scope="module")
def context(book, view_model, prefs):
    return SweepContext(book=book, model=view_model, prefs=prefs,
                        grid_params=GRID_PARAMS, price_tol=1.0)


class TestSpecValidation:
    def test_unknown_parameter(self):
        with pytest.raises(DomainError):
            SweepSpec(parameter="gamma", values=(1.0,))

    def test_unsorted_values(self):
        with pytest.raises(DomainError):
            SweepSpec(parameter="lambda", values=(2.0, 1.0),
                      claim=CallClaim(2050.0))

    def test_claim_required_for_claim_target(self):
        with pytest.raises(DomainError):
            SweepSpec(parameter="lambda", values=(1.0, 2.0))

    def test_mu_sigma_grid_values(self):
        spec = SweepSpec(parameter="mu_sigma_grid",
                         values=((0.0, 0.01), (0.05, 0.08)),
                         target="portfolio-risk")
        assert spec.values == ((0.0, 0.01), (0.05, 0.08))


class TestRunSweep:
    def test_deterministic_csv(self, context):
        spec = SweepSpec(parameter="lambda", values=(1.0, 2.0),
                         claim=DigitalClaim(2050.0, 10_000.0))
        first = run_sweep(context, spec).to_csv()
        second = run_sweep(context, spec).to_csv()
        assert first == second

    def test_single_point_matches_direct_call(self, context, book, view_model,
                                              prefs):
        claim = DigitalClaim(2050.0, 10_000.0)
        spec = SweepSpec(parameter="lambda", values=(2.0,), claim=claim)
        row = run_sweep(context, spec).rows[0]
        grid = build_grid(view_model, GRID_PARAMS.panels,
                          GRID_PARAMS.nodes_per_panel, GRID_PARAMS.tail_mass)
        direct = PricingEngine(book, grid, prefs).price(claim, price_tol=1.0)
        assert row.sell_price == pytest.approx(direct.sell_price, abs=1.0)
        assert row.buy_price == pytest.approx(direct.buy_price, abs=1.0)

    def test_lambda_sweep_widens_spread(self, context):
        spec = SweepSpec(parameter="lambda", values=(1.0, 4.0),
                         claim=DigitalClaim(2050.0, 10_000.0))
        rows = run_sweep(context, spec).rows
        spreads = [r.sell_price - r.buy_price for r in rows]
        assert spreads[1] >= spreads[0] - 2.0

    def test_sigma_sweep_continuity(self, context):
        spec = SweepSpec(parameter="sigma",
                         values=(0.05, 0.0554, 0.06, 0.065),
                         claim=CallClaim(2050.0))
        rows = run_sweep(context, spec).rows
        sells = [r.sell_price for r in rows]
        gaps = np.diff(spec.values)
        for i in range(1, len(sells) - 1):
            local = max(abs(sells[i] - sells[i - 1]), abs(sells[i + 1] - sells[i]))
            secant = abs(sells[i + 1] - sells[i - 1]) / (gaps[i - 1] + gaps[i])
            assert local <= 10.0 * secant * max(gaps) + 2 * context.price_tol

    def test_mu_sigma_grid_risk_surface(self, book, prefs):
        gaussian = ViewModel(mu=0.0, sigma=0.0554, nu=math.inf, spot=book.spot)
        context = SweepContext(book=book, model=gaussian, prefs=prefs,
                               grid_params=GRID_PARAMS)
        mu_axis = (-0.1, -0.05, 0.0, 0.05, 0.1)
        sigma_axis = (0.04, 0.06, 0.08, 0.1, 0.12)
        spec = SweepSpec(parameter="mu_sigma_grid",
                         values=(mu_axis, sigma_axis),
                         target="portfolio-risk")
        result = run_sweep(context, spec)
        assert result.two_dimensional
        assert len(result.rows) == 25
        assert all(math.isfinite(r.entropic_risk) for r in result.rows)
        assert all(r.sell_price is None for r in result.rows)
        header = result.to_csv().splitlines()[0]
        assert header == "param_1,param_2,sell_price,buy_price,entropic_risk,status"
        # soft diagnostic: the risk surface tends to be concave along each
        # axis; report second-difference violations without failing on them
        surface = np.array([r.entropic_risk for r in result.rows]).reshape(5, 5)
        bumps = 0
        for axis_values in (surface, surface.T):
            for line in axis_values:
                second = np.diff(line, 2)
                bumps += int(np.sum(second > 1e-6))
        print(f"risk-surface convexity violations (diagnostic): {bumps}/30")

    def test_rows_keep_input_order(self, context):
        spec = SweepSpec(parameter="lambda", values=(1.0, 2.0, 3.0),
                         claim=DigitalClaim(2050.0, 10_000.0))
        rows = run_sweep(context, spec, max_workers=3).rows
        assert [r.params[0] for r in rows] == [1.0, 2.0, 3.0]

    def test_failed_points_marked_not_dropped(self, context):
        # a sigma of zero is invalid at grid construction, so that point must
        # surface as an error row while its neighbor still prices
        spec = SweepSpec(parameter="sigma", values=(0.0, 0.0554),
                         claim=DigitalClaim(2050.0, 10_000.0))
        rows = run_sweep(context, spec).rows
        assert len(rows) == 2
        assert rows[0].status == "error:ModelError"
        assert rows[0].sell_price is None
        assert rows[1].status == "ok"
        csv_lines = ",".join(
            run_sweep(context, spec).to_csv().splitlines())
        assert "error:ModelError" in csv_lines

    def test_initial_position_rebinds_baseline(self, context):
        claim = CallClaim(2050.0)
        spec = SweepSpec(parameter="initial_position_units", values=(-5.0, 5.0),
                         claim=claim)
        rows = run_sweep(context, spec).rows
        assert rows[0].status == rows[1].status == "ok"
        assert rows[1].sell_price >= rows[0].sell_price - 2 * context.price_tol


class TestPayoffDistribution:
    def test_zero_portfolio_degenerate(self, book, view_model):
        portfolio = SplitPortfolio.from_net(book.ids, np.zeros(len(book.ids)))
        samples = payoff_distribution(book, portfolio, view_model, 10_000, seed=1)
        assert np.all(samples == 0.0)

    def test_unit_cash_deterministic(self, book, view_model):
        net = np.zeros(len(book.ids))
        net[book.ids.index("CASH")] = 1.0
        portfolio = SplitPortfolio.from_net(book.ids, net)
        samples = payoff_distribution(book, portfolio, view_model, 10_000, seed=1)
        assert np.allclose(samples, math.exp(0.0043 * 0.19))

    def test_minimum_samples_enforced(self, book, view_model):
        portfolio = SplitPortfolio.from_net(book.ids, np.zeros(len(book.ids)))
        with pytest.raises(DomainError):
            payoff_distribution(book, portfolio, view_model, 999, seed=1)

    def test_binned_output(self, book, view_model):
        net = np.zeros(len(book.ids))
        net[book.ids.index("C2050")] = 10.0
        portfolio = SplitPortfolio.from_net(book.ids, net)
        edges, counts = payoff_distribution(book, portfolio, view_model,
                                            20_000, seed=3, bins=25)
        assert edges.size == 26 and counts.sum() == 20_000

    def test_deterministic_given_seed(self, book, view_model):
        net = np.zeros(len(book.ids))
        net[book.ids.index("P2050")] = -3.0
        portfolio = SplitPortfolio.from_net(book.ids, net)
        a = payoff_distribution(book, portfolio, view_model, 10_000, seed=9)
        b = payoff_distribution(book, portfolio, view_model, 10_000, seed=9)
        assert np.array_equal(a, b)

    def test_higher_risk_aversion_lifts_left_tail(self, view_model):
        from hedgedesk.fixture import synthetic_book
        from hedgedesk.solver import Preferences, assemble, solve

        # moderate depths keep positions small enough that the sampled
        # payoff matches the grid payoff between nodes; at full depth the
        # optimizer parks depth-capped tail positions whose kinks fall
        # between the sparse extreme-panel nodes
        book = synthetic_book(depth_lots=5.0)
        grid = build_grid(view_model)
        tails = {}
        for lam in (2.0, 6.0):
            result = solve(assemble(book, grid,
                                    Preferences(100_000.0, lam)))
            samples = payoff_distribution(book, result.portfolio, view_model,
                                          200_000, seed=5)
            tails[lam] = np.quantile(samples, 0.01)
        assert tails[6.0] > tails[2.0]
