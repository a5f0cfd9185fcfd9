import itertools
import math

import numpy as np
import pytest

from conftest import make_book
from hedgedesk.bounds import (constraint_grid, subhedge, superhedge,
                              verify_dominance)
from hedgedesk.claims import (CallClaim, ConstantClaim, DigitalClaim,
                              LogForward, PiecewiseLinearClaim, PutClaim,
                              QuadraticForward, ScaledClaim)
from hedgedesk.errors import InfeasibleHedge
from hedgedesk.instruments import payoff_unit_long, payoff_unit_short
from hedgedesk.solver import SplitPortfolio


def lp_matrices(book, levels):
    """Split payoff matrix, costs, and upper bounds for an explicit grid."""
    n = len(book.instruments)
    payoffs = np.empty((len(levels), 2 * n))
    cost = np.empty(2 * n)
    upper = np.empty(2 * n)
    for j, instr in enumerate(book.instruments):
        q = book.quote_for(instr.id)
        payoffs[:, j] = payoff_unit_long(instr, np.asarray(levels), book.maturity)
        payoffs[:, n + j] = payoff_unit_short(instr, np.asarray(levels), book.maturity)
        cost[j] = q.ask_price
        cost[n + j] = -q.bid_price
        upper[j] = q.ask_depth
        upper[n + j] = q.bid_depth
    return payoffs, cost, upper


def vertex_enumeration_cost(book, claim, levels):
    """Exhaustive vertex enumeration of {z : P z >= c, 0 <= z <= u}.

    Stacks every choice of n active rows from (lower bounds, finite upper
    bounds, dominance rows), solves the square systems in a batch, filters
    feasible solutions, and returns the minimum entry cost. Independent of
    the LP code path.
    """
    payoffs, cost, upper = lp_matrices(book, levels)
    target = claim.payoff(np.asarray(levels))
    n = cost.size
    rows = []
    rhs = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e)
        rhs.append(0.0)
        if np.isfinite(upper[i]):
            rows.append(e.copy())
            rhs.append(upper[i])
    for k in range(len(levels)):
        rows.append(payoffs[k])
        rhs.append(target[k])
    rows = np.asarray(rows)
    rhs = np.asarray(rhs)
    combos = np.array(list(itertools.combinations(range(len(rows)), n)))
    mats = rows[combos]
    vecs = rhs[combos]
    dets = np.linalg.det(mats)
    keep = np.abs(dets) > 1e-9 * np.abs(mats).max()
    solutions = np.linalg.solve(mats[keep], vecs[keep][..., None])[..., 0]
    feasible = np.all(solutions >= -1e-9, axis=1)
    finite = np.isfinite(upper)
    feasible &= np.all(solutions[:, finite] <= upper[finite] + 1e-9, axis=1)
    feasible &= np.all(solutions @ payoffs.T >= target - 1e-7, axis=1)
    assert feasible.any(), "no feasible vertex found"
    return float(np.min(solutions[feasible] @ cost))


@pytest.fixture(scope="module")
def two_option_book():
    return make_book([
        ("C2000", "call", 2000.0, 95.0, 99.0, 3.0, 3.0),
        ("P2100", "put", 2100.0, 80.0, 84.0, 3.0, 3.0),
    ])


@pytest.fixture(scope="module")
def three_option_book():
    return make_book([
        ("C2000", "call", 2000.0, 95.0, 99.0, 3.0, 3.0),
        ("C2200", "call", 2200.0, 22.0, 24.0, 3.0, 3.0),
        ("P2100", "put", 2100.0, 80.0, 84.0, 3.0, 3.0),
    ])


class TestSuperhedge:
    def test_direct_purchase_bounds_cost(self, sample_book):
        claim = CallClaim(2095.0)
        result = superhedge(sample_book, claim)
        assert result.cost <= 28.20 + 1e-9
        assert result.verification_margin >= -1e-6 * 3000

    def test_cash_only_constant(self, cash_only_book):
        result = superhedge(cash_only_book, ConstantClaim(100.0))
        assert result.cost == pytest.approx(100.0 * math.exp(-0.0043 * 0.19),
                                            rel=1e-9)

    def test_definitional_symmetry_exact(self, sample_book):
        for claim in (CallClaim(2095.0), PutClaim(2095.0),
                      DigitalClaim(2095.0, 100.0)):
            sup_of_neg = superhedge(sample_book, ScaledClaim(-1.0, claim))
            sub = subhedge(sample_book, claim)
            assert sub.cost == -sup_of_neg.cost

    def test_returned_hedge_dominates(self, book):
        claim = QuadraticForward(2050.0)
        result = superhedge(book, claim)
        margin = verify_dominance(book, result.portfolio, claim,
                                  grid_points=20_000)
        scale = (5000.0 - 2050.0) ** 2
        assert margin >= -1e-6 * (1.0 + scale)

    def test_subhedge_of_convex_claim_verified(self, book):
        claim = QuadraticForward(2050.0)
        result = subhedge(book, claim)
        scale = (5000.0 - 2050.0) ** 2
        assert result.verification_margin >= -1e-6 * (1.0 + scale)

    def test_log_forward_bounds_ordered(self, book):
        claim = LogForward(2050.0, 100_000.0)
        sup = superhedge(book, claim)
        sub = subhedge(book, claim)
        assert sub.cost <= sup.cost

    def test_depth_growth_tightens_bounds(self, three_option_book):
        claim = PiecewiseLinearClaim((1900.0, 2100.0, 2300.0), (0.0, 150.0, 0.0))
        small = superhedge(three_option_book, claim)
        big_book = three_option_book.with_depth_scale(4.0)
        big = superhedge(big_book, claim)
        assert big.cost <= small.cost + 1e-9
        assert (subhedge(big_book, claim).cost
                >= subhedge(three_option_book, claim).cost - 1e-9)

    def test_scaling_worsens_per_unit_cost(self, three_option_book):
        claim = CallClaim(2100.0)
        costs = {}
        for mult in (1.0, 2.0):
            res = superhedge(three_option_book, ScaledClaim(mult, claim))
            costs[mult] = res.cost / mult
        assert costs[2.0] >= costs[1.0] - 1e-9

    def test_infeasible_report_exposes_region(self, two_option_book):
        # with unlimited cash any bounded claim is dominated on a compact
        # interval, so drive the reporter directly with capped positions
        from hedgedesk.bounds import _report_infeasible

        grid = np.array([1900.0, 2100.0])
        payoffs, cost, upper = lp_matrices(two_option_book, grid)
        upper = np.minimum(upper, 1.0)  # cap even the cash legs
        target = DigitalClaim(2050.0, 1e9).payoff(grid)
        with pytest.raises(InfeasibleHedge) as err:
            _report_infeasible(two_option_book, None, grid, payoffs, cost,
                               upper, target)
        assert err.value.best_slack is not None
        assert err.value.best_slack < 0
        assert 2100.0 in err.value.violating_region

    def test_digital_jump_anchors_present(self, book):
        claim = DigitalClaim(2050.0, 10_000.0)
        grid = constraint_grid(book, claim, (100.0, 5000.0))
        eps = 1e-6 * 2050.0
        assert np.any(np.isclose(grid, 2050.0))
        assert np.any(np.isclose(grid, 2050.0 - eps))


class TestVertexOracle:
    GRID = [1900.0, 2000.0, 2100.0, 2200.0, 2400.0]

    @pytest.mark.parametrize("claim", [
        CallClaim(2050.0),
        PutClaim(2150.0),
        PiecewiseLinearClaim((1950.0, 2150.0, 2350.0), (10.0, 120.0, -30.0)),
    ])
    def test_two_options(self, two_option_book, claim):
        lp = superhedge(two_option_book, claim, grid_override=self.GRID)
        oracle = vertex_enumeration_cost(two_option_book, claim, self.GRID)
        assert lp.cost == pytest.approx(oracle, abs=1e-8)

    def test_three_options(self, three_option_book):
        claim = CallClaim(2050.0)
        lp = superhedge(three_option_book, claim, grid_override=self.GRID)
        oracle = vertex_enumeration_cost(three_option_book, claim, self.GRID)
        assert lp.cost == pytest.approx(oracle, abs=1e-8)


class TestVerifyDominance:
    def test_exact_replication_has_zero_slack(self, sample_book):
        claim = CallClaim(2095.0)
        ids = sample_book.ids
        net = np.zeros(len(ids))
        net[ids.index("C2095")] = 1.0
        portfolio = SplitPortfolio.from_net(ids, net)
        slack = verify_dominance(sample_book, portfolio, claim)
        assert abs(slack) <= 1e-9

    def test_empty_portfolio_against_digital(self, sample_book):
        claim = DigitalClaim(2095.0, 10_000.0)
        portfolio = SplitPortfolio.from_net(sample_book.ids,
                                            np.zeros(len(sample_book.ids)))
        assert verify_dominance(sample_book, portfolio, claim) == -10_000.0

    def test_grid_points_floor(self, sample_book):
        portfolio = SplitPortfolio.from_net(sample_book.ids,
                                            np.zeros(len(sample_book.ids)))
        with pytest.raises(Exception):
            verify_dominance(sample_book, portfolio, CallClaim(2095.0),
                             grid_points=10)
