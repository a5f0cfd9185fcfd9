"""Convex portfolio optimization under exponential loss.

The position in each instrument is split into nonnegative long and short
units so that bid/ask-asymmetric payoffs and entry costs become linear in
the decision vector. The resulting problem

    minimize  sum_k w_k exp(coef * (c_k - (P z)_k))
    s.t.      cost . z <= wealth,   0 <= z <= depth

is solved in log space (the entropic objective, a smooth convex
log-sum-exp) by a path-following log-barrier Newton method. The one linear
budget row plus box structure keeps every Newton system dense, small, and
Cholesky-friendly; the barrier parameter doubles as a duality-gap
certificate for the returned optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .claims import ClaimSpec
from .errors import AssemblyError, SolverFailure
from .instruments import Cash, QuoteBook, payoff_unit_long, payoff_unit_short
from .scenarios import ScenarioGrid


@dataclass(frozen=True)
class Preferences:
    """Initial wealth and exponential risk aversion.

    ``scale_wealth`` is the wealth that normalizes the loss exponent; it is
    frozen at the baseline wealth so that perturbing the budget during
    indifference pricing does not change the preference order.
    """

    wealth: float
    risk_aversion: float
    scale_wealth: float | None = None

    def __post_init__(self):
        if self.scale_wealth is None:
            object.__setattr__(self, "scale_wealth", self.wealth)
        if not self.wealth > 0:
            raise AssemblyError("wealth must be positive")
        if not self.risk_aversion > 0:
            raise AssemblyError("risk aversion must be positive")
        if not self.scale_wealth > 0:
            raise AssemblyError("scale wealth must be positive")

    def with_wealth(self, wealth: float) -> "Preferences":
        """New budget, same risk aversion and frozen exponent scale."""
        return replace(self, wealth=wealth)


@dataclass(frozen=True)
class Liability:
    """Random amount of cash owed at maturity: a signed claim combination."""

    components: tuple = ()

    def payoff(self, nodes) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=float)
        total = np.zeros_like(nodes)
        for claim, quantity in self.components:
            total += quantity * claim.payoff(nodes)
        return total

    def plus(self, claim: ClaimSpec, quantity: float = 1.0) -> "Liability":
        if quantity == 0.0:
            return self
        return Liability(self.components + ((claim, float(quantity)),))

    @property
    def is_zero(self) -> bool:
        return all(q == 0.0 for _, q in self.components)

    @staticmethod
    def zero() -> "Liability":
        return Liability()


@dataclass
class SplitPortfolio:
    """Nonnegative long/short unit positions per instrument."""

    ids: tuple
    long: np.ndarray
    short: np.ndarray

    def __post_init__(self):
        self.long = np.asarray(self.long, dtype=float)
        self.short = np.asarray(self.short, dtype=float)
        if not (len(self.ids) == self.long.size == self.short.size):
            raise AssemblyError("ids, long, and short must have matching lengths")

    @property
    def net(self) -> np.ndarray:
        return self.long - self.short

    @staticmethod
    def from_net(ids, net) -> "SplitPortfolio":
        net = np.asarray(net, dtype=float)
        return SplitPortfolio(tuple(ids), np.maximum(net, 0.0), np.maximum(-net, 0.0))

    def support(self, threshold: float = 1.0) -> int:
        """Number of instruments with |net position| above the threshold."""
        return int(np.sum(np.abs(self.net) > threshold))

    def rows(self, min_units: float = 0.0):
        for i, instrument_id in enumerate(self.ids):
            net = self.net[i]
            if abs(net) > min_units:
                yield instrument_id, float(net), ("long" if net > 0 else "short")


class Problem:
    """Assembled split-form instance; immutable arrays, cheap wealth rebinds."""

    def __init__(self, book, grid, prefs, liability, payoffs, claim_values, cost, upper):
        self.book = book
        self.grid = grid
        self.prefs = prefs
        self.liability = liability
        self.payoffs = payoffs  # (n_scenarios, 2 * n_instruments), C-contiguous
        self.claim_values = claim_values
        self.cost = cost
        self.upper = upper
        self.coef = prefs.risk_aversion / prefs.scale_wealth
        self.shift = self.coef * claim_values + np.log(grid.weights)
        self.wealth = prefs.wealth

    @property
    def n_instruments(self) -> int:
        return len(self.book.instruments)

    @property
    def n_variables(self) -> int:
        return 2 * self.n_instruments

    @property
    def constraint_count(self) -> int:
        """Effective inequality rows: finite bounds plus the budget."""
        return 1 + self.n_variables + int(np.sum(np.isfinite(self.upper)))

    @property
    def reported_constraint_count(self) -> int:
        """Bookkeeping that counts a lower and an upper bound for every split
        variable whether or not the upper is infinite (cash is unbounded)."""
        return 2 * self.n_variables + 1

    def with_wealth(self, wealth: float) -> "Problem":
        """Same market and preferences, different budget; the perturbed
        budget may be nonpositive (covered by borrowing)."""
        clone = Problem.__new__(Problem)
        clone.__dict__.update(self.__dict__)
        clone.wealth = float(wealth)
        return clone

    def log_objective(self, z):
        """(G, softmax, grad of G) at the split vector z, via the kernels."""
        z = np.ascontiguousarray(z, dtype=float)
        return kernels.logsumexp_affine(self.payoffs, z, self.shift, self.coef)

    def objective(self, z) -> float:
        """Expected exponential loss F(z) = exp(G(z))."""
        g, _, _ = self.log_objective(z)
        return math.exp(g)

    def gradient(self, z) -> np.ndarray:
        """Analytic gradient of the expected loss F."""
        g, _, grad_g = self.log_objective(z)
        return math.exp(g) * grad_g

    def scenario_net(self, z) -> np.ndarray:
        """Net terminal position per scenario: portfolio payoff minus liability."""
        return self.payoffs @ np.asarray(z, dtype=float) - self.claim_values

    def entry_cost(self, z) -> float:
        return float(np.dot(self.cost, z))


def assemble(book: QuoteBook, grid: ScenarioGrid, prefs: Preferences,
             liability: Liability = Liability.zero()) -> Problem:
    """Build the split-form problem over the book's instruments and the grid."""
    if len(grid) == 0:
        raise AssemblyError("scenario grid is empty")
    n = len(book.instruments)
    nodes = grid.nodes
    payoffs = np.empty((len(grid), 2 * n), dtype=float)
    cost = np.empty(2 * n, dtype=float)
    upper = np.empty(2 * n, dtype=float)
    for j, instr in enumerate(book.instruments):
        q = book.quote_for(instr.id)
        payoffs[:, j] = payoff_unit_long(instr, nodes, book.maturity)
        payoffs[:, n + j] = payoff_unit_short(instr, nodes, book.maturity)
        cost[j] = q.ask_price
        cost[n + j] = -q.bid_price
        upper[j] = q.ask_depth
        upper[n + j] = q.bid_depth
    claim_values = liability.payoff(nodes)
    return Problem(book, grid, prefs, liability,
                   np.ascontiguousarray(payoffs), claim_values, cost, upper)


@dataclass
class SolveResult:
    """Optimal split portfolio with certification diagnostics."""

    portfolio: SplitPortfolio
    objective: float
    entropic_risk: float
    budget_slack: float
    kkt_residual: float
    scenario_payoffs: np.ndarray
    duality_gap: float
    iterations: int
    converged: bool
    status: str
    wealth: float
    raw: np.ndarray = field(repr=False, default=None)


def entropic_risk(result: SolveResult) -> float:
    """Logarithm of the expected exponential loss at the optimum."""
    return result.entropic_risk


def _strictly_feasible_start(cost, upper, wealth, cash_short_idx, x0=None):
    if x0 is not None:
        z = np.minimum(np.maximum(np.asarray(x0, dtype=float), 0.0), upper)
        pad = np.where(np.isfinite(upper), np.minimum(1e-6, 0.25 * upper), 1e-6)
        z = np.clip(z, pad, np.where(np.isfinite(upper), upper - pad, np.inf))
    else:
        # symmetric long+short seed: pays only the spread, keeps every slack
        # of comparable size so the initial duals are balanced
        z = np.where(np.isfinite(upper), np.minimum(0.5 * upper, 10.0), 10.0)
        scale_down = wealth / max(1.0, 4.0 * abs(cost @ z))
        if scale_down < 1.0:
            z *= max(scale_down, 1e-9)
    z = np.maximum(z, 1e-12)
    slack = wealth - cost @ z
    margin = 1.0 + 1e-3 * abs(wealth)
    if slack < margin:
        # borrow cash: unbounded short side with entry revenue of 1 per unit
        z[cash_short_idx] += (margin - slack)
    return z


def solve(problem: Problem, tol: float = 1e-8, x0=None,
          max_iter: int = 200) -> SolveResult:
    """Primal-dual interior-point solve of the assembled problem.

    Inequalities are written as A z + s = b with slack s > 0 and multiplier
    nu > 0; rows are the budget, the lower bound of every active split
    variable, and each finite depth bound. Newton steps on the perturbed KKT
    system reduce to one dense SPD solve in z (Hessian of the log-objective
    plus diag weights plus a rank-one budget term); an adaptive centering
    parameter follows the affine-scaling progress. The iterate stays strictly
    primal feasible, so the complementarity product certifies the duality
    gap. Returns converged=False (never a silently wrong answer) when the
    iteration or numerics give out.
    """
    n_total = problem.payoffs.shape[1]
    n_instr = problem.n_instruments
    active = problem.upper > 0.0
    idx = np.flatnonzero(active)
    payoffs = np.ascontiguousarray(problem.payoffs[:, idx])
    cost = problem.cost[idx]
    upper = problem.upper[idx]
    finite_up = np.isfinite(upper)
    up_idx = np.flatnonzero(finite_up)
    wealth = problem.wealth
    cash_j = next(i for i, instr in enumerate(problem.book.instruments)
                  if isinstance(instr, Cash))
    cash_short_local = int(np.searchsorted(idx, n_instr + cash_j))
    n = idx.size
    m = 1 + n + up_idx.size  # budget + lower bounds + finite upper bounds

    x0_local = np.asarray(x0, dtype=float)[idx] if x0 is not None else None
    z = _strictly_feasible_start(cost, upper, wealth, cash_short_local, x0_local)

    def slacks(zv):
        s_budget = wealth - cost @ zv
        return s_budget, zv.copy(), upper[up_idx] - zv[up_idx]

    def dual_combine(nu0, nu_lo, nu_up):
        """A^T nu for the three row blocks."""
        out = nu0 * cost - nu_lo
        out[up_idx] += nu_up
        return out

    g, softmax, grad_g = kernels.logsumexp_affine(payoffs, z, problem.shift, problem.coef)
    s0, s_lo, s_up = slacks(z)
    mu_init = 0.01 * (1.0 + abs(g))
    nu0 = mu_init / s0
    nu_lo = mu_init / s_lo
    nu_up = mu_init / s_up if up_idx.size else np.empty(0)

    status = "optimal"
    converged = False
    newton_iters = 0
    grad_scale = 1.0 + np.abs(grad_g).max()
    r_dual = grad_g + dual_combine(nu0, nu_lo, nu_up)
    mu_bar = (nu0 * s0 + nu_lo @ s_lo + (nu_up @ s_up if up_idx.size else 0.0)) / m
    best = None  # (kkt, z, g, mu_bar, dual_res)

    for _it in range(max_iter):
        grad_scale = 1.0 + np.abs(grad_g).max()
        dual_res = np.abs(r_dual).max() / grad_scale
        gap = mu_bar * m / (1.0 + abs(g))
        if best is None or max(dual_res, gap) < best[0]:
            best = (max(dual_res, gap), z.copy(), g, mu_bar, dual_res)
        if dual_res <= tol and gap <= tol:
            converged = True
            break

        hess = kernels.softmax_hessian(payoffs, softmax, grad_g, problem.coef)
        diag_w = nu_lo / s_lo
        diag_w_up = nu_up / s_up if up_idx.size else None
        hess[np.diag_indices_from(hess)] += diag_w
        if up_idx.size:
            hess[up_idx, up_idx] += diag_w_up
        a_scaled = cost * math.sqrt(nu0 / s0)
        hess += np.outer(a_scaled, a_scaled)
        chol = None
        damp = 0.0
        for _try in range(10):
            try:
                hess_d = hess
                if damp:
                    hess_d = hess.copy()
                    hess_d[np.diag_indices_from(hess_d)] += damp
                chol = np.linalg.cholesky(hess_d)
                break
            except np.linalg.LinAlgError:
                damp = max(damp * 100.0, 1e-14 * max(1.0, np.abs(np.diag(hess)).max()))
        if chol is None:
            status = "numerical"
            break

        zeros_up = np.empty(0)
        inv_s = dual_combine(1.0 / s0, 1.0 / s_lo,
                             1.0 / s_up if up_idx.size else zeros_up)

        def kkt_solve(sigma_mu, corr0=0.0, corr_lo=None, corr_up=None):
            """Newton direction for comp target sigma_mu with an optional
            second-order correction; returns step and dual increments."""
            rhs = -(grad_g + sigma_mu * inv_s)
            if corr_lo is not None:
                rhs += dual_combine(corr0 / s0, corr_lo / s_lo,
                                    corr_up / s_up if up_idx.size else zeros_up)
            dz = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
            ds0 = -cost @ dz
            ds_lo = dz
            ds_up = -dz[up_idx] if up_idx.size else zeros_up
            c0 = corr0 if corr_lo is not None else 0.0
            clo = corr_lo if corr_lo is not None else 0.0
            cup = corr_up if corr_lo is not None else 0.0
            dnu0 = (-nu0 * s0 + sigma_mu - c0 - nu0 * ds0) / s0
            dnu_lo = (-nu_lo * s_lo + sigma_mu - clo - nu_lo * ds_lo) / s_lo
            dnu_up = ((-nu_up * s_up + sigma_mu - cup - nu_up * ds_up) / s_up
                      if up_idx.size else zeros_up)
            return dz, ds0, ds_lo, ds_up, dnu0, dnu_lo, dnu_up

        def max_step(vals, deltas):
            neg = deltas < 0
            if not np.any(neg):
                return 1.0
            return min(1.0, float(np.min(vals[neg] / -deltas[neg])))

        def step_pair(ds0_, ds_lo_, ds_up_, dnu0_, dnu_lo_, dnu_up_):
            a_p = min(max_step(np.array([s0]), np.array([ds0_])),
                      max_step(s_lo, ds_lo_),
                      max_step(s_up, ds_up_) if up_idx.size else 1.0)
            a_d = min(max_step(np.array([nu0]), np.array([dnu0_])),
                      max_step(nu_lo, dnu_lo_),
                      max_step(nu_up, dnu_up_) if up_idx.size else 1.0)
            return a_p, a_d

        def trial(alpha_p, alpha_d, dz_, dnu0_, dnu_lo_, dnu_up_, target):
            """Evaluate the candidate point; None while infeasible/non-finite,
            else the new state tuple with its KKT residual norm for ``target``."""
            z_try = z + alpha_p * dz_
            nu0_try = nu0 + alpha_d * dnu0_
            nu_lo_try = nu_lo + alpha_d * dnu_lo_
            nu_up_try = nu_up + alpha_d * dnu_up_ if up_idx.size else nu_up
            s0_try, s_lo_try, s_up_try = slacks(z_try)
            if s0_try <= 0 or np.any(s_lo_try <= 0) or (up_idx.size and np.any(s_up_try <= 0)):
                return None
            g_try, sm_try, gr_try = kernels.logsumexp_affine(
                payoffs, z_try, problem.shift, problem.coef)
            if not (np.isfinite(g_try) and np.all(np.isfinite(gr_try))):
                return None
            r_dual_try = gr_try + dual_combine(nu0_try, nu_lo_try, nu_up_try)
            comp = np.concatenate([[nu0_try * s0_try - target],
                                   nu_lo_try * s_lo_try - target,
                                   (nu_up_try * s_up_try - target) if up_idx.size else zeros_up])
            phi = float(r_dual_try @ r_dual_try + comp @ comp)
            return (z_try, g_try, sm_try, gr_try, nu0_try, nu_lo_try, nu_up_try,
                    s0_try, s_lo_try, s_up_try, r_dual_try, phi)

        def commit(state):
            nonlocal z, g, softmax, grad_g, nu0, nu_lo, nu_up, s0, s_lo, s_up
            nonlocal r_dual, mu_bar
            (z, g, softmax, grad_g, nu0, nu_lo, nu_up, s0, s_lo, s_up,
             r_dual, _phi) = state
            mu_bar = (nu0 * s0 + nu_lo @ s_lo
                      + (nu_up @ s_up if up_idx.size else 0.0)) / m

        # affine predictor fixes the centering weight and the corrector term
        aff = kkt_solve(0.0)
        dz_a, ds0_a, ds_lo_a, ds_up_a, dnu0_a, dnu_lo_a, dnu_up_a = aff
        ap_aff, ad_aff = step_pair(ds0_a, ds_lo_a, ds_up_a, dnu0_a, dnu_lo_a, dnu_up_a)
        mu_aff = ((nu0 + ad_aff * dnu0_a) * (s0 + ap_aff * ds0_a)
                  + (nu_lo + ad_aff * dnu_lo_a) @ (s_lo + ap_aff * ds_lo_a)
                  + ((nu_up + ad_aff * dnu_up_a) @ (s_up + ap_aff * ds_up_a)
                     if up_idx.size else 0.0)) / m
        sigma = min(0.8, max(1e-6, (max(mu_aff, 0.0) / mu_bar) ** 3))
        target = sigma * mu_bar
        comp_now = np.concatenate([[nu0 * s0 - target], nu_lo * s_lo - target,
                                   (nu_up * s_up - target) if up_idx.size else zeros_up])
        phi_now = float(r_dual @ r_dual + comp_now @ comp_now)

        # fast path: corrected step with separate step lengths, watched only
        # for gross residual growth
        full = kkt_solve(target, corr0=ds0_a * dnu0_a, corr_lo=ds_lo_a * dnu_lo_a,
                         corr_up=ds_up_a * dnu_up_a if up_idx.size else zeros_up)
        dz, ds0, ds_lo, ds_up, dnu0, dnu_lo, dnu_up = full
        alpha_p, alpha_d = step_pair(ds0, ds_lo, ds_up, dnu0, dnu_lo, dnu_up)
        state = trial(min(1.0, 0.995 * alpha_p), min(1.0, 0.995 * alpha_d),
                      dz, dnu0, dnu_lo, dnu_up, target)
        accepted = state is not None and state[-1] <= 2.0 * phi_now
        if accepted:
            commit(state)
        else:
            # the aggressive step stressed the linearization: recenter with a
            # conservative sigma and a common damped step. Pure Newton on the
            # perturbed KKT residual descends its squared norm, so Armijo
            # backtracking must succeed down to float resolution.
            target = max(0.5, sigma) * mu_bar
            comp_now = np.concatenate(
                [[nu0 * s0 - target], nu_lo * s_lo - target,
                 (nu_up * s_up - target) if up_idx.size else zeros_up])
            phi_now = float(r_dual @ r_dual + comp_now @ comp_now)
            dz, ds0, ds_lo, ds_up, dnu0, dnu_lo, dnu_up = kkt_solve(target)
            alpha_p, alpha_d = step_pair(ds0, ds_lo, ds_up, dnu0, dnu_lo, dnu_up)
            alpha = min(1.0, 0.995 * alpha_p, 0.995 * alpha_d)
            for _bt in range(40):
                state = trial(alpha, alpha, dz, dnu0, dnu_lo, dnu_up, target)
                if state is not None and state[-1] <= (1.0 - 1e-4 * alpha) * phi_now:
                    commit(state)
                    accepted = True
                    break
                alpha *= 0.5
        newton_iters += 1
        if not accepted:
            status = "stalled"
            break
    else:
        status = "iteration_limit"

    dual_res = np.abs(r_dual).max() / (1.0 + np.abs(grad_g).max())
    gap = mu_bar * m / (1.0 + abs(g))
    if best is not None and best[0] < max(dual_res, gap):
        _, z, g, mu_bar, dual_res = best
        gap = mu_bar * m / (1.0 + abs(g))
    kkt_residual = max(dual_res, gap)
    if converged:
        status = "optimal"
    z_full = np.zeros(n_total)
    z_full[idx] = z
    long = z_full[:n_instr].copy()
    short = z_full[n_instr:].copy()
    # cancel simultaneous long/short: payoff-neutral for options and a strict
    # improvement for cash/forward, so the reported point only improves
    overlap = np.minimum(long, short)
    long -= overlap
    short -= overlap
    tiny = 1e-11 * max(1.0, float(np.max(np.abs(z_full)) if z_full.size else 0.0))
    long[long < tiny] = 0.0
    short[short < tiny] = 0.0
    z_report = np.concatenate([long, short])
    g_rep, _, _ = kernels.logsumexp_affine(
        problem.payoffs, np.ascontiguousarray(z_report), problem.shift, problem.coef)
    # the entropic value stays finite even when the loss itself overflows
    objective = math.exp(g_rep) if g_rep < 709.0 else math.inf

    result = SolveResult(
        portfolio=SplitPortfolio(problem.book.ids, long, short),
        objective=float(objective),
        entropic_risk=float(g_rep),
        budget_slack=float(wealth - problem.cost @ z_report),
        kkt_residual=float(kkt_residual),
        scenario_payoffs=problem.scenario_net(z_report),
        duality_gap=float(gap),
        iterations=newton_iters,
        converged=converged,
        status=status,
        wealth=wealth,
        raw=z_report,
    )
    if not np.isfinite(g_rep):
        raise SolverFailure("objective overflowed at the reported point", result)
    return result
