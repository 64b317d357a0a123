"""Causal agent-based model of the firm network.

One time step has three epochs.  Planning: firms forecast demand from last
period's posted (and optionally realized) orders, set production targets by
the tatonnement rule on expected profits and expected excess supply, and
post input demands net of inventories; the household posts consumption
demands and a labour supply from its utility optimum.  Exchanges: hiring is
capped by labour supply, wages are paid up front, goods are rationed
proportionally to posted demands, the household's purchases are additionally
capped by its realized budget, and prices/wages react to the realized
imbalances.  Production: output is produced from what was actually acquired
(inputs bind, labour binds), unused inputs and unsold output decay into
inventories, and all nominal quantities are rescaled by the new wage.

Quantities are stored in augmented (N+1) x (N+1) matrices: row/column 0 is
the household (labour column, consumption row).  Firms' output is stored as
production pi_i = z_i gamma_i directly; targets live in the same units.

Every phase mutates the state it is given and returns it; ``step`` copies
first, so the public step/run API is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .economy import Economy, optimal_quantities_all, production_all
from .equilibrium import Equilibrium

__all__ = [
    "HouseholdLedger",
    "AbmState",
    "StepFlows",
    "AbmTrajectory",
    "forecast_demand",
    "solve_mu",
    "household_plan",
    "confidence_update",
    "plan",
    "exchange_and_update",
    "produce_and_rescale",
    "step",
    "init_near_equilibrium",
    "run",
]

DIVERGENCE_CAP = 1e12


@dataclass
class HouseholdLedger:
    """Representative-household accounts for one step."""

    savings: float
    budget: float
    labor_supply: float
    labor_demand: float
    mu: float
    theta: np.ndarray
    consumption_demand: np.ndarray
    consumption_real: np.ndarray

    def copy(self) -> "HouseholdLedger":
        return HouseholdLedger(self.savings, self.budget, self.labor_supply,
                               self.labor_demand, self.mu, self.theta.copy(),
                               self.consumption_demand.copy(),
                               self.consumption_real.copy())


@dataclass
class StepFlows:
    """Realized flows of the last completed exchange phase (diagnostics)."""

    supply: np.ndarray
    demand: np.ndarray
    gains: np.ndarray
    losses: np.ndarray
    profits: np.ndarray
    excess: np.ndarray
    labor_hired: float
    labor_supply: float
    labor_demand: float
    wage_inflation: float = 0.0

    @property
    def profits_normalised(self) -> np.ndarray:
        return _safe_ratio(self.profits, self.gains + self.losses)

    @property
    def excess_normalised(self) -> np.ndarray:
        return _safe_ratio(self.excess, self.supply + self.demand)


@dataclass
class AbmState:
    """Full mutable state of the simulation between steps."""

    t: int
    prices: np.ndarray
    wage: float
    productions: np.ndarray            # pi(t)
    targets: np.ndarray                # pi_hat(t+1)
    inventories: np.ndarray            # (N, N) goods only; labour is not storable
    demand_matrix: np.ndarray          # (N+1, N+1) posted demands Q^d(t)
    exchange_matrix: np.ndarray        # (N+1, N+1) realized exchanges Q(t)
    prev_demand_matrix: np.ndarray     # Q^d(t-1), the forecasting anchor
    household: HouseholdLedger
    optimal_bundle: np.ndarray | None = None   # Q_hat(t), set by plan()
    flows: StepFlows | None = None
    status: str = "ok"

    def copy(self) -> "AbmState":
        return AbmState(
            t=self.t, prices=self.prices.copy(), wage=self.wage,
            productions=self.productions.copy(), targets=self.targets.copy(),
            inventories=self.inventories.copy(),
            demand_matrix=self.demand_matrix.copy(),
            exchange_matrix=self.exchange_matrix.copy(),
            prev_demand_matrix=self.prev_demand_matrix.copy(),
            household=self.household.copy(),
            optimal_bundle=None if self.optimal_bundle is None else self.optimal_bundle.copy(),
            flows=self.flows, status=self.status)


def _safe_ratio(num, den):
    """x / y with the convention 0 where y == 0 (no information, no change)."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den != 0)
    return out


def forecast_demand(prev_qd: np.ndarray, prev_q: np.ndarray, lam: float) -> np.ndarray:
    """Expected demand matrix: lam * posted(t-1) + (1-lam) * realized(t-1)."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    if prev_qd.shape != prev_q.shape:
        raise ValueError("matrices must have the same shape")
    if lam == 1.0:
        return prev_qd.copy()
    return lam * prev_qd + (1.0 - lam) * prev_q


def solve_mu(savings: float, w0: float, theta_bar: float, phi: float,
             gamma_aversion: float = 1.0) -> float:
    """Marginal utility of money: root of G^(-1/phi) mu^(1+1/phi) + (S/W0) mu = theta_bar.

    Closed forms for phi = inf (inelastic labour) and phi = 1 (quadratic work
    disutility); bracketed root-finding otherwise.  The left side is strictly
    increasing, so the positive root is unique.
    """
    if w0 <= 0 or theta_bar <= 0 or savings < 0:
        raise ValueError("need W0 > 0, theta_bar > 0, savings >= 0")
    s = savings / w0
    if math.isinf(phi):
        return theta_bar / (1.0 + s)
    if phi == 1.0:
        g = gamma_aversion
        return 0.5 * g * (math.sqrt(s * s + 4.0 * theta_bar / g) - s)
    k = 1.0 + 1.0 / phi
    g_pow = gamma_aversion ** (-1.0 / phi)

    def equation(mu):
        return g_pow * mu ** k + s * mu - theta_bar

    upper = max(theta_bar, (theta_bar / g_pow) ** (1.0 / k)) + 1.0
    return float(brentq(equation, 0.0, upper, xtol=1e-14, rtol=1e-14))


def household_plan(savings: float, prices: np.ndarray, wage: float,
                   theta: np.ndarray, phi: float, l0: float,
                   gamma_aversion: float = 1.0) -> tuple[np.ndarray, float, float]:
    """Optimal consumption demands and labour supply (C^d, L^s, mu).

    The household saturates its hoped-for budget wage * L^s + S, so
    sum p C^d = wage L^s + S holds exactly by construction.
    """
    if np.any(np.asarray(prices) <= 0) or wage <= 0:
        raise ValueError("prices and wage must be positive")
    theta_bar = float(np.sum(theta))
    mu = solve_mu(savings, wage * l0, theta_bar, phi, gamma_aversion)
    demand = l0 * (theta / mu) * (wage / prices)
    if math.isinf(phi):
        labor_supply = l0
    else:
        labor_supply = l0 * (mu / gamma_aversion) ** (1.0 / phi)
    return demand, labor_supply, mu


def confidence_update(theta0: np.ndarray, labor_demand: float, labor_supply: float,
                      omega_p: float) -> np.ndarray:
    """Consumption preferences scaled by labour-market tension (confidence)."""
    total = labor_demand + labor_supply
    if total <= 0:
        return theta0.copy()
    tension = (labor_demand - labor_supply) / total
    return theta0 * math.exp(2.0 * omega_p * tension)


class _Cache:
    """Per-economy arrays reused across steps."""

    def __init__(self, economy: Economy):
        n = economy.n_firms
        dyn = economy.dyn_params
        self.n = n
        self.z = economy.productivities
        self.b = economy.returns_b
        self.inv_b = 1.0 / economy.returns_b
        self.j_firms = economy.firm_links
        self.alpha = dyn.firm_vector("alpha", n)
        self.alpha_p = dyn.firm_vector("alpha_p", n)
        self.beta = dyn.firm_vector("beta", n)
        self.beta_p = dyn.firm_vector("beta_p", n)
        self.omega = dyn.omega
        self.omega_p = dyn.omega_p
        self.decay = np.exp(-dyn.firm_vector("sigma", n))
        self.lam = dyn.lambda_forecast
        self.leontief = economy.elasticity.is_leontief


def _cache(economy: Economy, cache: _Cache | None) -> _Cache:
    return cache if cache is not None else _Cache(economy)


def plan(state: AbmState, economy: Economy, cache: _Cache | None = None) -> AbmState:
    """Planning epoch: targets, cost-minimising bundles, posted demands."""
    c = _cache(economy, cache)
    p = state.prices
    p_aug = np.concatenate(([state.wage], p))
    supply = state.productions + np.diagonal(state.inventories)

    expected_q = forecast_demand(state.prev_demand_matrix, state.exchange_matrix, c.lam)
    expected_demand = expected_q[:, 1:].sum(axis=0)
    expected_gains = p * expected_demand
    expected_losses = expected_q[1:, :] @ p_aug
    expected_profit = expected_gains - expected_losses
    expected_excess = supply - expected_demand

    log_update = (2.0 * c.beta * _safe_ratio(expected_profit, expected_gains + expected_losses)
                  - 2.0 * c.beta_p * _safe_ratio(expected_excess, supply + expected_demand))
    anchor = np.where(state.productions > 0, state.productions, state.targets)
    state.targets = anchor * np.exp(log_update)

    bundle = optimal_quantities_all(state.targets / c.z, p_aug, economy)
    state.optimal_bundle = bundle
    qd = np.zeros((c.n + 1, c.n + 1))
    qd[0, 1:] = state.household.consumption_demand
    qd[1:, 0] = bundle[:, 0]
    qd[1:, 1:] = np.maximum(0.0, bundle[:, 1:] - state.inventories)
    state.demand_matrix = qd
    return state


def exchange_and_update(state: AbmState, economy: Economy,
                        cache: _Cache | None = None) -> AbmState:
    """Exchange epoch: hiring, rationed trades, price and wage updates."""
    c = _cache(economy, cache)
    if state.optimal_bundle is None:
        raise ValueError("plan() must run before exchange_and_update()")
    p = state.prices
    wage = state.wage
    house = state.household
    qd = state.demand_matrix
    supply = state.productions + np.diagonal(state.inventories)

    labor_demand = float(qd[1:, 0].sum())
    labor_supply = house.labor_supply
    hire = min(1.0, labor_supply / labor_demand) if labor_demand > 0 else 1.0
    labor = qd[1:, 0] * hire
    budget = house.savings + wage * float(labor.sum())

    demand = qd[:, 1:].sum(axis=0)
    ration = np.minimum(1.0, _safe_ratio(supply, demand) + (demand == 0))
    q_firms = qd[1:, 1:] * ration[None, :]
    consumption = qd[0, 1:] * ration
    spending_posted = float(p @ consumption)
    budget_factor = min(1.0, budget / spending_posted) if spending_posted > 0 else 1.0
    consumption_real = consumption * budget_factor

    exchange = np.zeros_like(qd)
    exchange[0, 1:] = consumption_real
    exchange[1:, 0] = labor
    exchange[1:, 1:] = q_firms
    state.exchange_matrix = exchange

    gains = p * (q_firms.sum(axis=0) + consumption)
    losses = q_firms @ p + wage * labor
    profits = gains - losses
    excess = supply - demand

    house.budget = budget
    house.labor_demand = labor_demand
    house.consumption_real = consumption_real
    # Exact when the budget cap binds; guard the rounding residue.
    house.savings = max(0.0, budget - float(p @ consumption_real))

    log_dp = (-2.0 * c.alpha * _safe_ratio(excess, supply + demand)
              - 2.0 * c.alpha_p * _safe_ratio(profits, gains + losses))
    state.prices = p * np.exp(log_dp)
    labor_total = labor_demand + labor_supply
    wage_tension = (labor_demand - labor_supply) / labor_total if labor_total > 0 else 0.0
    state.wage = wage * math.exp(2.0 * c.omega * wage_tension)

    state.flows = StepFlows(supply=supply, demand=demand, gains=gains, losses=losses,
                            profits=profits, excess=excess, labor_hired=float(labor.sum()),
                            labor_supply=labor_supply, labor_demand=labor_demand)
    return state


def produce_and_rescale(state: AbmState, economy: Economy,
                        cache: _Cache | None = None) -> AbmState:
    """Production epoch: output, inventory updates, wage rescaling, and the
    household's plan for the next period."""
    c = _cache(economy, cache)
    bundle = state.optimal_bundle
    exchange = state.exchange_matrix
    house = state.household

    available = np.empty((c.n, c.n + 1))
    available[:, 0] = exchange[1:, 0]
    available[:, 1:] = exchange[1:, 1:] + np.minimum(state.inventories, bundle[:, 1:])

    new_pi = production_all(economy, available)

    supply = state.productions + np.diagonal(state.inventories)
    sold = exchange[1:, 1:].sum(axis=0) + exchange[0, 1:]
    own_left = np.maximum(supply - sold, 0.0)

    if c.leontief:
        activity = (new_pi / c.z) ** c.inv_b
        used = c.j_firms * activity[:, None]
        leftovers = np.maximum(available[:, 1:] - used, 0.0)
    else:
        leftovers = np.zeros((c.n, c.n))     # substitutable inputs are consumed fully
    inventories = leftovers * c.decay[None, :]
    np.fill_diagonal(inventories, c.decay * own_left)
    state.inventories = inventories
    state.productions = new_pi

    # Wage rescaling: prices and nominal stocks in units of the new wage.
    scale = state.wage
    state.prices = state.prices / scale
    house.savings = house.savings / scale
    state.wage = 1.0
    if state.flows is not None:
        state.flows.wage_inflation = math.log(scale)

    theta = confidence_update(economy.preferences_theta0, house.labor_demand,
                              house.labor_supply, c.omega_p)
    demand, labor_supply, mu = household_plan(
        house.savings, state.prices, 1.0, theta, economy.frisch_phi,
        economy.labor_scale_L0, economy.work_aversion_Gamma)
    house.theta = theta
    house.mu = mu
    house.consumption_demand = demand
    house.labor_supply = labor_supply

    state.prev_demand_matrix = state.demand_matrix
    state.t += 1

    values = (state.prices, state.productions, state.targets,
              np.array([house.savings, house.labor_supply]))
    for arr in values:
        if not np.all(np.isfinite(arr)) or np.max(np.abs(arr)) > DIVERGENCE_CAP:
            state.status = "diverged"
            break
    return state


def step(state: AbmState, economy: Economy, cache: _Cache | None = None) -> AbmState:
    """One full Planning -> Exchanges -> Production step (pure)."""
    c = _cache(economy, cache)
    out = state.copy()
    plan(out, economy, c)
    exchange_and_update(out, economy, c)
    produce_and_rescale(out, economy, c)
    return out


def init_near_equilibrium(equilibrium: Equilibrium | None, delta: float, seed: int,
                          economy: Economy) -> AbmState:
    """Initial state perturbed around equilibrium.

    Without a realisable equilibrium (eps < 0), prices and production levels
    start uniformly in [1, 2] instead.
    """
    n = economy.n_firms
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), 0x494e4954)))
    if equilibrium is not None and equilibrium.realisable:
        prices = equilibrium.prices_eq * (1.0 + delta * rng.uniform(-1, 1, n))
        gammas = equilibrium.gammas_eq * (1.0 + delta * rng.uniform(-1, 1, n))
        seed_prices = equilibrium.prices_eq
        seed_gammas = equilibrium.gammas_eq
        seed_consumption = equilibrium.kappa / equilibrium.prices_eq
    else:
        prices = rng.uniform(1.0, 2.0, n)
        gammas = rng.uniform(1.0, 2.0, n)
        seed_prices = prices
        seed_gammas = gammas
        seed_consumption = None

    productions = economy.productivities * gammas
    targets = productions.copy()

    p_aug = np.concatenate(([1.0], seed_prices))
    bundle = optimal_quantities_all(seed_gammas, p_aug, economy)
    theta = economy.preferences_theta0
    demand, labor_supply, mu = household_plan(
        0.0, prices, 1.0, theta, economy.frisch_phi, economy.labor_scale_L0,
        economy.work_aversion_Gamma)
    if seed_consumption is None:
        seed_consumption = demand

    qd = np.zeros((n + 1, n + 1))
    qd[0, 1:] = seed_consumption
    qd[1:, 0] = bundle[:, 0]
    qd[1:, 1:] = bundle[:, 1:]

    household = HouseholdLedger(
        savings=0.0, budget=0.0, labor_supply=labor_supply,
        labor_demand=float(bundle[:, 0].sum()), mu=mu, theta=theta.copy(),
        consumption_demand=demand, consumption_real=np.zeros(n))
    return AbmState(t=0, prices=prices, wage=1.0, productions=productions,
                    targets=targets, inventories=np.zeros((n, n)),
                    demand_matrix=qd.copy(), exchange_matrix=qd.copy(),
                    prev_demand_matrix=qd.copy(), household=household)


@dataclass
class AbmTrajectory:
    """Time series of the observables of one run."""

    times: np.ndarray
    prices: np.ndarray            # (T+1, N)
    productions: np.ndarray       # (T+1, N)
    wage_inflation: np.ndarray    # (T,) log p0(t+1) before rescaling
    savings: np.ndarray           # (T+1,)
    labor_supply: np.ndarray      # (T,)
    labor_demand: np.ndarray      # (T,)
    unemployment: np.ndarray      # (T,) (Ls - L) / Ls
    profits_norm: np.ndarray      # (T, N) P / (G + L)
    excess_norm: np.ndarray       # (T, N) E / (S + D)
    status: str
    halt_t: int | None = None

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1


def run(economy: Economy, init: AbmState, n_steps: int) -> AbmTrajectory:
    """Iterate the fundamental step, recording observables each period."""
    c = _Cache(economy)
    n = economy.n_firms
    state = init.copy()

    times = np.arange(n_steps + 1)
    prices = np.full((n_steps + 1, n), np.nan)
    productions = np.full((n_steps + 1, n), np.nan)
    savings = np.full(n_steps + 1, np.nan)
    wage_inflation = np.full(n_steps, np.nan)
    labor_supply = np.full(n_steps, np.nan)
    labor_demand = np.full(n_steps, np.nan)
    unemployment = np.full(n_steps, np.nan)
    profits_norm = np.full((n_steps, n), np.nan)
    excess_norm = np.full((n_steps, n), np.nan)

    prices[0] = state.prices
    productions[0] = state.productions
    savings[0] = state.household.savings

    status = "ok"
    halt_t = None
    for t in range(n_steps):
        plan(state, economy, c)
        exchange_and_update(state, economy, c)
        produce_and_rescale(state, economy, c)
        flows = state.flows
        prices[t + 1] = state.prices
        productions[t + 1] = state.productions
        savings[t + 1] = state.household.savings
        wage_inflation[t] = flows.wage_inflation
        labor_demand[t] = flows.labor_demand
        ls = flows.labor_supply
        labor_supply[t] = ls
        unemployment[t] = (ls - flows.labor_hired) / ls if ls > 0 else 0.0
        profits_norm[t] = flows.profits_normalised
        excess_norm[t] = flows.excess_normalised
        if state.status == "diverged":
            status = "diverged"
            halt_t = t + 1
            break

    last = halt_t if halt_t is not None else n_steps
    return AbmTrajectory(
        times=times[:last + 1], prices=prices[:last + 1],
        productions=productions[:last + 1], wage_inflation=wage_inflation[:last],
        savings=savings[:last + 1], labor_supply=labor_supply[:last],
        labor_demand=labor_demand[:last], unemployment=unemployment[:last],
        profits_norm=profits_norm[:last], excess_norm=excess_norm[:last],
        status=status, halt_t=halt_t)
