"""Competitive-equilibrium solvers for all production-function branches.

At the competitive equilibrium every firm makes zero profit and all markets
clear (production equals intermediate demand plus household consumption).
For constant-return Leontief technology this is a pair of linear systems in
prices and production levels; general CES technology with decreasing returns
couples the two systems non-linearly, and the Cobb-Douglas limit decouples
into a value system plus a log-price system.  Prices are measured in units of
the wage throughout (p0 = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .economy import Economy, NetworkMatrix, network_matrix, optimal_quantities_all

__all__ = [
    "Equilibrium",
    "CesAggregates",
    "NotRealisable",
    "SolveFailure",
    "NoConvergence",
    "SingularSystem",
    "equilibrium_mu",
    "household_kappa",
    "naive_kappa",
    "ces_aggregates",
    "solve_leontief_crs",
    "solve_general_ces",
    "solve_cobb_douglas",
    "solve_equilibrium",
    "residuals",
]


class NotRealisable(Exception):
    """No positive equilibrium exists (Hawkins-Simon condition violated)."""

    def __init__(self, message: str, eps: float | None = None):
        super().__init__(message)
        self.eps = eps


class SolveFailure(Exception):
    """A linear solve failed beyond tolerance."""


class NoConvergence(Exception):
    """Fixed-point iteration did not reach the requested tolerance."""


class SingularSystem(Exception):
    """The Cobb-Douglas log-price system is singular."""


@dataclass(frozen=True)
class Equilibrium:
    """Equilibrium prices/production levels plus realisability diagnostics.

    ``residuals`` holds (max normalised profit, max normalised clearing
    error) evaluated at cost-minimising quantities.
    """

    prices_eq: np.ndarray
    gammas_eq: np.ndarray
    kappa: np.ndarray
    mu_eq: float
    realisable: bool
    residuals: tuple[float, float]


@dataclass(frozen=True)
class CesAggregates:
    """zeta = 1/(1+q) and the aggregate matrix Lambda = a^(q zeta) o J^zeta."""

    zeta: float
    lambda_matrix: np.ndarray  # (N, N+1), labour column 0


def equilibrium_mu(theta: np.ndarray, Gamma: float, phi: float) -> float:
    """Household marginal utility of money at equilibrium (zero savings)."""
    theta_bar = float(np.sum(theta))
    if math.isinf(phi):
        return theta_bar
    return theta_bar ** (phi / (1.0 + phi)) * Gamma ** (1.0 / (1.0 + phi))


def household_kappa(theta: np.ndarray, L0: float, Gamma: float, phi: float) -> np.ndarray:
    """Equilibrium consumption budget per good: C_eq,i = kappa_i / p_eq,i."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or L0 <= 0 or Gamma <= 0 or not phi > 0:
        raise ValueError("theta, L0, Gamma must be positive and phi > 0")
    return theta * L0 / equilibrium_mu(theta, Gamma, phi)


def naive_kappa(economy: Economy) -> np.ndarray:
    """Final-demand vector implied by the naive model's consumption closure.

    The naive dynamics assume a full-time household (C_i = mu theta_i / p_i
    with mu = L0 / theta_bar), so this is the kappa for which the naive
    right-hand side vanishes exactly at equilibrium.
    """
    theta = economy.preferences_theta0
    return economy.labor_scale_L0 * theta / float(np.sum(theta))


def ces_aggregates(economy: Economy) -> CesAggregates:
    if economy.elasticity.is_cobb_douglas:
        raise ValueError("aggregate matrix is undefined in the Cobb-Douglas limit")
    zeta = economy.elasticity.zeta
    q = economy.elasticity.q
    j = economy.links
    a = economy.substitution
    support = j > 0
    lam = np.where(support,
                   np.where(support, a, 1.0) ** (q * zeta) * np.where(support, j, 1.0) ** zeta,
                   0.0)
    return CesAggregates(zeta=zeta, lambda_matrix=lam)


def solve_leontief_crs(nm: NetworkMatrix, labor_needs: np.ndarray, kappa: np.ndarray,
                       mu: float = math.nan) -> Equilibrium:
    """Exact equilibrium for Leontief technology with b = 1.

    Solves M p = V for prices and M^T gamma = kappa / p for production
    levels; requires M to be an M-matrix.
    """
    if nm.eps <= 0:
        raise NotRealisable(
            f"network matrix has smallest eigenvalue {nm.eps:.6g} <= 0", eps=nm.eps)
    kappa = np.asarray(kappa, dtype=float)
    v = np.asarray(labor_needs, dtype=float)
    try:
        p = np.linalg.solve(nm.m, v)
        gamma = np.linalg.solve(nm.m.T, kappa / p)
    except np.linalg.LinAlgError as exc:
        raise SolveFailure(str(exc)) from exc
    if np.any(p <= 0) or np.any(gamma <= 0):
        raise NotRealisable("linear solve produced non-positive prices or productions",
                            eps=nm.eps)
    z = np.diagonal(nm.m)
    profit_res = float(np.max(np.abs(nm.m @ p - v) / (z * p)))
    clearing_res = float(np.max(np.abs(nm.m.T @ gamma - kappa / p) / (z * gamma)))
    return Equilibrium(prices_eq=p, gammas_eq=gamma, kappa=kappa, mu_eq=mu,
                       realisable=True, residuals=(profit_res, clearing_res))


def solve_general_ces(economy: Economy, kappa: np.ndarray, tol: float = 1e-10,
                      max_iter: int = 100_000, mu: float = math.nan,
                      damping: float = 0.5) -> Equilibrium:
    """Equilibrium for finite q and b in (0, 1].

    With b = 1 the two equilibrium equations are linear in (p^zeta, gamma)
    and solved exactly in two stages.  For b < 1 the coupled equations are
    iterated as a damped fixed point in log production levels: given gamma,
    both equations become linear in u = p^zeta and in the auxiliary variable
    w = z^(q zeta) u^q gamma^(zeta(bq+1)/b), and gamma is read back from w.
    """
    if economy.elasticity.is_cobb_douglas:
        raise ValueError("use solve_cobb_douglas for q = inf")
    b = economy.returns_b
    if not 0 < b <= 1:
        raise ValueError("solve_general_ces requires b in (0, 1]")
    kappa = np.asarray(kappa, dtype=float)
    agg = ces_aggregates(economy)
    zeta, q = agg.zeta, economy.elasticity.q
    lam_firms = agg.lambda_matrix[:, 1:]
    v = agg.lambda_matrix[:, 0]
    z_zeta = economy.productivities ** zeta
    m_ces = np.diag(z_zeta) - lam_firms

    def two_stage(matrix):
        u = np.linalg.solve(matrix, v)
        if np.any(u <= 0):
            return None, None
        w = np.linalg.solve(matrix.T, kappa / u)
        if np.any(w <= 0):
            return None, None
        return u, w

    eps_ces = float(np.min(np.linalg.eigvals(m_ces).real))
    if eps_ces <= 0:
        raise NotRealisable(
            f"CES network matrix has smallest eigenvalue {eps_ces:.6g} <= 0", eps=eps_ces)
    try:
        u, w = two_stage(m_ces)
    except np.linalg.LinAlgError as exc:
        raise SolveFailure(str(exc)) from exc
    if u is None:
        raise NotRealisable("b=1 stage produced non-positive solution", eps=eps_ces)
    gamma = w / (economy.productivities ** (q * zeta) * u ** q)

    if b < 1:
        e1 = zeta * (b - 1.0) / b                # exponent on gamma in both diagonals
        e2 = zeta * (b * q + 1.0) / b            # exponent relating w to gamma
        log_gamma = np.log(gamma)
        bad_streak = 0
        for _ in range(int(max_iter)):
            gamma = np.exp(log_gamma)
            d = np.diag(z_zeta * gamma ** e1) - lam_firms
            try:
                u, w = two_stage(d)
            except np.linalg.LinAlgError:
                u = None
            if u is None:
                bad_streak += 1
                if bad_streak > 50:
                    raise NotRealisable(
                        "iteration persistently left the positive orthant", eps=eps_ces)
                log_gamma = log_gamma * 0.5 + np.log(np.maximum(gamma, 1e-12)) * 0.5
                continue
            bad_streak = 0
            gamma_new = (w / (economy.productivities ** (q * zeta) * u ** q)) ** (1.0 / e2)
            step = np.log(gamma_new) - log_gamma
            log_gamma = log_gamma + damping * step
            if np.max(np.abs(step)) < tol:
                break
        else:
            raise NoConvergence(f"no convergence after {max_iter} iterations")
        gamma = np.exp(log_gamma)
        d = np.diag(z_zeta * gamma ** e1) - lam_firms
        u, w = two_stage(d)
        if u is None:
            raise NotRealisable("converged point is not positive", eps=eps_ces)

    p = u ** (1.0 / zeta)
    res = residuals(economy, p, gamma, kappa=kappa)
    return Equilibrium(prices_eq=p, gammas_eq=gamma, kappa=kappa, mu_eq=mu,
                       realisable=True, residuals=res)


def solve_cobb_douglas(economy: Economy, kappa: np.ndarray, mu: float = math.nan) -> Equilibrium:
    """Exact equilibrium in the Cobb-Douglas limit.

    Positive solutions exist for any positive productivities: stage one gives
    the value vector w = z o gamma o p = (I - a^T)^(-1) kappa, stage two the
    log-price system (I/b - a) log p = (1-b)/b log w - log(z)/b + h with
    h_i = sum over supported inputs (labour included) of a_il log(J_il/a_il).
    """
    if not economy.elasticity.is_cobb_douglas:
        raise ValueError("economy does not have Cobb-Douglas technology")
    b = economy.returns_b
    kappa = np.asarray(kappa, dtype=float)
    a_firms = economy.substitution[:, 1:]
    radius = float(np.max(np.abs(np.linalg.eigvals(a_firms))))
    if radius >= 1.0 / b - 1e-12:
        raise SingularSystem(
            f"substitution block has spectral radius {radius:.6g} >= 1/b")

    j = economy.links
    a = economy.substitution
    support = (j > 0) & (a > 0)
    h = np.sum(np.where(support,
                        a * np.log(np.where(support, j / np.where(support, a, 1.0), 1.0)),
                        0.0), axis=1)
    try:
        w = np.linalg.solve(np.eye(economy.n_firms) - a_firms.T, kappa)
        rhs = ((1.0 - b) / b) * np.log(w) - np.log(economy.productivities) / b + h
        log_p = np.linalg.solve(np.eye(economy.n_firms) / b - a_firms, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    p = np.exp(log_p)
    gamma = w / (economy.productivities * p)
    res = residuals(economy, p, gamma, kappa=kappa)
    return Equilibrium(prices_eq=p, gammas_eq=gamma, kappa=kappa, mu_eq=mu,
                       realisable=True, residuals=res)


def solve_equilibrium(economy: Economy, kappa: np.ndarray | None = None,
                      naive_household: bool = False, tol: float = 1e-10,
                      max_iter: int = 100_000) -> Equilibrium:
    """Dispatch to the appropriate solver for the economy's technology.

    ``naive_household`` selects the naive model's consumption closure
    (kappa = L0 theta / theta_bar) instead of the work-elastic household.
    """
    theta = economy.preferences_theta0
    if kappa is None:
        if naive_household:
            kappa = naive_kappa(economy)
            mu = economy.labor_scale_L0 / float(np.sum(theta))
        else:
            kappa = household_kappa(theta, economy.labor_scale_L0,
                                    economy.work_aversion_Gamma, economy.frisch_phi)
            mu = equilibrium_mu(theta, economy.work_aversion_Gamma, economy.frisch_phi)
    else:
        mu = math.nan
    if economy.elasticity.is_cobb_douglas:
        return solve_cobb_douglas(economy, kappa, mu=mu)
    if economy.elasticity.is_leontief and economy.returns_b == 1.0:
        return solve_leontief_crs(network_matrix(economy), economy.labor_needs, kappa, mu=mu)
    return solve_general_ces(economy, kappa, tol=tol, max_iter=max_iter, mu=mu)


def residuals(economy: Economy, p: np.ndarray, gamma: np.ndarray,
              kappa: np.ndarray | None = None) -> tuple[float, float]:
    """Normalised distance of (p, gamma) from competitive equilibrium.

    Profits and market-clearing errors are evaluated at the cost-minimising
    input bundles and household consumption C_i = kappa_i / p_i, then
    normalised by sales z gamma p and production z gamma respectively --
    the same normalisation the dynamical update rules use.
    """
    p = np.asarray(p, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if np.any(p <= 0) or np.any(gamma <= 0):
        raise ValueError("prices and production levels must be positive")
    if kappa is None:
        kappa = household_kappa(economy.preferences_theta0, economy.labor_scale_L0,
                                economy.work_aversion_Gamma, economy.frisch_phi)
    z = economy.productivities
    prices_aug = np.concatenate(([1.0], p))
    bundles = optimal_quantities_all(gamma, prices_aug, economy)
    sales = z * gamma * p
    profit = sales - bundles @ prices_aug
    demand = bundles[:, 1:].sum(axis=0) + kappa / p
    clearing = z * gamma - demand
    return (float(np.max(np.abs(profit) / sales)),
            float(np.max(np.abs(clearing) / (z * gamma))))
