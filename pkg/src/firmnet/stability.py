"""Linear stability of the naive dynamics around equilibrium.

The linearised flow of the 2N-vector U = (delta p, delta gamma) is
dU/dt = D U with four N x N blocks built from the network matrix and the
equilibrium point.  This module assembles the blocks analytically, checks
them against a finite-difference Jacobian of the non-linear flow, and
evaluates the closed-form predictors for the relaxation time and for the
marginal eigenvalue pair in the high-productivity and near-instability
regimes.  It also maps the known eigenvalue density of random regular graphs
through the closed forms to predict the bulk spectrum of D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .economy import DynParams, Economy, network_matrix
from .equilibrium import Equilibrium
from .naive import NaiveState, naive_rhs

__all__ = [
    "StabilityReport",
    "stability_matrix",
    "stability_blocks",
    "relaxation_time_analytic",
    "relaxation_time_high_productivity",
    "predicted_relaxation_time",
    "rho_top",
    "marginal_eigs",
    "mckay_density",
    "bulk_spectrum_check",
]


@dataclass
class StabilityReport:
    """2N x 2N dynamical matrix, its spectrum and relaxation diagnostics."""

    d_matrix: np.ndarray
    eigenvalues: np.ndarray
    tau_relax_numeric: float
    tau_relax_analytic: float
    marginal_pair: tuple[complex, complex]
    jacobian_fd_error: float | None = None


def _speeds(params: DynParams) -> tuple[float, float, float, float]:
    return (params.scalar("alpha"), params.scalar("alpha_p"),
            params.scalar("beta"), params.scalar("beta_p"))


def stability_blocks(economy: Economy, equilibrium: Equilibrium,
                     params: DynParams | None = None) -> tuple[np.ndarray, ...]:
    """The four analytic blocks (D1, D2, D3, D4) of the dynamical matrix."""
    params = params or economy.dyn_params
    alpha, alpha_p, beta, beta_p = _speeds(params)
    m = network_matrix(economy).m
    z = economy.productivities
    theta = economy.preferences_theta0
    mu = economy.labor_scale_L0 / float(np.sum(theta))
    p = equilibrium.prices_eq
    g = equilibrium.gammas_eq

    d1 = -alpha * mu * np.diag(theta / (z * g * p)) - alpha_p * (m / z[:, None])
    d2 = -alpha * (p / (z * g))[:, None] * m.T
    d3 = beta * (g / (z * p))[:, None] * m - beta_p * mu * np.diag(theta / (z * p ** 2))
    d4 = -beta_p * (m.T / z[:, None])
    return d1, d2, d3, d4


def stability_matrix(economy: Economy, equilibrium: Equilibrium,
                     params: DynParams | None = None,
                     fd_check: bool = False) -> StabilityReport:
    """Assemble D, diagonalise it and report relaxation times.

    ``fd_check`` additionally differentiates the non-linear flow numerically
    and stores the relative Frobenius distance to the analytic matrix.
    """
    params = params or economy.dyn_params
    d1, d2, d3, d4 = stability_blocks(economy, equilibrium, params)
    d = np.block([[d1, d2], [d3, d4]])
    eigenvalues = np.linalg.eigvals(d)

    stable = eigenvalues.real[eigenvalues.real < 0]
    tau_numeric = float(-1.0 / stable.max()) if stable.size else math.inf

    eps = network_matrix(economy).eps
    z_max = float(np.max(economy.productivities))
    tau_analytic = relaxation_time_analytic(params, z_max, eps) if eps > 0 else math.inf

    order = np.argsort(np.abs(eigenvalues))
    marginal = (complex(eigenvalues[order[0]]), complex(eigenvalues[order[1]]))

    fd_error = None
    if fd_check:
        fd_error = _jacobian_fd_error(economy, equilibrium, params, d)
    return StabilityReport(d_matrix=d, eigenvalues=eigenvalues,
                           tau_relax_numeric=tau_numeric,
                           tau_relax_analytic=tau_analytic,
                           marginal_pair=marginal, jacobian_fd_error=fd_error)


def _jacobian_fd_error(economy, equilibrium, params, d_analytic) -> float:
    n = economy.n_firms
    x0 = np.concatenate([equilibrium.prices_eq, equilibrium.gammas_eq])

    def flow(x):
        state = NaiveState(prices=x[:n], gammas=x[n:])
        dp, dg = naive_rhs(state, economy, params)
        return np.concatenate([dp, dg])

    jac = np.empty((2 * n, 2 * n))
    for j in range(2 * n):
        h = 1e-6 * max(abs(x0[j]), 1.0)
        xp, xm = x0.copy(), x0.copy()
        xp[j] += h
        xm[j] -= h
        jac[:, j] = (flow(xp) - flow(xm)) / (2 * h)
    return float(np.linalg.norm(jac - d_analytic) / np.linalg.norm(d_analytic))


def _slow_rate(params: DynParams) -> float:
    """Decay-rate factor common to both relaxation-time formulas."""
    alpha, alpha_p, beta, beta_p = _speeds(params)
    s = alpha + alpha_p + beta_p
    disc = s * s - 4.0 * (alpha * beta + alpha_p * beta_p)
    return s - math.sqrt(disc) if disc > 0 else s


def relaxation_time_analytic(params: DynParams, z_max: float, eps: float) -> float:
    """Closed-form relaxation time near the instability, tau ~ 1/eps."""
    if eps <= 0:
        raise ValueError("relaxation time is defined only for eps > 0")
    rate = _slow_rate(params)
    if rate <= 0:
        return math.inf
    return 2.0 * z_max / (eps * rate)


def relaxation_time_high_productivity(params: DynParams) -> float:
    """Relaxation time when productivities dominate the network coupling."""
    rate = _slow_rate(params)
    return math.inf if rate <= 0 else 2.0 / rate


def rho_top(economy: Economy) -> float:
    """Perron eigenvalue of J~ = diag(z_max - z) + J.

    This is the spectral scale entering the near-instability eigenvalue pair;
    it coincides with max z only in the limit eps -> 0.
    """
    z = economy.productivities
    j_tilde = np.diag(z.max() - z) + economy.firm_links
    return float(np.max(np.linalg.eigvals(j_tilde).real))


def predicted_relaxation_time(economy: Economy, params: DynParams,
                              eps: float | None = None) -> float:
    """Analytic relaxation time valid across regimes.

    The slowest mode is either the marginal pair (rate ~ eps/(2 rho)) or the
    high-productivity bulk (rate independent of eps); the observable
    relaxation time is set by whichever is slower.
    """
    if eps is None:
        eps = network_matrix(economy).eps
    return max(relaxation_time_analytic(params, rho_top(economy), eps),
               relaxation_time_high_productivity(params))


def marginal_eigs(params: DynParams, rho_n: float, eps: float,
                  regime: str) -> tuple[complex, complex]:
    """Closed-form eigenvalue pair in the two analytic regimes.

    ``regime`` is "high_z" (productivities dominate; pair is N-fold
    degenerate) or "low_eps" (marginal pair of the near-singular economy,
    proportional to eps / (2 rho_n)).
    """
    alpha, alpha_p, beta, beta_p = _speeds(params)
    s = alpha + alpha_p + beta_p
    disc = s * s - 4.0 * (alpha * beta + alpha_p * beta_p)
    root = complex(math.sqrt(disc)) if disc >= 0 else complex(0.0, math.sqrt(-disc))
    if regime == "high_z":
        scale = 0.5
    elif regime == "low_eps":
        scale = eps / (2.0 * rho_n)
    else:
        raise ValueError("regime must be 'high_z' or 'low_eps'")
    return (scale * (-s + root), scale * (-s - root))


def mckay_density(x: np.ndarray, d: int) -> np.ndarray:
    """Spectral density of the adjacency matrix of a random d-regular graph."""
    x = np.asarray(x, dtype=float)
    edge = 2.0 * math.sqrt(d - 1.0)
    inside = np.abs(x) < edge
    out = np.zeros_like(x)
    out[inside] = (d * np.sqrt(4.0 * (d - 1.0) - x[inside] ** 2)
                   / (2.0 * math.pi * (d * d - x[inside] ** 2)))
    return out


def _mckay_cdf_grid(d: int, n_grid: int = 4001):
    edge = 2.0 * math.sqrt(d - 1.0)
    xs = np.linspace(-edge, edge, n_grid)
    density = mckay_density(xs, d)
    cdf = np.concatenate([[0.0], np.cumsum((density[1:] + density[:-1]) * 0.5 * np.diff(xs))])
    cdf /= cdf[-1]
    return xs, cdf


def bulk_spectrum_check(economy: Economy, params: DynParams | None = None,
                        eigenvalues: np.ndarray | None = None) -> float:
    """Kolmogorov-Smirnov distance between the real parts of the spectrum of
    D and the prediction obtained by mapping the regular-graph eigenvalue
    density through the closed-form bulk eigenvalues.

    Requires an undirected d-regular economy with homogeneous productivities;
    the two marginal eigenvalues are excluded from the comparison.
    """
    params = params or economy.dyn_params
    j = economy.firm_links
    if not np.array_equal(j, j.T):
        raise ValueError("bulk spectrum prediction requires an undirected network")
    weights = np.unique(j[j > 0])
    degrees = (j > 0).sum(axis=1)
    if weights.size != 1 or weights[0] != 1.0 or np.unique(degrees).size != 1:
        raise ValueError("network must be regular with unit weights")
    if np.ptp(economy.productivities) > 1e-12:
        raise ValueError("productivities must be homogeneous")
    d_reg = int(degrees[0])

    if eigenvalues is None:
        from .equilibrium import naive_kappa, solve_leontief_crs
        eq = solve_leontief_crs(network_matrix(economy), economy.labor_needs,
                                naive_kappa(economy))
        eigenvalues = stability_matrix(economy, eq, params).eigenvalues

    alpha, alpha_p, beta, beta_p = _speeds(params)
    s_prime = alpha_p + beta_p
    disc = (alpha_p - beta_p) ** 2 - 4.0 * alpha * beta
    if disc > 0:
        coeffs = [0.5 * (-s_prime + math.sqrt(disc)), 0.5 * (-s_prime - math.sqrt(disc))]
    else:
        coeffs = [-0.5 * s_prime, -0.5 * s_prime]   # complex pair shares its real part

    xs, cdf = _mckay_cdf_grid(int(d_reg))

    def theory_cdf(t: np.ndarray, c: float) -> np.ndarray:
        if c == 0.0:
            return (t >= 0.0).astype(float)
        # T = c (1 - X/d) is increasing in X for c < 0.
        x_of_t = d_reg * (1.0 - t / c)
        return np.interp(x_of_t, xs, cdf, left=0.0, right=1.0)

    order = np.argsort(np.abs(eigenvalues))
    keep = np.ones(len(eigenvalues), dtype=bool)
    keep[order[:2]] = False                        # marginal pair is not bulk
    sample = np.sort(eigenvalues.real[keep])

    theory = 0.5 * (theory_cdf(sample, coeffs[0]) + theory_cdf(sample, coeffs[1]))
    n = sample.size
    empirical_hi = np.arange(1, n + 1) / n
    empirical_lo = np.arange(0, n) / n
    return float(max(np.max(np.abs(empirical_hi - theory)),
                     np.max(np.abs(theory - empirical_lo))))
