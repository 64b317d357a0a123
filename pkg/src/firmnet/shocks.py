"""Exogenous productivity shocks on the linearised naive dynamics.

Productivity fluctuations z_i -> z_i + xi_i(t) drive the linear system
dU/dt = D U + Xi(t), with Xi built from the equilibrium point:
Xi = (-(alpha+alpha') p_eq xi / z, (beta-beta') gamma_eq xi / z).
Close to the realisability boundary the marginal eigenvalue pair of D decays
at a rate of order eps, so shocks pile up and the stationary volatility of
the rescaled prices and outputs grows like eps^(-1/2) (the raw projections
on the marginal pair like eps^(-3/2)).

Noise convention: xi_i are independent Ornstein-Uhlenbeck processes with
stationary standard deviation ``noise_sigma`` and correlation time
``correlation_time``; ``correlation_time = 0`` selects the white-noise limit
with spectral density 2 sigma^2.  The integrator uses the exact one-step
propagator of the (augmented) linear SDE, so the step size only controls the
sampling rate, not the accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from .economy import DynParams, Economy
from .equilibrium import Equilibrium
from .stability import stability_matrix

__all__ = ["ShockSimulation", "simulate_with_shocks", "stationary_covariance",
           "noise_input_matrix"]


@dataclass
class ShockSimulation:
    """Sampled linear response U(t) = (delta p, delta gamma) plus variances.

    Variances are time-variances over the samples after ``burn_in``;
    ``price_vol_rescaled`` is the square root of the mean over firms of
    Var(delta p_i / p_eq,i), and ``marginal_vols`` holds the volatilities of
    the projections of U on the two eigenvectors of D closest to marginality.
    """

    times: np.ndarray
    u: np.ndarray                      # (n_samples, 2N)
    price_vol_rescaled: float
    gamma_vol_rescaled: float
    aggregate_price_vol: float
    aggregate_gamma_vol: float
    marginal_vols: tuple[float, float]
    burn_in: float
    stats: dict = field(default_factory=dict)


def noise_input_matrix(economy: Economy, equilibrium: Equilibrium,
                       params: DynParams) -> np.ndarray:
    """(2N, N) map from productivity shocks xi to the forcing Xi of dU/dt."""
    alpha, alpha_p = params.scalar("alpha"), params.scalar("alpha_p")
    beta, beta_p = params.scalar("beta"), params.scalar("beta_p")
    z = economy.productivities
    n = economy.n_firms
    p_block = np.diag(-(alpha + alpha_p) * equilibrium.prices_eq / z)
    g_block = np.diag((beta - beta_p) * equilibrium.gammas_eq / z)
    out = np.zeros((2 * n, n))
    out[:n] = p_block
    out[n:] = g_block
    return out


def _exact_propagator(a: np.ndarray, q_c: np.ndarray, dt: float):
    """One-step transition matrix and noise covariance of a linear SDE.

    Van Loan's construction: exponentiate [[-A, Qc], [0, A^T]] dt; the lower
    right block transposed is e^(A dt) and its product with the upper right
    block is the integrated noise covariance.
    """
    n = a.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -a
    block[:n, n:] = q_c
    block[n:, n:] = a.T
    f = expm(block * dt)
    e = f[n:, n:].T
    cov = e @ f[:n, n:]
    cov = 0.5 * (cov + cov.T)
    return e, cov


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(cov)
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals)


def _augmented_system(d_matrix, p_map, noise_sigma, correlation_time):
    """Drift matrix and white-noise covariance, augmenting U with the OU xi
    when the shocks are correlated in time."""
    two_n, n = p_map.shape
    if correlation_time == 0.0:
        return d_matrix, 2.0 * noise_sigma ** 2 * (p_map @ p_map.T), two_n
    a = np.zeros((two_n + n, two_n + n))
    a[:two_n, :two_n] = d_matrix
    a[:two_n, two_n:] = p_map
    a[two_n:, two_n:] = -np.eye(n) / correlation_time
    q = np.zeros_like(a)
    q[two_n:, two_n:] = (2.0 * noise_sigma ** 2 / correlation_time) * np.eye(n)
    return a, q, two_n


def simulate_with_shocks(economy: Economy, equilibrium: Equilibrium,
                         params: DynParams, noise_sigma: float,
                         correlation_time: float, t_end: float, seed: int,
                         dt: float | None = None,
                         burn_in: float | None = None) -> ShockSimulation:
    """Integrate the shock-driven linear dynamics and report volatilities."""
    if noise_sigma < 0 or correlation_time < 0:
        raise ValueError("noise_sigma and correlation_time must be non-negative")
    report = stability_matrix(economy, equilibrium, params)
    d_matrix = report.d_matrix
    n = economy.n_firms
    p_map = noise_input_matrix(economy, equilibrium, params)

    if dt is None:
        slowest = report.tau_relax_numeric
        dt = max(min(t_end / 2000.0, slowest / 20.0), 1e-3)
    if burn_in is None:
        burn_in = t_end / 2.0

    a, q_c, two_n = _augmented_system(d_matrix, p_map, noise_sigma, correlation_time)
    propagator, cov = _exact_propagator(a, q_c, dt)
    factor = _psd_factor(cov)

    rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), 0x53484f43)))
    n_steps = max(1, int(round(t_end / dt)))
    x = np.zeros(a.shape[0])
    if correlation_time > 0 and noise_sigma > 0:
        x[two_n:] = rng.normal(0.0, noise_sigma / math.sqrt(correlation_time), n)

    times = np.empty(n_steps + 1)
    u_samples = np.empty((n_steps + 1, two_n))
    times[0] = 0.0
    u_samples[0] = x[:two_n]
    for k in range(1, n_steps + 1):
        x = propagator @ x + factor @ rng.standard_normal(a.shape[0])
        times[k] = k * dt
        u_samples[k] = x[:two_n]

    keep = times >= burn_in
    tail = u_samples[keep]
    rescale = np.concatenate([equilibrium.prices_eq, equilibrium.gammas_eq])
    rel = tail / rescale
    var_rescaled = np.var(rel, axis=0)
    price_vol = float(np.sqrt(np.mean(var_rescaled[:n])))
    gamma_vol = float(np.sqrt(np.mean(var_rescaled[n:])))
    # Marginal-mode content of the rescaled deviations: the relative marginal
    # eigenvector is asymptotically uniform, so project on 1/sqrt(N).
    agg_price = float(np.std(rel[:, :n].sum(axis=1) / math.sqrt(n)))
    agg_gamma = float(np.std(rel[:, n:].sum(axis=1) / math.sqrt(n)))

    eigvals, eigvecs = np.linalg.eig(d_matrix)
    order = np.argsort(np.abs(eigvals))
    marginal_vols = []
    for idx in order[:2]:
        vec = eigvecs[:, idx]
        series = tail @ np.conj(vec)
        marginal_vols.append(float(np.sqrt(np.var(series.real) + np.var(series.imag))))

    return ShockSimulation(
        times=times, u=u_samples,
        price_vol_rescaled=price_vol, gamma_vol_rescaled=gamma_vol,
        aggregate_price_vol=agg_price, aggregate_gamma_vol=agg_gamma,
        marginal_vols=(marginal_vols[0], marginal_vols[1]),
        burn_in=burn_in,
        stats={"dt": dt, "eps_eigenvalue": complex(eigvals[order[0]]),
               "n_samples": int(tail.shape[0])})


def stationary_covariance(economy: Economy, equilibrium: Equilibrium,
                          params: DynParams, noise_sigma: float,
                          correlation_time: float) -> np.ndarray:
    """Exact stationary covariance of U from the Lyapunov equation.

    Independent cross-check for the simulated time-variances: solves
    A S + S A^T + Q = 0 for the (possibly OU-augmented) system and returns
    the (2N, 2N) block for U.
    """
    d_matrix = stability_matrix(economy, equilibrium, params).d_matrix
    p_map = noise_input_matrix(economy, equilibrium, params)
    a, q_c, two_n = _augmented_system(d_matrix, p_map, noise_sigma, correlation_time)
    full = solve_continuous_lyapunov(a, -q_c)
    return full[:two_n, :two_n]
