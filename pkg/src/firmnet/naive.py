"""Naive continuous-time tatonnement dynamics.

Prices fall with excess supply and with positive profits (competition);
production levels rise with profits and fall with excess supply.  Imbalances
are normalised by sales and production, which makes the competitive
equilibrium an exact fixed point of the flow.  The household consumes its
full-time wage income (C_i = mu theta_i / p_i with mu = L0 / theta_bar and
the wage fixed to 1), so the matching equilibrium is the one computed with
``naive_kappa``.

The model is restricted to constant-return Leontief technology and
firm-independent adjustment speeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .economy import DynParams, Economy, network_matrix

__all__ = ["NaiveState", "NaiveTrajectory", "naive_rhs", "integrate_naive",
           "perturbed_state"]

DIVERGENCE_CAP = 1e12


@dataclass(frozen=True)
class NaiveState:
    """Prices and production levels at one instant."""

    prices: np.ndarray
    gammas: np.ndarray
    time: float = 0.0


@dataclass
class NaiveTrajectory:
    """Recorded integration output; ``status`` is "ok" or "diverged"."""

    times: np.ndarray
    prices: np.ndarray    # (n_records, N)
    gammas: np.ndarray    # (n_records, N)
    status: str
    halt_time: float | None = None

    @property
    def final_state(self) -> NaiveState:
        return NaiveState(prices=self.prices[-1], gammas=self.gammas[-1],
                          time=float(self.times[-1]))


class _NaiveContext:
    """Precomputed arrays for fast right-hand-side evaluation."""

    def __init__(self, economy: Economy, params: DynParams):
        self.m = network_matrix(economy).m
        self.z = economy.productivities
        self.v = economy.labor_needs
        self.theta = economy.preferences_theta0
        self.mu = economy.labor_scale_L0 / float(np.sum(self.theta))
        # The naive model uses firm-independent adjustment speeds.
        self.alpha = params.scalar("alpha")
        self.alpha_p = params.scalar("alpha_p")
        self.beta = params.scalar("beta")
        self.beta_p = params.scalar("beta_p")

    def rhs(self, p: np.ndarray, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        excess = g @ self.m - self.mu * self.theta / p
        profit = self.m @ p - self.v
        dp = (-self.alpha * p * excess - self.alpha_p * g * profit) / (self.z * g)
        dg = (self.beta * g * profit - self.beta_p * p * excess) / (self.z * p)
        return dp, dg


def naive_rhs(state: NaiveState, economy: Economy,
              params: DynParams | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives (dp/dt, dgamma/dt) of the naive tatonnement flow."""
    ctx = _NaiveContext(economy, params or economy.dyn_params)
    return ctx.rhs(np.asarray(state.prices, dtype=float),
                   np.asarray(state.gammas, dtype=float))


def default_dt(params: DynParams) -> float:
    fastest = max(params.scalar("alpha"), params.scalar("alpha_p"),
                  params.scalar("beta"), params.scalar("beta_p"))
    if fastest <= 0:
        return 0.01
    return min(0.01, 0.01 / fastest)


def integrate_naive(state0: NaiveState, params: DynParams, economy: Economy,
                    t_end: float, dt: float | None = None,
                    record_stride: int = 1) -> NaiveTrajectory:
    """Fixed-step RK4 integration of the naive dynamics.

    Halts with status "diverged" (not an exception) as soon as any component
    leaves (0, 1e12) or becomes non-finite; this model genuinely blows up
    away from equilibrium or for unrealisable economies, so a bounded halt
    is the intended contract.
    """
    if dt is None:
        dt = default_dt(params)
    if dt <= 0:
        raise ValueError("dt must be positive")
    ctx = _NaiveContext(economy, params)
    n_steps = max(1, int(round(t_end / dt)))
    p = np.array(state0.prices, dtype=float)
    g = np.array(state0.gammas, dtype=float)
    t = float(state0.time)

    times = [t]
    prices = [p.copy()]
    gammas = [g.copy()]
    status = "ok"
    halt_time = None

    for step in range(1, n_steps + 1):
        kp1, kg1 = ctx.rhs(p, g)
        kp2, kg2 = ctx.rhs(p + 0.5 * dt * kp1, g + 0.5 * dt * kg1)
        kp3, kg3 = ctx.rhs(p + 0.5 * dt * kp2, g + 0.5 * dt * kg2)
        kp4, kg4 = ctx.rhs(p + dt * kp3, g + dt * kg3)
        p = p + dt / 6.0 * (kp1 + 2 * kp2 + 2 * kp3 + kp4)
        g = g + dt / 6.0 * (kg1 + 2 * kg2 + 2 * kg3 + kg4)
        t = state0.time + step * dt
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(g))
                and np.all(p > 0) and np.all(g > 0)
                and p.max() < DIVERGENCE_CAP and g.max() < DIVERGENCE_CAP):
            status = "diverged"
            halt_time = t
            times.append(t)
            prices.append(p.copy())
            gammas.append(g.copy())
            break
        if step % record_stride == 0 or step == n_steps:
            times.append(t)
            prices.append(p.copy())
            gammas.append(g.copy())

    return NaiveTrajectory(times=np.asarray(times), prices=np.asarray(prices),
                           gammas=np.asarray(gammas), status=status,
                           halt_time=halt_time)


def perturbed_state(prices_eq: np.ndarray, gammas_eq: np.ndarray, delta: float,
                    seed: int) -> NaiveState:
    """Equilibrium state with iid uniform relative perturbations of size delta."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), 0x50455254)))
    n = len(prices_eq)
    p = prices_eq * (1.0 + delta * rng.uniform(-1.0, 1.0, n))
    g = gammas_eq * (1.0 + delta * rng.uniform(-1.0, 1.0, n))
    return NaiveState(prices=p, gammas=g, time=0.0)
