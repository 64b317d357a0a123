"""Static description of a firm-network economy.

An economy is a directed technology network between N firms plus a
representative household (node 0 supplies labour and consumes goods), a CES
production technology, and the behavioural parameters driving the dynamics.
Everything in this module is immutable after construction; the dynamical
modules consume it read-only.

Conventions used throughout the package:

* augmented matrices have shape (N, N+1) with column 0 reserved for labour,
  so ``links[i, 0]`` is the labour requirement V_i of firm i and
  ``links[i, 1 + j]`` the amount of good j needed per unit of production
  level of firm i;
* the network matrix is ``M = diag(z) - J`` on the firm block, and its
  smallest eigenvalue (real part) ``eps`` measures the distance to the
  realisability boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import networkx as nx

__all__ = [
    "Elasticity",
    "DynParams",
    "Economy",
    "NetworkMatrix",
    "build_regular_network",
    "build_undirected_regular_network",
    "production",
    "production_all",
    "optimal_quantities",
    "optimal_quantities_all",
    "network_matrix",
    "calibrate_epsilon",
    "hawkins_simon_check",
]

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Elasticity:
    """Input-substitution regime of the production function.

    Stored as a tagged value rather than a raw float so the three branches
    (Leontief q=0, finite CES q>0, Cobb-Douglas q=inf) are explicit and never
    approximated through floating-point limits.
    """

    q: float

    def __post_init__(self):
        if not (self.q >= 0.0):
            raise ValueError(f"substitution elasticity q must be >= 0, got {self.q}")

    @classmethod
    def leontief(cls) -> "Elasticity":
        return cls(0.0)

    @classmethod
    def finite(cls, q: float) -> "Elasticity":
        if not (0.0 < q < math.inf):
            raise ValueError("finite elasticity requires 0 < q < inf")
        return cls(float(q))

    @classmethod
    def cobb_douglas(cls) -> "Elasticity":
        return cls(math.inf)

    @property
    def is_leontief(self) -> bool:
        return self.q == 0.0

    @property
    def is_cobb_douglas(self) -> bool:
        return math.isinf(self.q)

    @property
    def zeta(self) -> float:
        """CES exponent zeta = 1/(1+q); equals 1 for Leontief, 0 for Cobb-Douglas."""
        if self.is_cobb_douglas:
            return 0.0
        return 1.0 / (1.0 + self.q)


def _as_elasticity(q) -> Elasticity:
    return q if isinstance(q, Elasticity) else Elasticity(float(q))


@dataclass(frozen=True)
class DynParams:
    """Adjustment speeds of the tatonnement rules.

    ``alpha``/``alpha_p`` couple prices to excess supply and profits,
    ``beta``/``beta_p`` couple production targets to profits and excess
    supply, ``omega`` is the Phillips-curve wage coupling and ``omega_p`` the
    consumption-confidence coupling.  ``sigma`` is the perishability of each
    good (np.inf means the good decays completely within one step) and
    ``lambda_forecast`` mixes posted and realized demands in the firms'
    forecasts (1 = purely sticky on posted demands).

    ``alpha``..``beta_p`` and ``sigma`` may be scalars or per-firm vectors.
    """

    alpha: float | np.ndarray = 0.5
    alpha_p: float | np.ndarray = 0.5
    beta: float | np.ndarray = 0.5
    beta_p: float | np.ndarray = 0.5
    omega: float = 0.1
    omega_p: float = 0.1
    sigma: float | np.ndarray = 0.1
    lambda_forecast: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "alpha_p", "beta", "beta_p", "sigma"):
            value = np.asarray(getattr(self, name), dtype=float)
            if np.any(value < 0):
                raise ValueError(f"{name} must be non-negative")
            object.__setattr__(self, name, value if value.ndim else float(value))
        if self.omega < 0 or self.omega_p < 0:
            raise ValueError("omega and omega_p must be non-negative")
        if not 0.0 <= self.lambda_forecast <= 1.0:
            raise ValueError("lambda_forecast must lie in [0, 1]")

    def firm_vector(self, name: str, n: int) -> np.ndarray:
        """Per-firm array for one of the vectorisable parameters."""
        value = np.asarray(getattr(self, name), dtype=float)
        if value.ndim == 0:
            return np.full(n, float(value))
        if value.shape != (n,):
            raise ValueError(f"{name} has shape {value.shape}, expected ({n},)")
        return value

    def scalar(self, name: str) -> float:
        """Scalar value of a parameter; raises if it is firm-heterogeneous."""
        value = np.asarray(getattr(self, name), dtype=float)
        if value.ndim == 0:
            return float(value)
        if np.ptp(value) == 0.0:
            return float(value.flat[0])
        raise ValueError(f"{name} is firm-heterogeneous; a scalar is required here")


@dataclass(frozen=True)
class Economy:
    """Immutable model instance: network, technology and household block."""

    links: np.ndarray                      # (N, N+1), column 0 = labour needs V
    substitution: np.ndarray               # (N, N+1), rows sum to 1
    productivities: np.ndarray             # (N,) > 0
    elasticity: Elasticity = field(default_factory=Elasticity.leontief)
    returns_b: float = 1.0
    preferences_theta0: np.ndarray | None = None   # (N,) > 0, sums to 1
    frisch_phi: float = 1.0                # inf = inelastic labour supply
    labor_scale_L0: float = 1.0
    work_aversion_Gamma: float = 1.0
    dyn_params: DynParams = field(default_factory=DynParams)

    def __post_init__(self):
        links = np.array(self.links, dtype=float)
        if links.ndim != 2 or links.shape[1] != links.shape[0] + 1:
            raise ValueError("links must have shape (N, N+1)")
        n = links.shape[0]
        if np.any(links < 0):
            raise ValueError("links must be non-negative")
        if np.any(np.diagonal(links[:, 1:]) != 0):
            raise ValueError("links must have a zero diagonal (no self-input)")
        if np.any(links.sum(axis=1) == 0):
            raise ValueError("every firm needs at least one input (labour counts)")
        links.setflags(write=False)
        object.__setattr__(self, "links", links)

        sub = self.substitution
        if sub is None:
            row_sums = links.sum(axis=1, keepdims=True)
            sub = links / row_sums
        sub = np.array(sub, dtype=float)
        if sub.shape != links.shape:
            raise ValueError("substitution must have the same shape as links")
        if np.any(sub < 0):
            raise ValueError("substitution weights must be non-negative")
        if np.any(np.abs(sub.sum(axis=1) - 1.0) > _ROW_SUM_TOL):
            raise ValueError("every substitution row must sum to 1")
        sub.setflags(write=False)
        object.__setattr__(self, "substitution", sub)

        z = np.array(self.productivities, dtype=float)
        if z.shape != (n,) or np.any(z <= 0):
            raise ValueError("productivities must be a positive length-N vector")
        z.setflags(write=False)
        object.__setattr__(self, "productivities", z)

        theta = self.preferences_theta0
        if theta is None:
            theta = np.full(n, 1.0 / n)
        theta = np.array(theta, dtype=float)
        if theta.shape != (n,) or np.any(theta <= 0):
            raise ValueError("preferences_theta0 must be a positive length-N vector")
        if abs(theta.sum() - 1.0) > _ROW_SUM_TOL:
            raise ValueError("preferences_theta0 must sum to 1")
        theta.setflags(write=False)
        object.__setattr__(self, "preferences_theta0", theta)

        object.__setattr__(self, "elasticity", _as_elasticity(self.elasticity))
        if not self.returns_b > 0:
            raise ValueError("returns_b must be positive")
        if not self.frisch_phi > 0:
            raise ValueError("frisch_phi must be positive (inf allowed)")
        if not self.labor_scale_L0 > 0 or not self.work_aversion_Gamma > 0:
            raise ValueError("labor_scale_L0 and work_aversion_Gamma must be positive")

    @property
    def n_firms(self) -> int:
        return self.links.shape[0]

    @property
    def labor_needs(self) -> np.ndarray:
        """V_i = links[i, 0]."""
        return self.links[:, 0]

    @property
    def firm_links(self) -> np.ndarray:
        """Firm-to-firm block J (N, N)."""
        return self.links[:, 1:]

    def with_productivities(self, z: np.ndarray) -> "Economy":
        return replace(self, productivities=np.asarray(z, dtype=float))

    def with_dyn_params(self, dyn: DynParams) -> "Economy":
        return replace(self, dyn_params=dyn)


@dataclass(frozen=True)
class NetworkMatrix:
    """M = diag(z) - J together with the smallest real part of its spectrum."""

    m: np.ndarray
    eps: float


def build_regular_network(n: int, d: int, seed: int, weight: float = 1.0) -> np.ndarray:
    """Random d-regular directed graph as an augmented links matrix.

    Every firm gets exactly ``d`` suppliers and ``d`` clients among the other
    firms, no self-loops and no repeated edges; all present links (including
    the labour column) carry ``weight``.  Built by pairing out-stubs with a
    shuffled list of in-stubs, then repairing conflicting pairs by random
    swaps; on the rare failure to repair, the construction restarts with a
    fresh sub-seed, so the result is deterministic in ``seed``.
    """
    if n <= 0 or d <= 0:
        raise ValueError("n and d must be positive")
    if d >= n:
        raise ValueError(f"need d < n for a simple regular digraph, got d={d}, n={n}")
    if weight <= 0:
        raise ValueError("weight must be positive")

    seq = np.random.SeedSequence(entropy=(int(seed), 0x52454755))
    for attempt_seq in seq.spawn(64):
        rng = np.random.default_rng(attempt_seq)
        sources = np.repeat(np.arange(n), d)
        targets = np.repeat(np.arange(n), d)
        rng.shuffle(targets)
        adjacency = _repair_pairing(sources, targets, n, rng)
        if adjacency is not None:
            links = np.zeros((n, n + 1))
            links[:, 0] = weight
            links[:, 1:] = weight * adjacency
            return links
    raise RuntimeError("failed to realise a regular digraph; try another seed")


def _repair_pairing(sources, targets, n, rng, max_rounds: int = 500):
    """Swap conflicting stub pairs until the edge set is simple, or give up."""
    m = len(sources)
    for _ in range(max_rounds):
        keys = sources * n + targets
        order = np.argsort(keys, kind="stable")
        duplicate = np.zeros(m, dtype=bool)
        duplicate[order[1:]] = keys[order[1:]] == keys[order[:-1]]
        bad = np.flatnonzero((sources == targets) | duplicate)
        if bad.size == 0:
            adjacency = np.zeros((n, n))
            adjacency[sources, targets] = 1.0
            return adjacency
        partners = rng.integers(0, m, size=bad.size)
        for k, j in zip(bad, partners):
            targets[k], targets[j] = targets[j], targets[k]
    return None


def build_undirected_regular_network(n: int, d: int, seed: int, weight: float = 1.0) -> np.ndarray:
    """Random d-regular undirected graph (symmetric links matrix).

    Used for the spectral checks that assume a symmetric network matrix.
    """
    if d >= n:
        raise ValueError(f"need d < n, got d={d}, n={n}")
    if (n * d) % 2 != 0:
        raise ValueError("n*d must be even for an undirected regular graph")
    graph = nx.random_regular_graph(d, n, seed=int(seed))
    adjacency = nx.to_numpy_array(graph)
    links = np.zeros((n, n + 1))
    links[:, 0] = weight
    links[:, 1:] = weight * adjacency
    return links


def production(z: float, b: float, q, a_row: np.ndarray, j_row: np.ndarray,
               inputs: np.ndarray) -> float:
    """Output of one firm given available inputs (labour at index 0).

    Leontief output is z * (min_j inputs_j / J_j)^b over required inputs; a
    missing required input gives zero output, which is a legitimate state of
    the world, not an error.
    """
    elasticity = _as_elasticity(q)
    inputs = np.asarray(inputs, dtype=float)
    j_row = np.asarray(j_row, dtype=float)
    a_row = np.asarray(a_row, dtype=float)
    if np.any(inputs < 0):
        raise ValueError("inputs must be non-negative")
    support = j_row > 0
    if not support.any():
        raise ValueError("firm has no required inputs")
    ratios = inputs[support] / j_row[support]

    weights = a_row[support]
    if elasticity.is_leontief:
        return float(z * np.min(ratios) ** b)
    if elasticity.is_cobb_douglas:
        return float(z * np.prod(ratios ** weights) ** b)
    if np.any((ratios == 0) & (weights > 0)):
        return 0.0
    return float(z * np.exp(economy_level_log(weights, ratios, elasticity.q)) ** b)


def economy_level_log(weights: np.ndarray, ratios: np.ndarray, q: float) -> float:
    """log of the CES aggregator (sum_j a_j r_j^(-1/q))^(-q), via log-sum-exp.

    Stable for q near 0 where the raw powers overflow long before the
    aggregator itself leaves floating-point range.
    """
    active = weights > 0
    x = -np.log(ratios[active]) / q
    m = np.max(x)
    return -q * (m + np.log(np.sum(weights[active] * np.exp(x - m))))


def production_all(economy: Economy, available: np.ndarray) -> np.ndarray:
    """Vectorised production of all firms from an (N, N+1) matrix of inputs."""
    j = economy.links
    a = economy.substitution
    z = economy.productivities
    b = economy.returns_b
    elasticity = economy.elasticity
    support = j > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(support, available / np.where(support, j, 1.0), np.nan)

    if elasticity.is_leontief:
        level = np.nanmin(ratios, axis=1)
        return z * level ** b
    if elasticity.is_cobb_douglas:
        log_ratio = np.where(support & (ratios > 0), np.log(np.where(ratios > 0, ratios, 1.0)), 0.0)
        zero_input = support & (ratios <= 0) & (a > 0)
        out = z * np.exp(b * np.sum(a * log_ratio, axis=1))
        out[np.any(zero_input, axis=1)] = 0.0
        return out
    active = support & (a > 0)
    starved = np.any(active & (ratios == 0), axis=1)
    q_inv = 1.0 / elasticity.q
    x = np.where(active & (ratios > 0), -np.log(np.where(ratios > 0, ratios, 1.0)) * q_inv, -np.inf)
    m = np.max(x, axis=1)
    safe_m = np.where(np.isfinite(m), m, 0.0)
    terms = np.where(active, a * np.exp(x - safe_m[:, None]), 0.0)
    log_level = -elasticity.q * (safe_m + np.log(np.sum(terms, axis=1)))
    out = z * np.exp(b * log_level)
    out[starved] = 0.0
    return out


def optimal_quantities(target_gamma_hat: float, prices: np.ndarray, economy: Economy,
                       firm: int) -> np.ndarray:
    """Cost-minimising input bundle of one firm for a production-level target.

    ``prices`` is the augmented price vector (wage at index 0).  For Leontief
    technology the bundle is simply J_i * gamma_hat^(1/b); the general CES
    bundle follows from the first-order conditions of the cost minimisation.
    """
    if target_gamma_hat < 0:
        raise ValueError("production target must be non-negative")
    targets = np.zeros(economy.n_firms)
    targets[firm] = target_gamma_hat
    return optimal_quantities_all(targets, prices, economy)[firm]


def optimal_quantities_all(targets_gamma_hat: np.ndarray, prices: np.ndarray,
                           economy: Economy) -> np.ndarray:
    """Cost-minimising bundles of every firm, (N, N+1) with labour column 0."""
    prices = np.asarray(prices, dtype=float)
    if prices.shape != (economy.n_firms + 1,):
        raise ValueError("prices must be the augmented vector of length N+1")
    if np.any(prices <= 0):
        raise ValueError("prices must be strictly positive")
    targets = np.asarray(targets_gamma_hat, dtype=float)
    if np.any(targets < 0):
        raise ValueError("production targets must be non-negative")

    j = economy.links
    a = economy.substitution
    elasticity = economy.elasticity
    scale = targets ** (1.0 / economy.returns_b)
    support = j > 0

    if elasticity.is_leontief:
        return j * scale[:, None]

    if elasticity.is_cobb_douglas:
        # Q_ik = a_ik / p_k * prod_j (J_ij p_j / a_ij)^a_ij * gamma^(1/b)
        log_terms = np.where(support, np.log(np.where(support, j, 1.0))
                             + np.log(prices)[None, :]
                             - np.log(np.where(support, a, 1.0)), 0.0)
        log_cost_index = np.sum(a * log_terms * support, axis=1)
        bundle = np.where(support, a / prices[None, :], 0.0) * np.exp(log_cost_index)[:, None]
        return bundle * scale[:, None]

    zeta = elasticity.zeta
    q = elasticity.q
    lam = np.where(support, a ** (q * zeta) * np.where(support, j, 1.0) ** zeta, 0.0)
    p_zeta = prices ** zeta
    net_price = lam @ p_zeta                      # sum_j Lambda_ij p_j^zeta
    bundle = lam * prices[None, :] ** (-q * zeta) * net_price[:, None] ** q
    return np.where(support, bundle, 0.0) * scale[:, None]


def network_matrix(economy: Economy) -> NetworkMatrix:
    """Leontief network matrix M = diag(z) - J and its smallest eigenvalue."""
    m = np.diag(economy.productivities) - economy.firm_links
    eps = float(np.min(np.linalg.eigvals(m).real))
    return NetworkMatrix(m=m, eps=eps)


def calibrate_epsilon(economy: Economy, eps_target: float) -> Economy:
    """Shift all productivities so the network matrix has smallest eigenvalue
    ``eps_target``; negative targets (unstable economies) are allowed as long
    as the shifted productivities stay positive."""
    current = network_matrix(economy).eps
    z_new = economy.productivities + (eps_target - current)
    if np.any(z_new <= 0):
        raise ValueError(
            f"calibration to eps={eps_target} would require non-positive productivity")
    return economy.with_productivities(z_new)


def hawkins_simon_check(nm: NetworkMatrix) -> bool:
    """True iff M is an M-matrix, i.e. a realisable equilibrium can exist."""
    return nm.eps > 0.0
