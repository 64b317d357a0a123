"""Run configuration: schema, defaults, seeding and economy construction.

A run is fully described by one JSON document.  Unknown keys are rejected,
every field is validated, and the resolved configuration (defaults filled
in) is embedded in all outputs together with a stable fingerprint, so any
artifact can be reproduced from itself.  The master seed expands into named
sub-seeds (network, preferences, parameter draws, initial perturbation,
shocks, sweep cells) through a counter-based splitter, so changing e.g. the
perturbation seed never reshuffles the network.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .economy import (
    DynParams,
    Economy,
    Elasticity,
    build_regular_network,
    build_undirected_regular_network,
    calibrate_epsilon,
)
from .phases import ClassifierThresholds

__all__ = ["RunConfig", "ConfigError", "parse_config", "resolve_config",
           "fingerprint", "sub_seed", "build_economy", "economy_to_config_dict",
           "SEED_BLOCKS"]

SEED_BLOCKS = {"network": 1, "theta": 2, "dyn": 3, "init": 4, "shocks": 5, "cell": 6}

# Scalar, [lo, hi] uniform per-firm draw, or {"per_firm": [...]} explicit values.
Interval = float | tuple[float, float] | list[float] | dict[str, list]


class ConfigError(ValueError):
    """Invalid run configuration, with the offending field path."""


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NetworkConfig(_Block):
    n: int = 100
    d: int = 15
    weight: float = 1.0
    undirected: bool = False
    links: list[list[float]] | None = None   # explicit (N, N+1) matrix overrides n/d

    @field_validator("n", "d")
    @classmethod
    def _positive(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v


class ProductionConfig(_Block):
    q: float | Literal["inf"] = 0.0
    b: float = 0.95

    @field_validator("q")
    @classmethod
    def _q_range(cls, v):
        if v != "inf" and v < 0:
            raise ValueError("q must be >= 0 or 'inf'")
        return v

    @field_validator("b")
    @classmethod
    def _b_range(cls, v):
        if not 0 < v:
            raise ValueError("b must be positive")
        return v


class DynConfig(_Block):
    alpha: Interval = 0.5
    alpha_p: Interval | None = None      # default: same as alpha
    beta: Interval | None = None
    beta_p: Interval | None = None
    omega: float = 0.1
    omega_p: float | None = None         # default: same as omega
    sigma: Interval | Literal["inf"] = 0.1
    lambda_forecast: float = 1.0


class HouseholdConfig(_Block):
    theta0: Literal["random", "uniform"] | list[float] = "random"
    phi: float | Literal["inf"] = 1.0
    L0: float = 1.0
    Gamma: float = 1.0


class ProductivityConfig(_Block):
    base: float | list[float] = 1.0
    heterogeneous: tuple[float, float] | None = None   # uniform interval draw


class RunBlock(_Block):
    T: int = 5000
    delta: float = 1e-3
    seeds: list[int] = Field(default_factory=lambda: [0])
    window: int | None = None
    stride: int = 1


class SweepAxis(_Block):
    name: str
    values: list[float | Literal["inf", "-inf"]]


class SweepBlock(_Block):
    axis1: SweepAxis
    axis2: SweepAxis


class VolatilityBlock(_Block):
    noise_sigma: float = 1e-8
    correlation_time: float = 1000.0
    t_end: float = 2.4e6
    dt: float | None = None
    burn_in: float | None = None


class NaiveBlock(_Block):
    t_end: float = 100.0
    dt: float | None = None
    record_stride: int = 1


class RunConfig(_Block):
    seed: int = 0
    epsilon: float | None = 10.0
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    production: ProductionConfig = Field(default_factory=ProductionConfig)
    productivities: ProductivityConfig = Field(default_factory=ProductivityConfig)
    dyn: DynConfig = Field(default_factory=DynConfig)
    household: HouseholdConfig = Field(default_factory=HouseholdConfig)
    run: RunBlock = Field(default_factory=RunBlock)
    sweep: SweepBlock | None = None
    volatility: VolatilityBlock = Field(default_factory=VolatilityBlock)
    naive: NaiveBlock = Field(default_factory=NaiveBlock)
    thresholds: dict | None = None

    def classifier_thresholds(self) -> ClassifierThresholds:
        if not self.thresholds:
            return ClassifierThresholds()
        return ClassifierThresholds(**self.thresholds)


def parse_config(document: str | bytes | dict) -> RunConfig:
    """Validate a JSON document (or dict) into a RunConfig."""
    try:
        if isinstance(document, (str, bytes)):
            payload = json.loads(document)
        else:
            payload = document
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    try:
        config = RunConfig.model_validate(payload)
    except Exception as exc:
        raise ConfigError(_format_validation_error(exc)) from exc
    if config.network.links is None and config.network.d >= config.network.n:
        raise ConfigError("network.d: must be smaller than network.n")
    return config


def _format_validation_error(exc) -> str:
    errors = getattr(exc, "errors", None)
    if errors is None:
        return str(exc)
    parts = []
    for err in errors():
        path = ".".join(str(p) for p in err.get("loc", ()))
        parts.append(f"{path}: {err.get('msg', 'invalid')}")
    return "; ".join(parts) or str(exc)


def resolve_config(config: RunConfig) -> dict:
    """Fully-resolved plain dict (defaults applied, infinities as 'inf')."""

    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in sorted(obj.items())}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, float):
            if math.isinf(obj):
                return "inf" if obj > 0 else "-inf"
            return obj
        return obj

    return clean(config.model_dump(mode="python"))


def fingerprint(config: RunConfig) -> str:
    """Stable hash of the resolved configuration."""
    canonical = json.dumps(resolve_config(config), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def sub_seed(master: int, block: str, index: int = 0) -> int:
    """Named, order-independent child seed of the master seed."""
    seq = np.random.SeedSequence(entropy=(int(master), SEED_BLOCKS[block], int(index)))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> 1)


def _as_float(value) -> float:
    if value == "inf":
        return math.inf
    if value == "-inf":
        return -math.inf
    return float(value)


def _resolve_interval(value, n: int, rng: np.random.Generator, name: str = "parameter"):
    """Scalar stays scalar; [lo, hi] becomes an iid uniform per-firm draw;
    {"per_firm": [...]} passes explicit per-firm values through."""
    if value is None:
        return None
    if isinstance(value, dict):
        values = value.get("per_firm")
        if values is None or len(values) != n:
            raise ConfigError(f"{name}.per_firm must list exactly {n} values")
        return np.asarray([_as_float(v) for v in values])
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{name}: interval must be [lo, hi]")
        lo, hi = float(value[0]), float(value[1])
        if lo < 0 or hi < lo:
            raise ConfigError(f"{name}: need 0 <= lo <= hi")
        return rng.uniform(lo, hi, n)
    value = _as_float(value)
    if value < 0:
        raise ConfigError(f"{name}: must be non-negative")
    return value


def build_economy(config: RunConfig) -> Economy:
    """Construct the calibrated economy described by the configuration."""
    net = config.network
    if net.links is not None:
        links = np.asarray(net.links, dtype=float)
        n = links.shape[0]
    else:
        n = net.n
        builder = build_undirected_regular_network if net.undirected else build_regular_network
        links = builder(net.n, net.d, seed=sub_seed(config.seed, "network"),
                        weight=net.weight)

    theta_rng = np.random.default_rng(sub_seed(config.seed, "theta"))
    if config.household.theta0 == "random":
        theta = theta_rng.uniform(0.0, 1.0, n)
        theta = theta / theta.sum()
    elif config.household.theta0 == "uniform":
        theta = np.full(n, 1.0 / n)
    else:
        theta = np.asarray(config.household.theta0, dtype=float)
        if abs(theta.sum() - 1.0) > 1e-12:
            theta = theta / theta.sum()

    dyn_rng = np.random.default_rng(sub_seed(config.seed, "dyn"))
    dc = config.dyn
    alpha = _resolve_interval(dc.alpha, n, dyn_rng, "dyn.alpha")
    alpha_p = _resolve_interval(dc.alpha_p, n, dyn_rng, "dyn.alpha_p")
    beta = _resolve_interval(dc.beta, n, dyn_rng, "dyn.beta")
    beta_p = _resolve_interval(dc.beta_p, n, dyn_rng, "dyn.beta_p")
    sigma = _resolve_interval(dc.sigma, n, dyn_rng, "dyn.sigma")
    dyn = DynParams(
        alpha=alpha,
        alpha_p=alpha if alpha_p is None else alpha_p,
        beta=alpha if beta is None else beta,
        beta_p=alpha if beta_p is None else beta_p,
        omega=dc.omega,
        omega_p=dc.omega if dc.omega_p is None else dc.omega_p,
        sigma=sigma,
        lambda_forecast=dc.lambda_forecast,
    )

    prod = config.productivities
    if prod.heterogeneous is not None:
        lo, hi = prod.heterogeneous
        z = dyn_rng.uniform(lo, hi, n)
    elif isinstance(prod.base, list):
        z = np.asarray(prod.base, dtype=float)
    else:
        z = np.full(n, float(prod.base))

    economy = Economy(
        links=links,
        substitution=None,
        productivities=z,
        elasticity=Elasticity(_as_float(config.production.q)),
        returns_b=config.production.b,
        preferences_theta0=theta,
        frisch_phi=_as_float(config.household.phi),
        labor_scale_L0=config.household.L0,
        work_aversion_Gamma=config.household.Gamma,
        dyn_params=dyn,
    )
    if config.epsilon is not None:
        economy = calibrate_epsilon(economy, config.epsilon)
    return economy


def _encode_value(value):
    arr = np.asarray(value, dtype=float)
    if arr.ndim > 0:
        if not np.all(arr == arr.flat[0]):
            return {"per_firm": [("inf" if math.isinf(v) else float(v)) for v in arr]}
        arr = arr.flat[0]
    scalar = float(arr)
    return "inf" if math.isinf(scalar) else scalar


def economy_to_config_dict(economy: Economy) -> dict:
    """Explicit (draw-free) configuration document reproducing this economy.

    The resulting dict parses back through ``parse_config`` /
    ``build_economy`` into an identical Economy: the network, preferences,
    productivities and any per-firm parameter draws are stored verbatim, so
    no seed expansion happens on reload.
    """
    dyn = economy.dyn_params
    q = economy.elasticity.q
    return {
        "seed": 0,
        "epsilon": None,
        "network": {"links": economy.links.tolist(), "n": economy.n_firms,
                    "d": 1, "weight": 1.0},
        "production": {"q": "inf" if math.isinf(q) else q, "b": economy.returns_b},
        "productivities": {"base": economy.productivities.tolist()},
        "household": {"theta0": economy.preferences_theta0.tolist(),
                      "phi": "inf" if math.isinf(economy.frisch_phi) else economy.frisch_phi,
                      "L0": economy.labor_scale_L0,
                      "Gamma": economy.work_aversion_Gamma},
        "dyn": {"alpha": _encode_value(dyn.alpha),
                "alpha_p": _encode_value(dyn.alpha_p),
                "beta": _encode_value(dyn.beta),
                "beta_p": _encode_value(dyn.beta_p),
                "omega": dyn.omega, "omega_p": dyn.omega_p,
                "sigma": _encode_value(dyn.sigma),
                "lambda_forecast": dyn.lambda_forecast},
    }
