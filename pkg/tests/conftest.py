import numpy as np
import pytest

from firmnet.economy import (
    DynParams,
    Economy,
    build_regular_network,
    build_undirected_regular_network,
    calibrate_epsilon,
)


def standard_economy(eps, n=100, d=15, seed=0, alpha=0.5, alpha_p=None, beta=None,
                     beta_p=None, omega=0.1, omega_p=None, sigma=0.1, b=1.0, q=0.0,
                     undirected=False, phi=1.0, lambda_forecast=1.0):
    """Regular-network economy in the style of the reference simulations."""
    rng = np.random.default_rng(seed)
    builder = build_undirected_regular_network if undirected else build_regular_network
    links = builder(n, d, seed=seed)
    theta = rng.uniform(0.0, 1.0, n)
    theta = theta / theta.sum()
    dyn = DynParams(
        alpha=alpha,
        alpha_p=alpha if alpha_p is None else alpha_p,
        beta=alpha if beta is None else beta,
        beta_p=alpha if beta_p is None else beta_p,
        omega=omega,
        omega_p=omega if omega_p is None else omega_p,
        sigma=sigma,
        lambda_forecast=lambda_forecast,
    )
    eco = Economy(links=links, substitution=None, productivities=np.ones(n),
                  elasticity=q, returns_b=b, preferences_theta0=theta,
                  frisch_phi=phi, dyn_params=dyn)
    return calibrate_epsilon(eco, eps)


@pytest.fixture
def make_economy():
    return standard_economy
