import numpy as np
import pytest

from firmnet.economy import network_matrix
from firmnet.equilibrium import naive_kappa, solve_leontief_crs
from firmnet.shocks import (
    noise_input_matrix,
    simulate_with_shocks,
    stationary_covariance,
)


def naive_eq(eco):
    return solve_leontief_crs(network_matrix(eco), eco.labor_needs, naive_kappa(eco))


class TestNoiseInput:
    def test_shape_and_signs(self, make_economy):
        eco = make_economy(eps=1.0, n=10, d=3, beta=0.7, beta_p=0.2)
        eq = naive_eq(eco)
        p_map = noise_input_matrix(eco, eq, eco.dyn_params)
        assert p_map.shape == (20, 10)
        assert np.all(np.diag(p_map[:10]) < 0)       # prices fall on positive shock
        assert np.all(np.diag(p_map[10:]) > 0)       # beta > beta_p: output rises

    def test_gamma_rows_vanish_when_beta_symmetric(self, make_economy):
        eco = make_economy(eps=1.0, n=10, d=3)
        eq = naive_eq(eco)
        p_map = noise_input_matrix(eco, eq, eco.dyn_params)
        assert np.all(p_map[10:] == 0.0)


class TestSimulation:
    def test_zero_noise_decays_deterministically(self, make_economy):
        eco = make_economy(eps=10.0, n=20, d=4)
        eq = naive_eq(eco)
        sim = simulate_with_shocks(eco, eq, eco.dyn_params, noise_sigma=0.0,
                                   correlation_time=0.0, t_end=50.0, seed=0, dt=0.5)
        assert sim.price_vol_rescaled == 0.0
        assert np.allclose(sim.u, 0.0)

    def test_matches_lyapunov_white(self, make_economy):
        eco = make_economy(eps=0.5, n=20, d=4)
        eq = naive_eq(eco)
        cov = stationary_covariance(eco, eq, eco.dyn_params, 1e-6, 0.0)
        rescale = np.concatenate([eq.prices_eq, eq.gammas_eq])
        exact = np.sqrt(np.mean(np.diag(cov)[:20] / rescale[:20] ** 2))
        vols = [simulate_with_shocks(eco, eq, eco.dyn_params, 1e-6, 0.0,
                                     t_end=20000.0, seed=s, dt=2.0).price_vol_rescaled
                for s in range(3)]
        assert np.mean(vols) == pytest.approx(exact, rel=0.3)

    def test_matches_lyapunov_ou(self, make_economy):
        eco = make_economy(eps=0.5, n=20, d=4)
        eq = naive_eq(eco)
        cov = stationary_covariance(eco, eq, eco.dyn_params, 1e-6, 5.0)
        rescale = np.concatenate([eq.prices_eq, eq.gammas_eq])
        exact = np.sqrt(np.mean(np.diag(cov)[:20] / rescale[:20] ** 2))
        vols = [simulate_with_shocks(eco, eq, eco.dyn_params, 1e-6, 5.0,
                                     t_end=20000.0, seed=s, dt=2.0).price_vol_rescaled
                for s in range(3)]
        assert np.mean(vols) == pytest.approx(exact, rel=0.3)

    def test_determinism(self, make_economy):
        eco = make_economy(eps=1.0, n=15, d=3)
        eq = naive_eq(eco)
        a = simulate_with_shocks(eco, eq, eco.dyn_params, 1e-8, 1.0, 100.0, seed=7, dt=1.0)
        b = simulate_with_shocks(eco, eq, eco.dyn_params, 1e-8, 1.0, 100.0, seed=7, dt=1.0)
        assert np.array_equal(a.u, b.u)

    def test_near_instability_amplification(self, make_economy):
        # sigma=1e-8 shocks at eps=1e-4 produce rescaled price volatility two
        # orders of magnitude above sigma.
        eco = make_economy(eps=1e-4)
        eq = naive_eq(eco)
        sim = simulate_with_shocks(eco, eq, eco.dyn_params, 1e-8, 1000.0,
                                   t_end=2.4e6, seed=0, dt=60.0, burn_in=4e5)
        assert 3e-7 < sim.price_vol_rescaled < 3e-6

    @pytest.mark.slow
    def test_volatility_scaling_slopes(self, make_economy):
        # Lyapunov-exact volatilities: marginal-mode content of the rescaled
        # variables scales as eps^-1/2, raw marginal projections as eps^-3/2.
        eps_values = np.array([1e-3, 1e-2, 1e-1, 1.0])
        agg, marg = [], []
        for eps in eps_values:
            eco = make_economy(eps=eps, n=100, d=3, undirected=True)
            eq = naive_eq(eco)
            cov = stationary_covariance(eco, eq, eco.dyn_params, 1e-8, 0.0)
            n = eco.n_firms
            rescale = np.concatenate([eq.prices_eq, eq.gammas_eq])
            rel_cov = cov / np.outer(rescale, rescale)
            uniform = np.ones(n) / np.sqrt(n)
            agg.append(np.sqrt(uniform @ rel_cov[:n, :n] @ uniform))
            from firmnet.stability import stability_matrix
            rep = stability_matrix(eco, eq)
            vals, vecs = np.linalg.eig(rep.d_matrix)
            v = vecs[:, np.argsort(np.abs(vals))[0]]
            marg.append(np.sqrt(np.real(np.conj(v) @ cov @ v)))
        slope_agg = np.polyfit(np.log(eps_values), np.log(agg), 1)[0]
        slope_marg = np.polyfit(np.log(eps_values), np.log(marg), 1)[0]
        assert slope_agg == pytest.approx(-0.5, abs=0.1)
        assert slope_marg == pytest.approx(-1.5, abs=0.15)
