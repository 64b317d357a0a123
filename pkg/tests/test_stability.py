import math

import numpy as np
import pytest

from firmnet.economy import DynParams, network_matrix
from firmnet.equilibrium import naive_kappa, solve_leontief_crs
from firmnet.stability import (
    bulk_spectrum_check,
    marginal_eigs,
    mckay_density,
    predicted_relaxation_time,
    relaxation_time_analytic,
    relaxation_time_high_productivity,
    rho_top,
    stability_matrix,
)


def naive_eq(eco):
    return solve_leontief_crs(network_matrix(eco), eco.labor_needs, naive_kappa(eco))


class TestStabilityMatrix:
    def test_matches_finite_difference_jacobian(self, make_economy):
        eco = make_economy(eps=10.0, n=40, d=6)
        report = stability_matrix(eco, naive_eq(eco), fd_check=True)
        assert report.jacobian_fd_error < 1e-5

    def test_zero_speeds_give_zero_matrix(self, make_economy):
        eco = make_economy(eps=10.0, n=10, d=3)
        params = DynParams(alpha=0.0, alpha_p=0.0, beta=0.0, beta_p=0.0)
        report = stability_matrix(eco, naive_eq(eco), params)
        assert np.all(report.d_matrix == 0.0)

    def test_stable_for_positive_eps(self, make_economy):
        eco = make_economy(eps=1.0, n=50, d=8)
        report = stability_matrix(eco, naive_eq(eco))
        assert np.all(report.eigenvalues.real < 0)

    def test_two_marginal_eigenvalues_near_zero(self, make_economy):
        eco = make_economy(eps=1e-6)
        report = stability_matrix(eco, naive_eq(eco))
        magnitudes = np.sort(np.abs(report.eigenvalues))
        assert magnitudes[1] < 1e-5
        assert magnitudes[2] > 0.1  # the bulk stays far from zero

    def test_high_productivity_clustering(self, make_economy):
        # At large eps the spectrum collapses on the two closed-form values,
        # each N-fold degenerate.
        eco = make_economy(eps=1e5, n=30, d=5)
        report = stability_matrix(eco, naive_eq(eco))
        pair = marginal_eigs(eco.dyn_params, rho_top(eco), 0.0, "high_z")
        for value in pair:
            close = np.abs(report.eigenvalues - value) < 2e-2 * abs(value)
            assert close.sum() == 30
        assert np.abs(report.eigenvalues.imag).max() < 1e-3 * abs(pair[1])


class TestRelaxationTime:
    def test_hand_value(self):
        params = DynParams(alpha=1.0, alpha_p=1.0, beta=1.0, beta_p=1.0)
        # S=3, disc=9-8=1: rate = 3 - 1 = 2, tau = (2/0.1) / 2 = 10.
        assert relaxation_time_analytic(params, z_max=1.0, eps=0.1) == pytest.approx(10.0)

    def test_infinite_when_only_beta_positive(self):
        params = DynParams(alpha=0.0, alpha_p=0.0, beta=1.0, beta_p=0.0)
        assert relaxation_time_analytic(params, 1.0, 0.1) == math.inf

    def test_inverse_eps_scaling(self):
        params = DynParams(alpha=0.3, alpha_p=0.4, beta=0.2, beta_p=0.5)
        tau1 = relaxation_time_analytic(params, 2.0, 0.2)
        tau2 = relaxation_time_analytic(params, 2.0, 0.4)
        assert tau1 == pytest.approx(2.0 * tau2)

    def test_nonpositive_eps_rejected(self):
        with pytest.raises(ValueError):
            relaxation_time_analytic(DynParams(), 1.0, 0.0)

    def test_marginal_eigenvalue_tracks_z_max_at_finite_eps(self, make_economy):
        # On homogeneous regular networks the slow pair sits exactly at
        # -eps * rate / (2 z_max); the rho-scaled form is its eps->0 limit.
        for eps in (10.0, 1.0):
            eco = make_economy(eps=eps, n=60, d=10)
            report = stability_matrix(eco, naive_eq(eco))
            z_max = eco.productivities.max()
            expected = relaxation_time_analytic(eco.dyn_params, z_max, eps)
            assert report.tau_relax_numeric == pytest.approx(expected, rel=1e-6)

    def test_predicted_time_uses_slowest_branch(self, make_economy):
        eco = make_economy(eps=1000.0, n=40, d=6)
        pred = predicted_relaxation_time(eco, eco.dyn_params, 1000.0)
        assert pred == pytest.approx(relaxation_time_high_productivity(eco.dyn_params))
        eco_low = make_economy(eps=0.1, n=40, d=6)
        pred_low = predicted_relaxation_time(eco_low, eco_low.dyn_params, 0.1)
        assert pred_low == pytest.approx(
            relaxation_time_analytic(eco_low.dyn_params, rho_top(eco_low), 0.1))


class TestMarginalEigs:
    def test_low_eps_real_branch_hand_value(self):
        params = DynParams(alpha=1.0, alpha_p=1.0, beta=0.0, beta_p=1.0)
        plus, minus = marginal_eigs(params, rho_n=2.0, eps=0.1, regime="low_eps")
        scale = 0.1 / 4.0
        assert plus == pytest.approx(scale * (-3 + math.sqrt(5)))
        assert minus == pytest.approx(scale * (-3 - math.sqrt(5)))

    def test_high_z_degenerate_zero(self):
        params = DynParams(alpha=1.0, alpha_p=1.0, beta=0.0, beta_p=0.0)
        plus, minus = marginal_eigs(params, rho_n=1.0, eps=0.0, regime="high_z")
        assert plus == pytest.approx(0.0)
        assert minus == pytest.approx(-2.0)

    def test_against_numerical_spectrum(self, make_economy):
        eco = make_economy(eps=1e-4, n=100, d=3, undirected=True)
        report = stability_matrix(eco, naive_eq(eco))
        predicted = marginal_eigs(eco.dyn_params, rho_top(eco), 1e-4, "low_eps")
        order = np.argsort(np.abs(report.eigenvalues))
        observed = report.eigenvalues[order[:2]]
        for pred in predicted:
            err = np.min(np.abs(observed - pred)) / abs(pred)
            assert err < 0.1

    def test_bad_regime_rejected(self):
        with pytest.raises(ValueError):
            marginal_eigs(DynParams(), 1.0, 0.1, "nope")


class TestBulkSpectrum:
    def test_mckay_density_normalised(self):
        xs = np.linspace(-2 * math.sqrt(2), 2 * math.sqrt(2), 20001)
        mass = np.trapezoid(mckay_density(xs, 3), xs)
        assert mass == pytest.approx(1.0, abs=1e-4)

    @pytest.mark.slow
    def test_ks_distance_both_branches(self, make_economy):
        complex_branch = dict(alpha=0.5, alpha_p=0.5, beta=0.5, beta_p=0.5)
        real_branch = dict(alpha=0.1, alpha_p=1.5, beta=0.1, beta_p=0.2)
        for kwargs in (complex_branch, real_branch):
            eco = make_economy(eps=1e-4, n=400, d=3, undirected=True, **kwargs)
            ks = bulk_spectrum_check(eco, eco.dyn_params)
            assert ks < 0.06

    def test_rejects_directed(self, make_economy):
        eco = make_economy(eps=1.0, n=20, d=4, undirected=False)
        with pytest.raises(ValueError):
            bulk_spectrum_check(eco, eco.dyn_params)
