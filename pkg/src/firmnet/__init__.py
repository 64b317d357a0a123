"""Firm-network economy laboratory.

Competitive equilibrium of CES production networks, naive tatonnement
dynamics with full linear-stability analysis, shock-driven excess
volatility, a causal agent-based model, and phase-diagram classification,
exposed through a library, a CLI (``firmnet``) and an HTTP service.
"""

from .economy import (
    DynParams,
    Economy,
    Elasticity,
    NetworkMatrix,
    build_regular_network,
    build_undirected_regular_network,
    calibrate_epsilon,
    hawkins_simon_check,
    network_matrix,
    optimal_quantities,
    optimal_quantities_all,
    production,
    production_all,
)
from .equilibrium import (
    CesAggregates,
    Equilibrium,
    NoConvergence,
    NotRealisable,
    SingularSystem,
    SolveFailure,
    household_kappa,
    naive_kappa,
    residuals,
    solve_cobb_douglas,
    solve_equilibrium,
    solve_general_ces,
    solve_leontief_crs,
)
from .naive import NaiveState, NaiveTrajectory, integrate_naive, naive_rhs, perturbed_state
from .stability import (
    StabilityReport,
    bulk_spectrum_check,
    marginal_eigs,
    predicted_relaxation_time,
    relaxation_time_analytic,
    relaxation_time_high_productivity,
    rho_top,
    stability_matrix,
)
from .shocks import ShockSimulation, simulate_with_shocks, stationary_covariance
from .abm import (
    AbmState,
    AbmTrajectory,
    HouseholdLedger,
    confidence_update,
    exchange_and_update,
    forecast_demand,
    household_plan,
    init_near_equilibrium,
    plan,
    produce_and_rescale,
    run,
    solve_mu,
    step,
)
from .phases import (
    Classification,
    ClassifierThresholds,
    PhaseDiagram,
    PhaseLabel,
    chaos_divergence_rate,
    classify,
    stationary_imbalances,
    sweep,
)
from .config import RunConfig, build_economy, fingerprint, parse_config, resolve_config

__version__ = "0.1.0"
