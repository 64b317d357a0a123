"""Classification of simulated trajectories into dynamical phases.

Five phases: convergence to the competitive equilibrium, deflationary
equilibria (stationary real prices with ongoing wage deflation and an
unemployed labour margin), sustained oscillations (periodic or chaotic),
intermittent crises (long quiescence punctuated by bursts), and crashes
(divergent runs).  The decision thresholds are implementation choices --
the phases are descriptive categories, not sharply defined observables --
so they live in a config object and are reported with every result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict, replace

import numpy as np

from .abm import AbmTrajectory, init_near_equilibrium, run
from .economy import Economy, calibrate_epsilon
from .equilibrium import Equilibrium, solve_equilibrium

__all__ = [
    "PhaseLabel",
    "ClassifierThresholds",
    "Classification",
    "InsufficientData",
    "classify",
    "stationary_imbalances",
    "chaos_divergence_rate",
    "PhaseDiagram",
    "sweep",
    "run_cell",
]


class PhaseLabel:
    COMPETITIVE_EQUILIBRIUM = "competitive_equilibrium"
    DEFLATIONARY_EQUILIBRIUM = "deflationary_equilibrium"
    OSCILLATIONS = "oscillations"
    CRISES = "crises"
    CRASH = "crash"

    ALL = (COMPETITIVE_EQUILIBRIUM, DEFLATIONARY_EQUILIBRIUM, OSCILLATIONS,
           CRISES, CRASH)


class InsufficientData(Exception):
    """Trajectory shorter than the classification window."""


@dataclass(frozen=True)
class ClassifierThresholds:
    """Decision constants of the phase classifier (all configurable)."""

    tol_dist: float = 1e-3        # relative distance to p_eq for competitive eq.
    tol_amp: float = 1e-3         # fluctuation level counting as "settled"
    stationary_amp: float = 2e-2  # fluctuation level counting as stationary offset
    tol_inflation: float = 1e-5   # |mean wage inflation| above this is deflation
    labor_gap_fraction: float = 0.9
    eq_wander: float = 0.05       # max mid-window excursion tolerated for equilibria
    defl_wander: float = 0.5
    peak_prominence: float = 5.0  # dominant FFT peak vs median spectrum
    burst_quantile: float = 0.99
    burst_cv: float = 1.5
    min_bursts: int = 4
    quiescent_ratio: float = 0.15  # median excursion / peak excursion below this


@dataclass
class Classification:
    label: str
    subtag: str | None
    stats: dict = field(default_factory=dict)
    thresholds: ClassifierThresholds = field(default_factory=ClassifierThresholds)


def _rescaled_deviations(traj: AbmTrajectory, equilibrium: Equilibrium | None,
                         window: int):
    prices = traj.prices[-window:]
    if equilibrium is not None and equilibrium.realisable:
        reference = equilibrium.prices_eq
        has_reference = True
    else:
        reference = np.median(prices, axis=0)
        has_reference = False
    return prices / reference - 1.0, has_reference


def classify(traj: AbmTrajectory, equilibrium: Equilibrium | None,
             window: int | None = None,
             thresholds: ClassifierThresholds | None = None) -> Classification:
    """Label one trajectory using the last ``window`` steps (default: half)."""
    th = thresholds or ClassifierThresholds()
    n_steps = traj.n_steps

    if traj.status == "diverged":
        return Classification(PhaseLabel.CRASH, None,
                              {"halt_t": traj.halt_t}, th)

    if window is None:
        window = max(1, n_steps // 2)
    if n_steps < 2 * window:
        raise InsufficientData(
            f"need at least {2 * window} steps to classify, have {n_steps}")

    r, has_reference = _rescaled_deviations(traj, equilibrium, window)
    quarter = max(1, window // 4)
    r_final = r[-quarter:]
    dist_final = float(np.sqrt(np.mean(np.mean(r_final, axis=0) ** 2)))
    amp_final = float(np.median(np.std(r_final, axis=0)))
    amp_window = float(np.median(np.std(r, axis=0)))

    inflation = traj.wage_inflation[-window:]
    mean_inflation = float(np.mean(inflation))
    labor_gap = float(np.mean(traj.labor_supply[-window:] > traj.labor_demand[-window:]))

    excursion = np.abs(r).mean(axis=1)
    wander = float(np.max(excursion) - np.median(excursion))

    stats = {
        "final_distance": dist_final,
        "amplitude": amp_final,
        "window_amplitude": amp_window,
        "mean_inflation": mean_inflation,
        "labor_gap_fraction": labor_gap,
        "wander": wander,
    }

    if (has_reference and dist_final < th.tol_dist and amp_final < th.tol_amp
            and wander < th.eq_wander):
        return Classification(PhaseLabel.COMPETITIVE_EQUILIBRIUM, None, stats, th)

    if amp_final < th.stationary_amp and wander < th.defl_wander:
        deflationary = (mean_inflation < -th.tol_inflation
                        and labor_gap >= th.labor_gap_fraction)
        if deflationary:
            return Classification(PhaseLabel.DEFLATIONARY_EQUILIBRIUM, None, stats, th)
        if has_reference and dist_final < th.tol_dist and wander < th.eq_wander:
            return Classification(PhaseLabel.COMPETITIVE_EQUILIBRIUM, None, stats, th)
        # Stationary offset without wage deflation: a stationary state that is
        # not the competitive one still belongs to the deflationary family.
        if not has_reference or dist_final >= th.tol_dist:
            return Classification(PhaseLabel.DEFLATIONARY_EQUILIBRIUM, None, stats, th)

    # Fluctuating regime: bursts vs sustained oscillations.
    burst_stats = _burst_statistics(excursion, th)
    stats.update(burst_stats)
    if (burst_stats["n_bursts"] >= th.min_bursts
            and burst_stats["interarrival_cv"] > th.burst_cv
            and burst_stats["quiescence"] < th.quiescent_ratio):
        return Classification(PhaseLabel.CRISES, None, stats, th)

    signed = r.mean(axis=1)
    subtag, period, prominence = _spectral_subtag(signed, th)
    stats.update({"oscillation_period": period, "peak_prominence": prominence})
    return Classification(PhaseLabel.OSCILLATIONS, subtag, stats, th)


def _burst_statistics(excursion: np.ndarray, th: ClassifierThresholds) -> dict:
    """Peak-over-threshold statistics of the aggregate excursion series."""
    level = np.quantile(excursion, th.burst_quantile)
    above = excursion >= level
    starts = np.flatnonzero(above[1:] & ~above[:-1]) + 1
    if above[0]:
        starts = np.concatenate([[0], starts])
    if len(starts) >= 2:
        gaps = np.diff(starts)
        cv = float(np.std(gaps) / np.mean(gaps)) if np.mean(gaps) > 0 else 0.0
    else:
        cv = 0.0
    peak = float(np.max(excursion))
    quiescence = float(np.median(excursion) / peak) if peak > 0 else 1.0
    return {"n_bursts": int(len(starts)), "interarrival_cv": cv,
            "quiescence": quiescence, "burst_level": float(level)}


def _spectral_subtag(excursion: np.ndarray, th: ClassifierThresholds):
    """Dominant-peak test on the aggregate series: periodic vs chaotic."""
    x = excursion - excursion.mean()
    if np.allclose(x, 0.0):
        return "periodic", math.inf, math.inf
    spectrum = np.abs(np.fft.rfft(x * np.hanning(len(x)))) ** 2
    spectrum = spectrum[1:]                      # drop the DC bin
    if spectrum.size == 0 or np.all(spectrum == 0):
        return "chaotic", None, 0.0
    k_peak = int(np.argmax(spectrum))
    median = float(np.median(spectrum))
    prominence = float(spectrum[k_peak] / median) if median > 0 else math.inf
    period = len(x) / (k_peak + 1)
    if prominence >= th.peak_prominence * math.sqrt(len(spectrum)):
        return "periodic", float(period), prominence
    return "chaotic", float(period), prominence


def stationary_imbalances(traj: AbmTrajectory, window: int,
                          economy: Economy) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Time-averaged normalised profits and excesses over the window, the
    labour-market tension, and the residual of the stationarity balance
    alpha*E + alpha'*P = omega * (Ls - Ld)/(Ls + Ld)."""
    p_bar = traj.profits_norm[-window:].mean(axis=0)
    e_bar = traj.excess_norm[-window:].mean(axis=0)
    ls = traj.labor_supply[-window:]
    ld = traj.labor_demand[-window:]
    tension = float(np.mean((ls - ld) / (ls + ld)))
    n = economy.n_firms
    alpha = economy.dyn_params.firm_vector("alpha", n)
    alpha_p = economy.dyn_params.firm_vector("alpha_p", n)
    residual = alpha * e_bar + alpha_p * p_bar - economy.dyn_params.omega * tension
    return p_bar, e_bar, tension, float(np.max(np.abs(residual)))


def chaos_divergence_rate(economy: Economy, equilibrium: Equilibrium | None,
                          n_steps: int, seed: int, separation: float = 1e-9,
                          span: int = 200) -> float:
    """Divergence rate of two runs with slightly separated initial prices.

    Lightweight largest-Lyapunov proxy: the log separation growth per step of
    the price vectors, fitted over the first ``span`` recorded steps.
    """
    init_a = init_near_equilibrium(equilibrium, 1e-3, seed, economy)
    init_b = init_a.copy()
    init_b.prices = init_b.prices * (1.0 + separation)
    traj_a = run(economy, init_a, n_steps)
    traj_b = run(economy, init_b, n_steps)
    m = min(len(traj_a.prices), len(traj_b.prices), span)
    gap = np.linalg.norm(traj_a.prices[:m] - traj_b.prices[:m], axis=1)
    gap = np.maximum(gap, 1e-300)
    t = np.arange(m)
    slope = np.polyfit(t[1:], np.log(gap[1:]), 1)[0]
    return float(slope)


@dataclass
class PhaseDiagram:
    """Grid of phase labels plus per-cell summary statistics."""

    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    labels: np.ndarray              # (len(axis1), len(axis2)) of str
    subtags: np.ndarray
    stats: dict                     # name -> (len(axis1), len(axis2)) float array
    meta: dict = field(default_factory=dict)

    def fraction(self, label: str) -> float:
        return float(np.mean(self.labels == label))


_AXIS_SETTERS = {
    "alpha": lambda dyn, v: replace(dyn, alpha=v, alpha_p=v, beta=v, beta_p=v),
    "sigma": lambda dyn, v: replace(dyn, sigma=v),
    "omega": lambda dyn, v: replace(dyn, omega=v, omega_p=v),
    "omega_only": lambda dyn, v: replace(dyn, omega=v),
    "beta_p": lambda dyn, v: replace(dyn, beta_p=v),
    "lambda_forecast": lambda dyn, v: replace(dyn, lambda_forecast=v),
}


def _apply_axis(economy: Economy, name: str, value: float) -> Economy:
    if name == "epsilon":
        return calibrate_epsilon(economy, value)
    try:
        setter = _AXIS_SETTERS[name]
    except KeyError:
        raise ValueError(f"unknown sweep axis '{name}'") from None
    return economy.with_dyn_params(setter(economy.dyn_params, value))


def run_cell(economy: Economy, axes: list[tuple[str, float]], n_steps: int,
             seeds: list[int], delta: float = 1e-3, window: int | None = None,
             thresholds: ClassifierThresholds | None = None) -> Classification:
    """Simulate one parameter cell and return the majority classification.

    Any exception inside the cell is recorded as a crash: a sweep must never
    abort because one corner of parameter space is sick.
    """
    th = thresholds or ClassifierThresholds()
    try:
        eco = economy
        for name, value in axes:
            eco = _apply_axis(eco, name, value)
        try:
            equilibrium = solve_equilibrium(eco)
        except Exception:
            equilibrium = None
        votes = []
        for seed in seeds:
            init = init_near_equilibrium(equilibrium, delta, seed, eco)
            traj = run(eco, init, n_steps)
            votes.append(classify(traj, equilibrium, window=window, thresholds=th))
        counts: dict[str, int] = {}
        for vote in votes:
            counts[vote.label] = counts.get(vote.label, 0) + 1
        winner = max(counts, key=lambda k: (counts[k], -PhaseLabel.ALL.index(k)))
        for vote in votes:
            if vote.label == winner:
                return vote
    except Exception as exc:   # pragma: no cover - defensive sweep guard
        return Classification(PhaseLabel.CRASH, None, {"error": repr(exc)}, th)
    return votes[0]


def _cell_task(args):
    economy, axes, n_steps, seeds, delta, window, thresholds = args
    return run_cell(economy, axes, n_steps, seeds, delta=delta, window=window,
                    thresholds=thresholds)


def sweep(economy: Economy, axis1: tuple[str, np.ndarray], axis2: tuple[str, np.ndarray],
          n_steps: int = 5000, seeds: list[int] | None = None, delta: float = 1e-3,
          window: int | None = None, thresholds: ClassifierThresholds | None = None,
          workers: int = 1, progress=None, meta: dict | None = None) -> PhaseDiagram:
    """Classify every cell of a 2-axis parameter grid.

    Cells are independent, so the grid is distributed over a process pool
    when ``workers`` > 1; results do not depend on the worker count.
    """
    seeds = seeds if seeds is not None else [0]
    name1, values1 = axis1
    name2, values2 = axis2
    values1 = np.asarray(values1, dtype=float)
    values2 = np.asarray(values2, dtype=float)
    tasks = []
    for v1 in values1:
        for v2 in values2:
            tasks.append((economy, [(name1, float(v1)), (name2, float(v2))],
                          n_steps, seeds, delta, window, thresholds))

    results: list[Classification] = [None] * len(tasks)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor, as_completed
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_cell_task, task): k for k, task in enumerate(tasks)}
            done = 0
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                done += 1
                if progress is not None:
                    progress(done, len(tasks))
    else:
        for k, task in enumerate(tasks):
            results[k] = _cell_task(task)
            if progress is not None:
                progress(k + 1, len(tasks))

    shape = (len(values1), len(values2))
    labels = np.empty(shape, dtype=object)
    subtags = np.empty(shape, dtype=object)
    stat_names = ["final_distance", "amplitude", "mean_inflation",
                  "oscillation_period", "labor_gap_fraction"]
    stats = {name: np.full(shape, np.nan) for name in stat_names}
    for k, cls in enumerate(results):
        i, j = divmod(k, len(values2))
        labels[i, j] = cls.label
        subtags[i, j] = cls.subtag
        for name in stat_names:
            value = cls.stats.get(name)
            if value is not None and np.isfinite(value):
                stats[name][i, j] = value
    return PhaseDiagram(axis1_name=name1, axis1_values=values1,
                        axis2_name=name2, axis2_values=values2,
                        labels=labels, subtags=subtags, stats=stats,
                        meta=dict(meta or {}, n_steps=n_steps, seeds=list(seeds),
                                  delta=delta,
                                  thresholds=asdict(thresholds or ClassifierThresholds())))
