"""Command-line entry point.

Every subcommand reads one JSON configuration (defaults apply when omitted),
derives all randomness from the master seed, and writes artifacts that embed
the resolved configuration fingerprint, so identical invocations produce
byte-identical outputs.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import click

from . import abm, io, naive, phases, shocks, stability
from .config import (ConfigError, RunConfig, build_economy, fingerprint,
                     parse_config, resolve_config, sub_seed)
from .economy import network_matrix
from .equilibrium import NotRealisable, solve_equilibrium


def _load_config(path: str | None, seed: int | None) -> RunConfig:
    if path:
        document = Path(path).read_text()
    else:
        document = "{}"
    try:
        config = parse_config(document)
    except ConfigError as exc:
        raise click.ClickException(f"invalid config: {exc}")
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    return config


def _write_resolved(config: RunConfig, out: Path):
    resolved = {"config": resolve_config(config), "fingerprint": fingerprint(config)}
    (out / "config.resolved.json").write_text(json.dumps(resolved, indent=1, sort_keys=True))


common_options = [
    click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                 help="JSON run configuration (defaults used when omitted)."),
    click.option("--out", "out_dir", type=click.Path(), default=".",
                 help="Output directory."),
    click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv"),
    click.option("--threads", type=int, default=1, show_default=True),
    click.option("--seed", type=int, default=None, help="Override the master seed."),
]


def with_common(func):
    for option in reversed(common_options):
        func = option(func)
    return func


@click.group()
@click.version_option(package_name="firmnet")
def main():
    """Firm-network economy laboratory."""


@main.command()
@with_common
def equilibrium(config_path, out_dir, fmt, threads, seed):
    """Solve the competitive equilibrium and report realisability."""
    config = _load_config(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    economy = build_economy(config)
    nm = network_matrix(economy)
    try:
        eq = solve_equilibrium(economy)
        payload = {
            "eps": nm.eps,
            "realisable": eq.realisable,
            "prices_eq": eq.prices_eq.tolist(),
            "gammas_eq": eq.gammas_eq.tolist(),
            "kappa": eq.kappa.tolist(),
            "mu_eq": None if math.isnan(eq.mu_eq) else eq.mu_eq,
            "residuals": {"profit": eq.residuals[0], "clearing": eq.residuals[1]},
        }
        click.echo(f"eps = {nm.eps:.6g}; realisable; residuals "
                   f"profit={eq.residuals[0]:.3e} clearing={eq.residuals[1]:.3e}")
    except NotRealisable as exc:
        payload = {"eps": nm.eps, "realisable": False, "error": str(exc)}
        click.echo(f"eps = {nm.eps:.6g}; NOT realisable")
    payload["meta"] = {"config_fingerprint": fingerprint(config)}
    (out / "equilibrium.json").write_text(json.dumps(payload, indent=1))
    _write_resolved(config, out)


@main.command(name="naive")
@with_common
def naive_cmd(config_path, out_dir, fmt, threads, seed):
    """Integrate the naive tatonnement flow from a perturbed equilibrium."""
    config = _load_config(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    economy = build_economy(config)
    eq = solve_equilibrium(economy, naive_household=True)
    state = naive.perturbed_state(eq.prices_eq, eq.gammas_eq, config.run.delta,
                                  sub_seed(config.seed, "init"))
    traj = naive.integrate_naive(state, economy.dyn_params, economy,
                                 t_end=config.naive.t_end, dt=config.naive.dt,
                                 record_stride=config.naive.record_stride)
    path = out / f"naive_trajectory.{fmt}"
    io.emit_trajectory(traj, path, fmt=fmt, stride=config.run.stride,
                       fingerprint=fingerprint(config))
    click.echo(f"status={traj.status} steps={len(traj.times) - 1} -> {path}")
    _write_resolved(config, out)


@main.command()
@with_common
def spectrum(config_path, out_dir, fmt, threads, seed):
    """Eigenvalues of the linearised naive dynamics around equilibrium."""
    config = _load_config(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    economy = build_economy(config)
    eq = solve_equilibrium(economy, naive_household=True)
    report = stability.stability_matrix(economy, eq)
    path = out / f"spectrum.{fmt}"
    io.emit_spectrum(report.eigenvalues, path, fmt=fmt,
                     fingerprint=fingerprint(config))
    click.echo(f"2N = {len(report.eigenvalues)} eigenvalues -> {path}")
    click.echo(f"tau_relax numeric = {report.tau_relax_numeric:.6g}, "
               f"analytic = {report.tau_relax_analytic:.6g}")
    _write_resolved(config, out)


@main.command()
@with_common
def simulate(config_path, out_dir, fmt, threads, seed):
    """Run the agent-based model and classify the trajectory."""
    config = _load_config(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    economy = build_economy(config)
    try:
        eq = solve_equilibrium(economy)
    except Exception:
        eq = None
    init = abm.init_near_equilibrium(eq, config.run.delta,
                                     sub_seed(config.seed, "init"), economy)
    traj = abm.run(economy, init, config.run.T)
    classification = phases.classify(traj, eq, window=config.run.window,
                                     thresholds=config.classifier_thresholds())
    path = out / f"trajectory.{fmt}"
    io.emit_trajectory(traj, path, fmt=fmt, stride=config.run.stride,
                       fingerprint=fingerprint(config))
    (out / "classification.json").write_text(json.dumps({
        "label": classification.label,
        "subtag": classification.subtag,
        "stats": {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                  for k, v in classification.stats.items()},
        "meta": {"config_fingerprint": fingerprint(config)},
    }, indent=1))
    click.echo(f"phase = {classification.label}"
               + (f" ({classification.subtag})" if classification.subtag else "")
               + f" -> {path}")
    _write_resolved(config, out)


@main.command()
@with_common
def sweep(config_path, out_dir, fmt, threads, seed):
    """Classify a 2-axis parameter grid into a phase diagram."""
    config = _load_config(config_path, seed)
    if config.sweep is None:
        raise click.ClickException("config has no 'sweep' block")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    economy = build_economy(config)

    def to_floats(values):
        return [math.inf if v == "inf" else (-math.inf if v == "-inf" else float(v))
                for v in values]

    axis1 = (config.sweep.axis1.name, to_floats(config.sweep.axis1.values))
    axis2 = (config.sweep.axis2.name, to_floats(config.sweep.axis2.values))
    seeds = [sub_seed(config.seed, "cell", k) for k in range(len(config.run.seeds))]

    def progress(done, total):
        click.echo(f"\r{done}/{total} cells", nl=False)

    diagram = phases.sweep(economy, axis1, axis2, n_steps=config.run.T,
                           seeds=seeds, delta=config.run.delta,
                           window=config.run.window,
                           thresholds=config.classifier_thresholds(),
                           workers=threads, progress=progress,
                           meta={"fingerprint": fingerprint(config)})
    click.echo("")
    path = out / f"phase_diagram.{fmt}"
    io.emit_phase_diagram(diagram, path, fmt=fmt, fingerprint=fingerprint(config))
    for label in phases.PhaseLabel.ALL:
        frac = diagram.fraction(label)
        if frac:
            click.echo(f"  {label}: {frac:.1%}")
    click.echo(f"-> {path}")
    _write_resolved(config, out)


@main.command()
@with_common
def volatility(config_path, out_dir, fmt, threads, seed):
    """Drive the linearised dynamics with productivity shocks."""
    config = _load_config(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    economy = build_economy(config)
    eq = solve_equilibrium(economy, naive_household=True)
    vb = config.volatility
    sim = shocks.simulate_with_shocks(economy, eq, economy.dyn_params,
                                      vb.noise_sigma, vb.correlation_time,
                                      vb.t_end, sub_seed(config.seed, "shocks"),
                                      dt=vb.dt, burn_in=vb.burn_in)
    report = {
        "price_vol_rescaled": sim.price_vol_rescaled,
        "gamma_vol_rescaled": sim.gamma_vol_rescaled,
        "aggregate_price_vol": sim.aggregate_price_vol,
        "aggregate_gamma_vol": sim.aggregate_gamma_vol,
        "marginal_vols": list(sim.marginal_vols),
        "noise_sigma": vb.noise_sigma,
        "correlation_time": vb.correlation_time,
        "meta": {"config_fingerprint": fingerprint(config)},
    }
    (out / "volatility.json").write_text(json.dumps(report, indent=1))
    click.echo(f"rescaled price volatility = {sim.price_vol_rescaled:.4e}")
    _write_resolved(config, out)


@main.command()
@click.option("--listen", default=None, help="HOST:PORT (or env FIRMNET_LISTEN).")
@click.option("--threads", type=int, default=4, show_default=True,
              help="Worker pool size for jobs.")
@click.option("--ui", "ui_dir", type=click.Path(), default=None,
              help="Serve a built explorer UI from this directory.")
def serve(listen, threads, ui_dir):
    """Run the HTTP service for the explorer UI and scripts."""
    import uvicorn

    from .service import create_app

    listen = listen or os.environ.get("FIRMNET_LISTEN", "127.0.0.1:8533")
    host, _, port = listen.rpartition(":")
    app = create_app(workers=threads, ui_dir=ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main(prog_name="firmnet")
