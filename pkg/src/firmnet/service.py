"""HTTP facade: create economies, run simulations and sweeps, fetch results.

Long-running work (simulate, sweep) is job-based: POST returns a job id,
clients poll /jobs/{id} and fetch /jobs/{id}/result when done.  Fast paths
(equilibrium, spectrum) answer synchronously.  The job store is in-memory
(documented desk-scale choice) with LRU eviction of finished results; every
result embeds the resolved-config fingerprint of the request.
"""

from __future__ import annotations

import math
import threading
import uuid
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import abm, io, phases, stability
from .config import (ConfigError, build_economy, fingerprint, parse_config,
                     resolve_config, sub_seed)
from .economy import network_matrix
from .equilibrium import NotRealisable, solve_equilibrium

__all__ = ["create_app", "JobStore", "Job"]


class JobCancelled(Exception):
    pass


@dataclass
class Job:
    id: str
    kind: str
    status: str = "queued"          # queued -> running -> done | failed
    progress: float = 0.0
    error: str | None = None
    result: dict | None = None
    config_fingerprint: str = ""
    cancel_requested: bool = False
    evicted: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "status": self.status,
            "progress": round(self.progress, 4),
            "error": self.error,
            "config_fingerprint": self.config_fingerprint,
        }


class JobStore:
    """Thread-safe registry with LRU eviction of completed results."""

    def __init__(self, result_cap: int = 64):
        self._jobs: OrderedDict[str, Job] = OrderedDict()
        self._lock = threading.Lock()
        self._result_cap = result_cap

    def create(self, kind: str, config_fp: str) -> Job:
        job = Job(id=uuid.uuid4().hex[:12], kind=kind, config_fingerprint=config_fp)
        with self._lock:
            self._jobs[job.id] = job
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def finish(self, job: Job, result: dict | None, error: str | None = None):
        with job.lock:
            if error is not None:
                job.status = "failed"
                job.error = error
            else:
                job.status = "done"
                job.result = result
                job.progress = 1.0
        self._evict()

    def _evict(self):
        with self._lock:
            done = [j for j in self._jobs.values() if j.status == "done" and not j.evicted]
            overflow = len(done) - self._result_cap
            for job in done[:max(overflow, 0)]:
                job.result = None
                job.evicted = True


def _simulate_job(config, thresholds):
    economy = build_economy(config)
    try:
        eq = solve_equilibrium(economy)
    except Exception:
        eq = None
    init = abm.init_near_equilibrium(eq, config.run.delta,
                                     sub_seed(config.seed, "init"), economy)
    traj = abm.run(economy, init, config.run.T)
    classification = phases.classify(traj, eq, window=config.run.window,
                                     thresholds=thresholds)
    return traj, classification


def create_app(workers: int = 4, result_cap: int = 64, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="firmnet", version="1")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    store = JobStore(result_cap=result_cap)
    pool = ThreadPoolExecutor(max_workers=workers)
    app.state.store = store
    app.state.pool = pool

    def parse_body_config(payload):
        try:
            return parse_config(payload)
        except ConfigError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)

    async def read_json(request: Request):
        try:
            return await request.json()
        except Exception:
            return None

    @app.post("/api/v1/simulate", status_code=202)
    async def submit_simulate(request: Request):
        payload = await read_json(request)
        if payload is None:
            return JSONResponse({"error": "body: invalid JSON"}, status_code=400)
        config = parse_body_config(payload)
        if isinstance(config, JSONResponse):
            return config
        job = store.create("simulate", fingerprint(config))
        thresholds = config.classifier_thresholds()

        def work():
            job.status = "running"
            try:
                traj, classification = _simulate_job(config, thresholds)
                stride = max(1, config.run.stride)
                result = {
                    "trajectory": io.trajectory_payload(traj, stride),
                    "classification": {
                        "label": classification.label,
                        "subtag": classification.subtag,
                        "stats": _clean(classification.stats),
                    },
                    "config": resolve_config(config),
                    "config_fingerprint": job.config_fingerprint,
                }
                store.finish(job, result)
            except Exception as exc:   # job must fail, not crash the server
                store.finish(job, None, error=repr(exc))

        pool.submit(work)
        return job.record()

    @app.post("/api/v1/sweep", status_code=202)
    async def submit_sweep(request: Request):
        payload = await read_json(request)
        if payload is None:
            return JSONResponse({"error": "body: invalid JSON"}, status_code=400)
        config = parse_body_config(payload)
        if isinstance(config, JSONResponse):
            return config
        if config.sweep is None:
            return JSONResponse({"error": "sweep: block is required"}, status_code=400)
        job = store.create("sweep", fingerprint(config))
        thresholds = config.classifier_thresholds()

        def work():
            job.status = "running"
            try:
                economy = build_economy(config)

                def to_floats(values):
                    return [math.inf if v == "inf" else
                            (-math.inf if v == "-inf" else float(v)) for v in values]

                axis1 = (config.sweep.axis1.name, to_floats(config.sweep.axis1.values))
                axis2 = (config.sweep.axis2.name, to_floats(config.sweep.axis2.values))
                seeds = [sub_seed(config.seed, "cell", k)
                         for k in range(len(config.run.seeds))]

                def progress(done, total):
                    if job.cancel_requested:
                        raise JobCancelled()
                    job.progress = done / total

                diagram = phases.sweep(economy, axis1, axis2, n_steps=config.run.T,
                                       seeds=seeds, delta=config.run.delta,
                                       window=config.run.window, thresholds=thresholds,
                                       workers=1, progress=progress)
                result = {
                    "phase_diagram": io.phase_diagram_payload(diagram),
                    "legend": list(phases.PhaseLabel.ALL),
                    "config": resolve_config(config),
                    "config_fingerprint": job.config_fingerprint,
                }
                store.finish(job, result)
            except JobCancelled:
                store.finish(job, None, error="cancelled")
            except Exception as exc:
                store.finish(job, None, error=repr(exc))

        pool.submit(work)
        return job.record()

    @app.get("/api/v1/jobs/{job_id}")
    def job_status(job_id: str):
        job = store.get(job_id)
        if job is None:
            return JSONResponse({"error": "unknown job"}, status_code=404)
        return job.record()

    @app.delete("/api/v1/jobs/{job_id}")
    def cancel_job(job_id: str):
        job = store.get(job_id)
        if job is None:
            return JSONResponse({"error": "unknown job"}, status_code=404)
        with job.lock:
            job.cancel_requested = True
            if job.status in ("queued", "running"):
                job.status = "failed"
                job.error = "cancelled"
        return job.record()

    @app.get("/api/v1/jobs/{job_id}/result")
    def job_result(job_id: str, stride: int = Query(default=1, ge=1)):
        job = store.get(job_id)
        if job is None:
            return JSONResponse({"error": "unknown job"}, status_code=404)
        if job.evicted:
            return JSONResponse({"error": "result evicted"}, status_code=410)
        if job.status != "done":
            return JSONResponse({"error": f"job is {job.status}", **job.record()},
                                status_code=409)
        result = job.result
        if stride > 1 and "trajectory" in result:
            series = result["trajectory"]["series"]
            downsampled = {}
            for name, values in series.items():
                idx = io.strided_indices(len(values), stride)
                downsampled[name] = [values[i] for i in idx]
            result = dict(result, trajectory=dict(result["trajectory"],
                                                  series=downsampled))
        return result

    @app.get("/api/v1/equilibrium")
    def equilibrium_endpoint(config: str = Query(default="{}")):
        try:
            cfg = parse_config(config)
        except ConfigError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        economy = build_economy(cfg)
        nm = network_matrix(economy)
        try:
            eq = solve_equilibrium(economy)
        except NotRealisable:
            return JSONResponse({"error": "not realisable", "eps": nm.eps},
                                status_code=422)
        return {
            "eps": nm.eps,
            "realisable": eq.realisable,
            "prices_eq": eq.prices_eq.tolist(),
            "gammas_eq": eq.gammas_eq.tolist(),
            "residuals": {"profit": eq.residuals[0], "clearing": eq.residuals[1]},
            "config_fingerprint": fingerprint(cfg),
        }

    @app.get("/api/v1/spectrum")
    def spectrum_endpoint(config: str = Query(default="{}")):
        try:
            cfg = parse_config(config)
        except ConfigError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        economy = build_economy(cfg)
        nm = network_matrix(economy)
        try:
            eq = solve_equilibrium(economy, naive_household=True)
        except NotRealisable:
            return JSONResponse({"error": "not realisable", "eps": nm.eps},
                                status_code=422)
        report = stability.stability_matrix(economy, eq)
        return {
            "eigenvalues": [[float(v.real), float(v.imag)]
                            for v in report.eigenvalues],
            "tau_relax_numeric": report.tau_relax_numeric,
            "tau_relax_analytic": _finite_or_none(report.tau_relax_analytic),
            "config_fingerprint": fingerprint(cfg),
        }

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _clean(stats: dict) -> dict:
    out = {}
    for key, value in stats.items():
        if isinstance(value, float) and not math.isfinite(value):
            out[key] = None
        else:
            out[key] = value
    return out


def _finite_or_none(value: float):
    return value if math.isfinite(value) else None
