"""FastAPI service wrapping the simulator.

Endpoints cover the harness surface: single trials, full sweeps (returning
both CSV artifacts inline), restricted-isometry checks, and preset listing.
Sweeps run synchronously; clients own persistence of the returned CSVs.
"""

from __future__ import annotations

import time

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import PRESETS
from ..experiments import (
    AGGREGATE_COLUMNS,
    TRIAL_COLUMNS,
    aggregates_csv_text,
    run_sweep,
    run_trial,
    trial_seed,
    trials_csv_text,
)
from ..ripcheck import RECOVERY_THRESHOLD, empirical_ric, exact_recovery_condition, gaussian_matrix
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="mmwave-ce",
        version=__version__,
        description="Beamspace mmWave channel estimation simulator",
    )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/presets", response_model=schemas.PresetsResponse)
    def presets():
        return schemas.PresetsResponse(
            presets=[
                schemas.PresetModel(
                    name=name,
                    description=desc,
                    config=schemas.ExperimentModel(**cfg.to_dict()),
                )
                for name, (desc, cfg) in sorted(PRESETS.items())
            ]
        )

    @app.post("/trials/run", response_model=schemas.RunResponse)
    def trials_run(req: schemas.RunRequest):
        try:
            cfg = req.config.to_config()
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e))
        point = req.point if req.point is not None else cfg.sweep.values[0]
        pipelines = [req.pipeline] if req.pipeline else list(cfg.pipelines)
        schemes = [req.scheme] if req.scheme else list(cfg.sounding.schemes)
        results = []
        for pipeline in pipelines:
            for scheme in schemes:
                seed = (
                    req.seed
                    if req.seed is not None
                    else trial_seed(cfg.base_seed, cfg.sweep.axis, point, pipeline, scheme, 0)
                )
                try:
                    tr = run_trial(cfg, point, pipeline, scheme, seed)
                except ValueError as e:
                    raise HTTPException(status_code=422, detail=str(e))
                results.append(
                    schemas.TrialModel(
                        **{c: getattr(tr, c) for c in TRIAL_COLUMNS},
                        stage_iterations=list(tr.stage_iterations),
                        stage_converged=list(tr.stage_converged),
                    )
                )
        return schemas.RunResponse(results=results)

    @app.post("/sweeps/run", response_model=schemas.SweepResponse)
    def sweeps_run(req: schemas.SweepRequest):
        try:
            cfg = req.config.to_config()
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e))
        started = time.perf_counter()
        result = run_sweep(cfg, workers=req.workers)
        return schemas.SweepResponse(
            name=cfg.name,
            num_trials=len(result.trials),
            elapsed_seconds=time.perf_counter() - started,
            trials_csv=trials_csv_text(result.trials),
            aggregates_csv=aggregates_csv_text(result.aggregates),
            aggregates=[
                schemas.AggregateModel(**{c: getattr(r, c) for c in AGGREGATE_COLUMNS})
                for r in result.aggregates
            ],
        )

    @app.post("/ric/check", response_model=schemas.RicCheckResponse)
    def ric_check(req: schemas.RicCheckRequest):
        m = req.matrix
        if isinstance(m, schemas.GaussianMatrixModel):
            a = gaussian_matrix(m.rows, m.cols, seed=m.seed, complex_valued=m.complex_valued)
        else:
            a = np.asarray(m.re, dtype=float)
            if m.im is not None:
                a = a + 1j * np.asarray(m.im, dtype=float)
        try:
            est = empirical_ric(a, req.k, mode=req.mode, n_trials=req.n_trials, seed=req.seed)
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e))
        return schemas.RicCheckResponse(
            k=est.k,
            delta=est.delta,
            extremal_support=list(est.extremal_support),
            recovery_condition=exact_recovery_condition(est.delta),
            recovery_threshold=RECOVERY_THRESHOLD,
        )

    return app


app = create_app()
