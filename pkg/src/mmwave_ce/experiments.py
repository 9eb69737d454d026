"""Monte-Carlo experiment runner: seeded trials, sweeps over a config's axis,
metric aggregation, and CSV persistence."""

from __future__ import annotations

import csv
import hashlib
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arrays import AngleGrid, ArrayConfig, build_dictionary
from .channel import ClusterChannelConfig, draw_channel
from .config import ExperimentConfig
from .pipelines import (
    SolverOptions,
    direct_cs_estimate,
    full_mc_estimate,
    two_stage_estimate,
)
from .sounding import (
    gen_mbc_codebook,
    gen_rc_codebook,
    observe,
    sample_support,
    sigma_from_snr,
    size_codebooks,
)

TRIAL_COLUMNS = (
    "axis", "point", "pipeline", "scheme", "trial", "seed",
    "nmse", "rel_error", "success", "wall_time", "iterations",
)
AGGREGATE_COLUMNS = (
    "axis", "point", "pipeline", "scheme", "n_trials",
    "success_rate", "success_stderr", "mean_nmse", "nmse_stderr",
    "mean_rel_error", "mean_wall_time",
)


@dataclass(frozen=True)
class TrialResult:
    axis: str
    point: float
    pipeline: str
    scheme: str
    trial: int
    seed: int
    nmse: float
    rel_error: float
    success: bool
    wall_time: float
    iterations: int
    stage_iterations: tuple[int, ...] = ()
    stage_converged: tuple[bool, ...] = ()


@dataclass(frozen=True)
class AggregateRow:
    axis: str
    point: float
    pipeline: str
    scheme: str
    n_trials: int
    success_rate: float
    success_stderr: float
    mean_nmse: float
    nmse_stderr: float
    mean_rel_error: float
    mean_wall_time: float


@dataclass
class SweepResult:
    trials: list[TrialResult] = field(default_factory=list)
    aggregates: list[AggregateRow] = field(default_factory=list)


def nmse(h_hat: np.ndarray, h: np.ndarray) -> float:
    """Squared Frobenius error of the estimate normalized by the truth's energy."""
    if h_hat.shape != h.shape:
        raise ValueError("shape mismatch")
    denom = float(np.linalg.norm(h)) ** 2
    if denom == 0.0:
        raise ValueError("true channel is zero; NMSE undefined")
    return float(np.linalg.norm(h_hat - h)) ** 2 / denom


def trial_seed(base_seed: int, axis: str, point, pipeline: str, scheme: str, trial: int) -> int:
    """Stable per-trial seed: adding trials or reordering the factorial never
    changes the seed of an existing (point, pipeline, scheme, trial) cell."""
    key = f"{axis}|{point!r}|{pipeline}|{scheme}|{trial}".encode()
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return base_seed + int.from_bytes(digest, "big") % (2**62)


def _point_channel_spec(cfg: ExperimentConfig, point) -> ClusterChannelConfig:
    ch = cfg.channel
    spread_aoa, spread_aod = ch.spread_aoa_deg, ch.spread_aod_deg
    if cfg.sweep.axis == "spread":
        spread_aoa = spread_aod = float(point)
    return ClusterChannelConfig(
        num_clusters=ch.num_clusters,
        mean_aoa=tuple(np.deg2rad(a) for a in ch.mean_aoa_deg),
        mean_aod=tuple(np.deg2rad(a) for a in ch.mean_aod_deg),
        spread_aoa=float(np.deg2rad(spread_aoa)),
        spread_aod=float(np.deg2rad(spread_aod)),
        rays_aoa=ch.rays_aoa,
        rays_aod=ch.rays_aod,
        distance_m=ch.distance_m,
        carrier_hz=ch.carrier_hz,
        on_grid=ch.on_grid,
    )


def _point_t_snr(cfg: ExperimentConfig, point) -> tuple[int, float | None]:
    t = int(point) if cfg.sweep.axis == "t" else cfg.t
    snr = float(point) if cfg.sweep.axis == "snr" else cfg.snr_db
    return t, snr


def _codebook_sizes(cfg: ExperimentConfig, pipeline: str, t: int) -> tuple[int, int]:
    if pipeline == "full_mc":
        return cfg.arrays.n_bs, cfg.arrays.n_ms
    snd = cfg.sounding
    if snd.sizing == "fixed":
        return snd.n_z, snd.n_f
    return size_codebooks(t, snd.sampling_ratio)


def run_trial(cfg: ExperimentConfig, point, pipeline: str, scheme: str, seed: int,
              trial: int = 0) -> TrialResult:
    """One fully seeded trial: draw channel/codebooks/support/noise from
    substreams of `seed`, run the pipeline, and score it against the truth."""
    started = time.perf_counter()
    t, snr_db = _point_t_snr(cfg, point)
    bs = ArrayConfig(cfg.arrays.n_bs, cfg.arrays.spacing_over_wavelength)
    ms = ArrayConfig(cfg.arrays.n_ms, cfg.arrays.spacing_over_wavelength)
    grid_bs = AngleGrid.sine_uniform(cfg.grids.n1 or bs.num_antennas)
    grid_ms = AngleGrid.sine_uniform(cfg.grids.n2 or ms.num_antennas)

    ss_channel, ss_z, ss_f, ss_omega, ss_noise = np.random.SeedSequence(seed).spawn(5)
    realization = draw_channel(_point_channel_spec(cfg, point), bs, ms, grid_bs, grid_ms, ss_channel)

    n_z, n_f = _codebook_sizes(cfg, pipeline, t)
    if scheme == "mbc":
        z_book = gen_mbc_codebook(bs.num_antennas, n_z, cfg.sounding.num_subarrays, ss_z)
        f_book = gen_mbc_codebook(ms.num_antennas, n_f, cfg.sounding.num_subarrays, ss_f)
    else:
        z_book = gen_rc_codebook(bs.num_antennas, n_z, ss_z)
        f_book = gen_rc_codebook(ms.num_antennas, n_f, ss_f)

    omega = sample_support(n_z, n_f, t, ss_omega)
    sigma = 0.0 if snr_db is None else sigma_from_snr(realization.h, snr_db)
    obs = observe(realization.h, z_book, f_book, omega, sigma, ss_noise)

    opts = SolverOptions().with_overrides(cfg.solver)
    if pipeline == "two_stage":
        dict_bs, dict_ms = build_dictionary(bs, grid_bs), build_dictionary(ms, grid_ms)
        est = two_stage_estimate(obs, z_book, f_book, dict_bs, dict_ms, opts=opts)
    elif pipeline == "direct_cs":
        dict_bs, dict_ms = build_dictionary(bs, grid_bs), build_dictionary(ms, grid_ms)
        est = direct_cs_estimate(obs, z_book, f_book, dict_bs, dict_ms, opts=opts)
    elif pipeline == "full_mc":
        est = full_mc_estimate(obs, z_book, f_book, opts=opts)
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")

    err2 = nmse(est.h_hat, realization.h)
    rel = float(np.sqrt(err2))
    threshold = cfg.success.threshold
    success = (err2 if cfg.success.metric == "nmse" else rel) <= threshold
    return TrialResult(
        axis=cfg.sweep.axis,
        point=float(point),
        pipeline=pipeline,
        scheme=scheme,
        trial=trial,
        seed=seed,
        nmse=err2,
        rel_error=rel,
        success=bool(success),
        wall_time=time.perf_counter() - started,
        iterations=sum(r.iterations for r in est.stage_reports),
        stage_iterations=tuple(r.iterations for r in est.stage_reports),
        stage_converged=tuple(r.converged for r in est.stage_reports),
    )


def _trial_job(args):
    # KeyboardInterrupt is not an Exception and still propagates
    cfg, point, pipeline, scheme, seed, trial = args
    try:
        return run_trial(cfg, point, pipeline, scheme, seed, trial)
    except Exception:  # a failing trial becomes a failed row, never aborts the sweep
        return TrialResult(
            axis=cfg.sweep.axis, point=float(point), pipeline=pipeline, scheme=scheme,
            trial=trial, seed=seed, nmse=float("nan"), rel_error=float("nan"),
            success=False, wall_time=0.0, iterations=0,
            stage_iterations=(), stage_converged=(False,),
        )


def run_trials(cfg: ExperimentConfig, point, pipeline: str, scheme: str,
               seeds, workers: int = 1) -> list[TrialResult]:
    """Run one (point, pipeline, scheme) cell for an explicit list of seeds."""
    jobs = [(cfg, point, pipeline, scheme, int(s), i) for i, s in enumerate(seeds)]
    if workers <= 1:
        return [_trial_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_job, jobs))


def aggregate(trials: list[TrialResult]) -> list[AggregateRow]:
    groups: dict[tuple, list[TrialResult]] = {}
    for tr in trials:
        groups.setdefault((tr.axis, tr.point, tr.pipeline, tr.scheme), []).append(tr)
    rows = []
    for (axis, point, pipeline, scheme), cell in sorted(groups.items()):
        n = len(cell)
        rate = sum(tr.success for tr in cell) / n
        nmses = np.array([tr.nmse for tr in cell], dtype=float)
        rows.append(
            AggregateRow(
                axis=axis, point=point, pipeline=pipeline, scheme=scheme, n_trials=n,
                success_rate=rate,
                success_stderr=float(np.sqrt(rate * (1.0 - rate) / n)),
                mean_nmse=float(np.nanmean(nmses)),
                nmse_stderr=float(np.nanstd(nmses, ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
                mean_rel_error=float(np.nanmean([tr.rel_error for tr in cell])),
                mean_wall_time=float(np.mean([tr.wall_time for tr in cell])),
            )
        )
    return rows


def _format_cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _trial_row(tr: TrialResult) -> list[str]:
    return [_format_cell(getattr(tr, c)) for c in TRIAL_COLUMNS]


def trials_csv_text(trials: list[TrialResult]) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(TRIAL_COLUMNS)
    for tr in trials:
        w.writerow(_trial_row(tr))
    return buf.getvalue()


def aggregates_csv_text(rows: list[AggregateRow]) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(AGGREGATE_COLUMNS)
    for r in rows:
        w.writerow([_format_cell(getattr(r, c)) for c in AGGREGATE_COLUMNS])
    return buf.getvalue()


def write_trials_csv(path, trials: list[TrialResult]):
    Path(path).write_text(trials_csv_text(trials))


def write_aggregates_csv(path, rows: list[AggregateRow]):
    Path(path).write_text(aggregates_csv_text(rows))


def read_trials_csv(path) -> list[TrialResult]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                TrialResult(
                    axis=row["axis"], point=float(row["point"]), pipeline=row["pipeline"],
                    scheme=row["scheme"], trial=int(row["trial"]), seed=int(row["seed"]),
                    nmse=float(row["nmse"]), rel_error=float(row["rel_error"]),
                    success=row["success"] == "1", wall_time=float(row["wall_time"]),
                    iterations=int(row["iterations"]),
                )
            )
    return out


def read_aggregates_csv(path) -> list[AggregateRow]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                AggregateRow(
                    axis=row["axis"], point=float(row["point"]), pipeline=row["pipeline"],
                    scheme=row["scheme"], n_trials=int(row["n_trials"]),
                    success_rate=float(row["success_rate"]),
                    success_stderr=float(row["success_stderr"]),
                    mean_nmse=float(row["mean_nmse"]), nmse_stderr=float(row["nmse_stderr"]),
                    mean_rel_error=float(row["mean_rel_error"]),
                    mean_wall_time=float(row["mean_wall_time"]),
                )
            )
    return out


def run_sweep(cfg: ExperimentConfig, out_dir=None, workers: int | None = None,
              progress: bool = False) -> SweepResult:
    """Full factorial over sweep values x pipelines x schemes x trials.

    With `out_dir` set, trial rows are flushed to trials.csv as they complete
    (partial results survive interruption) and aggregates.csv is written at
    the end. Trial seeds are stable hashes of the cell coordinates, so adding
    trials or sweep points never changes existing results.
    """
    cfg.validate()
    workers = cfg.workers if workers is None else workers
    jobs = []
    for point in cfg.sweep.values:
        for pipeline in cfg.pipelines:
            for scheme in cfg.sounding.schemes:
                for trial in range(cfg.trials):
                    seed = trial_seed(cfg.base_seed, cfg.sweep.axis, point, pipeline, scheme, trial)
                    jobs.append((cfg, point, pipeline, scheme, seed, trial))

    out_path = agg_path = writer = fh = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path, agg_path = out_dir / "trials.csv", out_dir / "aggregates.csv"
        fh = open(out_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(TRIAL_COLUMNS)

    result = SweepResult()

    def _record(tr: TrialResult):
        result.trials.append(tr)
        if writer is not None:
            writer.writerow(_trial_row(tr))
            fh.flush()
        if progress:
            print(
                f"[{len(result.trials)}/{len(jobs)}] {tr.pipeline}/{tr.scheme} "
                f"{tr.axis}={tr.point:g} trial={tr.trial} rel_error={tr.rel_error:.3g}",
                flush=True,
            )

    try:
        if workers <= 1:
            for job in jobs:
                _record(_trial_job(job))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_trial_job, job) for job in jobs]
                for fut in as_completed(futures):
                    _record(fut.result())
    finally:
        # flush whatever completed, even on interruption
        result.aggregates = aggregate(result.trials)
        if fh is not None:
            fh.close()
            write_aggregates_csv(agg_path, result.aggregates)
    return result
