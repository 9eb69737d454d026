"""End-to-end channel estimators.

Three pipelines share the sounding model: the two-stage scheme (complete the
beam-domain matrix, then solve a sparse beamspace inverse problem against the
completed matrix), direct compressed sensing on the raw measurements, and a
full-rank matrix-completion baseline that inverts square codebooks. A sizing
helper turns sparsity/rank parameters into required codebook sizes and
measurement counts, up to user-tunable absolute constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .operators import EntrySamplingOperator, SandwichOperator
from .solvers import (
    SolverReport,
    fista_l1,
    fista_l1_continuation,
    fpc_complete_discrepancy,
    svt_complete,
)
from .sounding import Codebook, ObservationSet


@dataclass
class EstimateBundle:
    """Pipeline output: beamspace estimate (when one exists), channel estimate,
    and the per-stage solver reports."""

    hv_hat: np.ndarray | None
    h_hat: np.ndarray
    stage_reports: list[SolverReport] = field(default_factory=list)

    @property
    def degraded(self) -> bool:
        return any(not r.converged for r in self.stage_reports)


@dataclass(frozen=True)
class TheoryBoundConfig:
    """Absolute constants of the sample-complexity bounds, exposed as knobs."""

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    c5: float = 1.0
    c6: float = 1.0
    c_mc: float = 1.0
    c_cs: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4", "c5", "c6", "c_mc", "c_cs", "eta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class SolverOptions:
    """Tuning knobs shared by the pipelines; defaults suit the desk-scale setups."""

    svt_tau: float | None = None
    svt_step: float | None = None
    svt_max_iter: int = 2000
    svt_tol: float = 1e-7
    fpc_max_iter: int = 300
    fpc_tol: float = 1e-7
    fista_inner_iter: int = 400
    fista_tol: float = 1e-6
    fista_factor: float = 0.1
    fista_max_stages: int = 16
    # noiseless residual targets, relative to the data norm
    stage2_residual_rtol: float = 1e-8
    direct_residual_rtol: float = 1e-8
    # noisy-mode calibration: residuals matched to the noise level within this window
    discrepancy_window: float = 0.2
    # noisy direct-CS weight: lambda = direct_lambda_scale * sigma * sqrt(log(N1*N2))
    direct_lambda_scale: float = 2.0

    def with_overrides(self, overrides: dict | None) -> "SolverOptions":
        return replace(self, **overrides) if overrides else self


def _stage2_maps(z_book: Codebook, f_book: Codebook, dict_bs, dict_ms):
    left = z_book.matrix.conj().T @ dict_bs
    right = dict_ms.conj().T @ f_book.matrix
    return left, right


def _assemble(hv_hat: np.ndarray, dict_bs, dict_ms) -> np.ndarray:
    return dict_bs @ hv_hat @ dict_ms.conj().T


def two_stage_estimate(
    obs: ObservationSet,
    z_book: Codebook,
    f_book: Codebook,
    dict_bs: np.ndarray,
    dict_ms: np.ndarray,
    noisy: bool | None = None,
    opts: SolverOptions | None = None,
) -> EstimateBundle:
    """Complete Y = Z^H H F from its observed entries, then recover the sparse
    beamspace matrix from the completed Y.

    Stage 1 uses singular value thresholding on exact data and nuclear-norm
    regularized completion (residual calibrated to sigma*sqrt(T)) on noisy
    data. Stage 2 runs FISTA over the map X -> (Z^H A_BS) X (A_MS^H F):
    lambda continuation down to a 1e-8-relative data residual when noiseless,
    or to a residual matching sigma*sqrt(N_Z*N_F) when noisy.
    """
    opts = opts or SolverOptions()
    if noisy is None:
        noisy = obs.sigma > 0
    shape = (z_book.num_beams, f_book.num_beams)

    if noisy and obs.sigma > 0:
        y_hat, rep1 = fpc_complete_discrepancy(
            obs,
            shape,
            target_residual=obs.sigma * math.sqrt(len(obs)),
            rel_window=opts.discrepancy_window,
            max_iter=opts.fpc_max_iter,
            tol=opts.fpc_tol,
        )
    else:
        y_hat, rep1 = svt_complete(
            obs,
            shape,
            tau=opts.svt_tau,
            step=opts.svt_step,
            max_iter=opts.svt_max_iter,
            tol=opts.svt_tol,
        )

    left, right = _stage2_maps(z_book, f_book, dict_bs, dict_ms)
    op = SandwichOperator(left, right)
    y_scale = float(np.linalg.norm(y_hat))
    if noisy and obs.sigma > 0:
        target = obs.sigma * math.sqrt(shape[0] * shape[1])
        window = opts.discrepancy_window
    else:
        target = opts.stage2_residual_rtol * y_scale
        window = None
    hv_hat, rep2 = fista_l1_continuation(
        op,
        y_hat,
        target_residual=target,
        rel_window=window,
        factor=opts.fista_factor,
        max_stages=opts.fista_max_stages,
        inner_iter=opts.fista_inner_iter,
        tol=opts.fista_tol,
    )
    return EstimateBundle(
        hv_hat=hv_hat,
        h_hat=_assemble(hv_hat, dict_bs, dict_ms),
        stage_reports=[rep1, rep2],
    )


def direct_cs_estimate(
    obs: ObservationSet,
    z_book: Codebook,
    f_book: Codebook,
    dict_bs: np.ndarray,
    dict_ms: np.ndarray,
    lam: float | None = None,
    opts: SolverOptions | None = None,
) -> EstimateBundle:
    """One-shot sparse recovery of the beamspace matrix from the raw sounding
    measurements, skipping the completion stage.

    Noiseless data is solved by lambda continuation toward the interpolating
    minimum-l1 solution; noisy data uses a universal-threshold weight
    lambda = 2*sigma*sqrt(log(N1*N2)) unless `lam` is supplied.
    """
    opts = opts or SolverOptions()
    left, right = _stage2_maps(z_book, f_book, dict_bs, dict_ms)
    op = EntrySamplingOperator(left, right, obs.omega)
    y = obs.values
    n1, n2 = op.in_shape

    if lam is not None:
        hv_hat, rep = fista_l1(
            op, y, lam, max_iter=opts.fista_inner_iter * 4, tol=opts.fista_tol
        )
    elif obs.sigma > 0:
        lam_rule = opts.direct_lambda_scale * obs.sigma * math.sqrt(math.log(n1 * n2))
        hv_hat, rep = fista_l1(
            op, y, lam_rule, max_iter=opts.fista_inner_iter * 4, tol=opts.fista_tol
        )
    else:
        hv_hat, rep = fista_l1_continuation(
            op,
            y,
            target_residual=opts.direct_residual_rtol * float(np.linalg.norm(y)),
            factor=opts.fista_factor,
            max_stages=opts.fista_max_stages,
            inner_iter=opts.fista_inner_iter,
            tol=opts.fista_tol,
        )
    return EstimateBundle(
        hv_hat=hv_hat,
        h_hat=_assemble(hv_hat, dict_bs, dict_ms),
        stage_reports=[rep],
    )


MAX_CODEBOOK_CONDITION = 1e8


def full_mc_estimate(
    obs: ObservationSet,
    z_book: Codebook,
    f_book: Codebook,
    opts: SolverOptions | None = None,
) -> EstimateBundle:
    """Full-rank baseline: complete Y with square codebooks, then invert them.

    Requires N_Z = N_BS and N_F = N_MS with well-conditioned codebooks; the
    channel estimate is (Z^H)^(-1) Y_hat F^(-1) and no beamspace estimate is
    produced.
    """
    opts = opts or SolverOptions()
    z, f = z_book.matrix, f_book.matrix
    if z.shape[0] != z.shape[1] or f.shape[0] != f.shape[1]:
        raise ValueError("full-rank baseline needs square codebooks (N_Z=N_BS, N_F=N_MS)")
    if np.linalg.cond(z) > MAX_CODEBOOK_CONDITION or np.linalg.cond(f) > MAX_CODEBOOK_CONDITION:
        raise ValueError("codebook condition number exceeds 1e8; cannot invert reliably")
    shape = (z.shape[1], f.shape[1])
    y_hat, rep = svt_complete(
        obs, shape, tau=opts.svt_tau, step=opts.svt_step,
        max_iter=opts.svt_max_iter, tol=opts.svt_tol,
    )
    h_hat = np.linalg.solve(z.conj().T, y_hat)
    h_hat = np.linalg.solve(f.T, h_hat.T).T
    return EstimateBundle(hv_hat=None, h_hat=h_hat, stage_reports=[rep])


def sample_complexity_bounds(
    p: int,
    num_clusters: int,
    n_bs: int,
    n_ms: int,
    bounds: TheoryBoundConfig | None = None,
) -> dict[str, int]:
    """Required codebook sizes and measurement counts for each recovery route.

    Evaluates, with the configured constants, the codebook-size conditions
    c1*pL*log(N_BS/pL) and c2*pL*log(N_MS/pL), the two-stage completion
    requirement c3*n^(5/4)*L*log(n) on the reduced matrix, the direct
    compressed-sensing count C_cs*p^2*L*log(N1*N2), and the full-rank
    completion count C_mc*max(N_BS,N_MS)^(5/4)*L*log(max(N_BS,N_MS)).
    """
    tb = bounds or TheoryBoundConfig()
    if p < 1 or num_clusters < 1:
        raise ValueError("p and the cluster count must be >= 1")
    pl = p * num_clusters
    if pl >= min(n_bs, n_ms):
        raise ValueError(
            f"p*L = {pl} reaches min(N_BS, N_MS) = {min(n_bs, n_ms)}: the"
            " codebook-size bounds degenerate (log argument <= 1)"
        )
    n_z_min = max(1, math.ceil(tb.c1 * pl * math.log(n_bs / pl)))
    n_f_min = max(1, math.ceil(tb.c2 * pl * math.log(n_ms / pl)))
    n = max(n_z_min, n_f_min)
    t_two_stage = max(1, math.ceil(tb.c3 * n**1.25 * num_clusters * math.log(n)))
    t_direct = max(1, math.ceil(tb.c_cs * p * p * num_clusters * math.log(n_bs * n_ms)))
    n_big = max(n_bs, n_ms)
    t_full_mc = max(1, math.ceil(tb.c_mc * n_big**1.25 * num_clusters * math.log(n_big)))
    return {
        "n_z_min": n_z_min,
        "n_f_min": n_f_min,
        "t_min_two_stage": t_two_stage,
        "t_min_direct": t_direct,
        "t_min_full_mc": t_full_mc,
    }
