"""Proximal solvers: complex soft-thresholding, singular-value shrinkage,
matrix completion by singular value thresholding (noiseless) and fixed-point
continuation (noisy), and accelerated proximal gradient (FISTA) for l1
problems over matrix-free operators.

All solvers are complex-valued; the l1 norm is the sum of entry moduli and
its proximal map is the complex soft threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import MeasurementOperator, check_adjoint, lipschitz_estimate
from .sounding import ObservationSet


@dataclass
class SolverReport:
    """Convergence record. `final_residual` is recomputed from the returned
    solution (relative observed-entry residual for the completion solvers,
    absolute data residual ||y - op(x)|| for the l1 solvers)."""

    iterations: int
    final_residual: float
    objective_trace: list[float] = field(repr=False, default_factory=list)
    converged: bool = False


def soft_threshold(x, tau: float):
    """Entrywise complex soft threshold: shrink the modulus by tau, keep the phase."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    x = np.asarray(x)
    mag = np.abs(x)
    scale = np.maximum(mag - tau, 0.0) / np.where(mag > 0.0, mag, 1.0)
    return scale * x


def _svd_shrink_parts(m: np.ndarray, tau: float):
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    s_shrunk = np.maximum(s - tau, 0.0)
    keep = s_shrunk > 0.0
    out = (u[:, keep] * s_shrunk[keep]) @ vh[keep, :]
    return out.astype(complex), s_shrunk


def svd_shrink(m: np.ndarray, tau: float) -> np.ndarray:
    """Proximal map of the nuclear norm: soft-threshold the singular values."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return _svd_shrink_parts(np.asarray(m, dtype=complex), tau)[0]


def _scatter(shape, omega, values) -> np.ndarray:
    out = np.zeros(shape, dtype=complex)
    out[omega[:, 0], omega[:, 1]] = values
    return out


# Auto-tau ladder for svt_complete, as multiples of the estimated spectral
# norm of the full matrix. The small multiplier converges quickly on easy
# instances; the large one pushes the shrinkage bias below the stopping
# tolerance on instances near the completion phase transition.
SVT_TAU_LADDER = (10.0, 100.0)
SVT_LADDER_SPLIT = 0.3  # fraction of the iteration budget given to the small tau


def _svt_stage(shape, omega, values, data_norm, p, snorm, tau, step, max_iter, tol, trace):
    """Shrink/correct iteration on the dual matrix, with Nesterov momentum.

    Returns the best iterate seen (by observed-entry residual); momentum can
    make individual residuals non-monotone.
    """
    k0 = math.ceil(tau / (step * snorm))
    dual = (k0 * step) * p
    extrap = dual.copy()
    t_acc = 1.0
    best_x, best_rel = np.zeros(shape, dtype=complex), np.inf
    it = 0
    for it in range(1, max_iter + 1):
        x, _ = _svd_shrink_parts(extrap, tau)
        resid = x[omega[:, 0], omega[:, 1]] - values
        rel = float(np.linalg.norm(resid)) / data_norm
        trace.append(rel)
        if rel < best_rel:
            best_rel, best_x = rel, x
        if rel <= tol:
            break
        dual_new = extrap.copy()
        dual_new[omega[:, 0], omega[:, 1]] -= step * resid
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_acc * t_acc))
        extrap = dual_new + ((t_acc - 1.0) / t_next) * (dual_new - dual)
        dual, t_acc = dual_new, t_next
    return best_x, best_rel, it


def svt_complete(
    obs: ObservationSet,
    shape: tuple[int, int],
    tau: float | None = None,
    step: float | None = None,
    max_iter: int = 4000,
    tol: float = 1e-7,
) -> tuple[np.ndarray, SolverReport]:
    """Complete a low-rank matrix from exact entries by singular value thresholding.

    Accelerated dual ascent on min tau*||X||_* + 0.5*||X||_F^2 subject to
    agreement on the observed entries: shrink the (extrapolated) dual matrix,
    then correct it on the observed set. Converges when the relative residual
    on the observed entries falls below `tol`.

    The tau-scaled objective biases the solution away from the minimum-nuclear
    -norm completion by O(data scale / tau), so with tau omitted an escalating
    ladder of multiples of the estimated spectral norm sigma1(P_Omega)*size/T
    is used; pass tau explicitly for unit-scale toy instances. The step
    defaults to 1.2*size/T capped below 2, the dual-ascent stability limit.
    """
    omega, values = obs.omega, obs.values
    t = len(values)
    data_norm = float(np.linalg.norm(values))
    if data_norm == 0.0:
        return np.zeros(shape, dtype=complex), SolverReport(0, 0.0, [], True)
    if step is None:
        step = min(1.2 * shape[0] * shape[1] / t, 1.9)
    if step <= 0 or (tau is not None and tau <= 0):
        raise ValueError("tau and step must be > 0")

    p = _scatter(shape, omega, values)
    snorm = float(np.linalg.svd(p, compute_uv=False)[0])
    if tau is not None:
        stages = [(tau, max_iter)]
    else:
        spectral_estimate = snorm * shape[0] * shape[1] / t
        small = int(max_iter * SVT_LADDER_SPLIT)
        stages = [
            (SVT_TAU_LADDER[0] * spectral_estimate, small),
            (SVT_TAU_LADDER[1] * spectral_estimate, max_iter - small),
        ]

    trace: list[float] = []
    best_x, best_rel = np.zeros(shape, dtype=complex), np.inf
    total_it = 0
    for stage_tau, budget in stages:
        x, rel, it = _svt_stage(
            shape, omega, values, data_norm, p, snorm, stage_tau, step, budget, tol, trace
        )
        total_it += it
        if rel < best_rel:
            best_rel, best_x = rel, x
        if best_rel <= tol:
            break

    final = float(
        np.linalg.norm(best_x[omega[:, 0], omega[:, 1]] - values)
    ) / data_norm
    return best_x, SolverReport(total_it, final, trace, best_rel <= tol)


def _fpc_schedule(lambda_final: float, spectral0: float) -> list[float]:
    # geometric continuation from just under the data's spectral scale
    lams = [0.9 * spectral0 * 0.25**k for k in range(4)]
    lams = [l for l in lams if l > lambda_final]
    lams.append(lambda_final)
    return lams


def fpc_complete(
    obs: ObservationSet,
    shape: tuple[int, int],
    lambda_final: float,
    continuation_schedule: list[float] | None = None,
    max_iter: int = 500,
    tol: float = 1e-8,
) -> tuple[np.ndarray, SolverReport]:
    """Nuclear-norm regularized completion for noisy entries.

    Proximal gradient on 0.5*||X_Omega - Y_Omega||_F^2 + lambda*||X||_* with
    unit step (the sampling mask is a projection), warm-started along a
    decreasing lambda schedule ending at `lambda_final`. The recorded
    objective uses the current stage's lambda and never increases.
    """
    omega, values = obs.omega, obs.values
    data_norm = float(np.linalg.norm(values))
    if data_norm == 0.0:
        return np.zeros(shape, dtype=complex), SolverReport(0, 0.0, [], True)
    if lambda_final <= 0:
        raise ValueError("lambda_final must be > 0")
    if continuation_schedule is None:
        p = _scatter(shape, omega, values)
        spectral0 = float(np.linalg.svd(p, compute_uv=False)[0])
        continuation_schedule = _fpc_schedule(lambda_final, spectral0)

    x = np.zeros(shape, dtype=complex)
    trace: list[float] = []
    total_it = 0
    converged = False
    for lam in continuation_schedule:
        converged = False
        for _ in range(max_iter):
            total_it += 1
            resid = x[omega[:, 0], omega[:, 1]] - values
            grad = _scatter(shape, omega, resid)
            x_next, s = _svd_shrink_parts(x - grad, lam)
            resid_next = x_next[omega[:, 0], omega[:, 1]] - values
            trace.append(0.5 * float(np.linalg.norm(resid_next)) ** 2 + lam * float(s.sum()))
            change = float(np.linalg.norm(x_next - x)) / max(float(np.linalg.norm(x)), 1e-300)
            x = x_next
            if change <= tol:
                converged = True
                break

    final = float(np.linalg.norm(x[omega[:, 0], omega[:, 1]] - values)) / data_norm
    return x, SolverReport(total_it, final, trace, converged)


def fista_l1(
    op: MeasurementOperator,
    y: np.ndarray,
    lam: float,
    max_iter: int = 1000,
    tol: float = 1e-8,
    step: float | None = None,
    x0: np.ndarray | None = None,
    verify_adjoint: bool = True,
    seed=0,
) -> tuple[np.ndarray, SolverReport]:
    """Accelerated proximal gradient for 0.5*||y - op(x)||^2 + lam*||x||_1.

    The step defaults to the inverse of a power-iteration Lipschitz estimate
    (with a 5% safety margin, since power iteration approaches the true
    constant from below). Converges when the gradient-map norm drops below
    `tol` times the gradient scale at zero; otherwise the best-objective
    iterate is returned with converged=False.
    """
    if lam <= 0:
        raise ValueError("lam must be > 0")
    if verify_adjoint:
        check_adjoint(op)
    if step is None:
        lip = lipschitz_estimate(op, iters=50, seed=seed)
        step = 1.0 / (1.05 * max(lip, 1e-300))

    grad_scale = max(float(np.linalg.norm(op.adjoint(y))), 1e-300)
    x = np.zeros(op.in_shape, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex)
    fx = op.forward(x)
    z, fz = x, fx
    t = 1.0

    best_obj = 0.5 * float(np.linalg.norm(fx - y)) ** 2 + lam * float(np.abs(x).sum())
    best_x = x
    trace = [best_obj]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = op.adjoint(fz - y)
        x_new = soft_threshold(z - step * g, step * lam)
        fx_new = op.forward(x_new)
        obj = 0.5 * float(np.linalg.norm(fx_new - y)) ** 2 + lam * float(np.abs(x_new).sum())
        trace.append(obj)
        if obj <= best_obj:
            best_obj, best_x = obj, x_new
        gm = float(np.linalg.norm(x_new - z)) / step
        if gm <= tol * grad_scale:
            converged = True
            x = x_new
            break
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_new
        z = x_new + beta * (x_new - x)
        # the extrapolated point's image follows by linearity, saving a forward;
        # recompute it exactly now and then to cap floating-point drift
        fz = fx_new + beta * (fx_new - fx) if it % 50 else op.forward(z)
        x, fx, t = x_new, fx_new, t_new

    final = float(np.linalg.norm(op.forward(best_x) - y))
    return best_x, SolverReport(it, final, trace, converged)


def fista_l1_continuation(
    op: MeasurementOperator,
    y: np.ndarray,
    target_residual: float,
    rel_window: float | None = None,
    factor: float = 0.1,
    max_stages: int = 16,
    inner_iter: int = 400,
    tol: float = 1e-9,
    step: float | None = None,
    seed=0,
) -> tuple[np.ndarray, SolverReport]:
    """Solve the l1 problem along a decreasing lambda ladder until the data
    residual ||y - op(x)|| reaches `target_residual`.

    With `rel_window` set, the ladder instead seeks a residual within
    (1 +/- rel_window) of the target (discrepancy principle for noisy data),
    refining lambda by geometric bisection once the target is bracketed.
    Without a window this realizes the equality-constrained l1 problem:
    lambda keeps decreasing (warm-started) until the residual is at most the
    target, which approaches the minimum-l1 interpolating solution.
    """
    check_adjoint(op)
    y_norm = float(np.linalg.norm(y))
    lam_max = float(np.abs(op.adjoint(y)).max(initial=0.0))
    if lam_max == 0.0 or y_norm <= target_residual:
        zero = np.zeros(op.in_shape, dtype=complex)
        return zero, SolverReport(0, y_norm, [], True)
    if step is None:
        step = 1.0 / (1.05 * max(lipschitz_estimate(op, iters=50, seed=seed), 1e-300))

    lam_floor = lam_max * 1e-14
    upper = target_residual if rel_window is None else target_residual * (1.0 + rel_window)
    lower = 0.0 if rel_window is None else target_residual * (1.0 - rel_window)

    x = np.zeros(op.in_shape, dtype=complex)
    trace: list[float] = []
    total_it = 0
    lam = 0.5 * lam_max
    lam_prev = None
    resid = y_norm
    converged = False
    stalled = 0
    for _ in range(max_stages):
        x, rep = fista_l1(
            op, y, lam, max_iter=inner_iter, tol=tol, step=step, x0=x, verify_adjoint=False
        )
        total_it += rep.iterations
        trace.extend(rep.objective_trace)
        prev_resid, resid = resid, rep.final_residual
        if resid <= upper:
            converged = True
            break
        # plateauing residual means the target is out of reach; stop burning stages
        stalled = stalled + 1 if resid > 0.9 * prev_resid else 0
        if stalled >= 2:
            break
        lam_prev = lam
        lam *= factor
        if lam < lam_floor:
            break

    if rel_window is not None and converged and resid < lower and lam_prev is not None:
        # overshot the window: residual is monotone in lambda, bisect the bracket
        lo, hi = lam, lam_prev
        for _ in range(8):
            mid = math.sqrt(lo * hi)
            x_mid, rep = fista_l1(
                op, y, mid, max_iter=inner_iter, tol=tol, step=step, x0=x, verify_adjoint=False
            )
            total_it += rep.iterations
            trace.extend(rep.objective_trace)
            if rep.final_residual > upper:
                hi = mid
            else:
                x, resid = x_mid, rep.final_residual
                if rep.final_residual >= lower:
                    break
                lo = mid

    final = float(np.linalg.norm(op.forward(x) - y))
    return x, SolverReport(total_it, final, trace, converged)


def fpc_complete_discrepancy(
    obs: ObservationSet,
    shape: tuple[int, int],
    target_residual: float,
    rel_window: float = 0.2,
    factor: float = 0.25,
    max_stages: int = 12,
    max_iter: int = 300,
    tol: float = 1e-7,
) -> tuple[np.ndarray, SolverReport]:
    """Noisy completion with the regularization weight calibrated so the
    attained observed-entry residual matches `target_residual` (absolute,
    Frobenius) within the relative window."""
    omega, values = obs.omega, obs.values
    data_norm = float(np.linalg.norm(values))
    if data_norm <= target_residual:
        return np.zeros(shape, dtype=complex), SolverReport(0, data_norm / max(data_norm, 1e-300), [], True)

    p = _scatter(shape, omega, values)
    lam = 0.9 * float(np.linalg.svd(p, compute_uv=False)[0])
    upper = target_residual * (1.0 + rel_window)
    lower = target_residual * (1.0 - rel_window)

    x = np.zeros(shape, dtype=complex)
    trace: list[float] = []
    total_it = 0
    lam_prev = None
    resid = data_norm
    converged = False
    for _ in range(max_stages):
        x, rep = _fpc_warm(obs, shape, lam, x, max_iter, tol)
        total_it += rep.iterations
        trace.extend(rep.objective_trace)
        resid = float(np.linalg.norm(x[omega[:, 0], omega[:, 1]] - values))
        if resid <= upper:
            converged = True
            break
        lam_prev = lam
        lam *= factor

    if converged and resid < lower and lam_prev is not None:
        lo, hi = lam, lam_prev
        for _ in range(8):
            mid = math.sqrt(lo * hi)
            x_mid, rep = _fpc_warm(obs, shape, mid, x, max_iter, tol)
            total_it += rep.iterations
            trace.extend(rep.objective_trace)
            r_mid = float(np.linalg.norm(x_mid[omega[:, 0], omega[:, 1]] - values))
            if r_mid > upper:
                hi = mid
            else:
                x, resid = x_mid, r_mid
                if r_mid >= lower:
                    break
                lo = mid

    final = float(np.linalg.norm(x[omega[:, 0], omega[:, 1]] - values)) / data_norm
    return x, SolverReport(total_it, final, trace, converged)


def _fpc_warm(obs, shape, lam, x0, max_iter, tol):
    """One fixed-lambda proximal-gradient stage warm-started at x0."""
    omega, values = obs.omega, obs.values
    x = np.asarray(x0, dtype=complex).copy()
    trace: list[float] = []
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        resid = x[omega[:, 0], omega[:, 1]] - values
        x_next, s = _svd_shrink_parts(x - _scatter(shape, omega, resid), lam)
        resid_next = x_next[omega[:, 0], omega[:, 1]] - values
        trace.append(0.5 * float(np.linalg.norm(resid_next)) ** 2 + lam * float(s.sum()))
        change = float(np.linalg.norm(x_next - x)) / max(float(np.linalg.norm(x)), 1e-300)
        x = x_next
        if change <= tol:
            converged = True
            break
    final = float(np.linalg.norm(x[omega[:, 0], omega[:, 1]] - values)) / max(
        float(np.linalg.norm(values)), 1e-300
    )
    return x, SolverReport(it, final, trace, converged)
