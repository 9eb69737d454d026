"""Empirical restricted-isometry verification at small sizes.

Computes restricted isometry constants by brute force over column supports,
checks the two-sided Frobenius bound for sparse matrices squeezed between two
RIP matrices, and evaluates the exact-recovery threshold on the constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

EXHAUSTIVE_SUPPORT_LIMIT = 10**6

# Exact l1 recovery of a k-row/column-sparse matrix is guaranteed when the
# level-2k constant of both factors is below (1 + sqrt(2)) - sqrt(2 + 2*sqrt(2)).
RECOVERY_THRESHOLD = 1.0 + math.sqrt(2.0) * (1.0 - math.sqrt(1.0 + math.sqrt(2.0)))


@dataclass(frozen=True)
class RicEstimate:
    """Restricted isometry constant at sparsity level k, with the support attaining it."""

    k: int
    delta: float
    extremal_support: tuple[int, ...]


@dataclass(frozen=True)
class SandwichResult:
    ok: bool
    ratio: float
    lower_bound: float
    upper_bound: float


def _support_delta(a: np.ndarray, support) -> float:
    sub = a[:, support]
    eigs = np.linalg.eigvalsh(sub.conj().T @ sub)
    return max(float(eigs[-1] - 1.0), float(1.0 - eigs[0]))


def empirical_ric(
    a: np.ndarray, k: int, mode: str = "exhaustive", n_trials: int = 1000, seed=0
) -> RicEstimate:
    """Restricted isometry constant of `a` at level k.

    Exhaustive mode scans every size-k column support and is exact; sampled
    mode scans `n_trials` random supports and lower-bounds the true constant.
    """
    a = np.asarray(a)
    n_cols = a.shape[1]
    if not 1 <= k <= n_cols:
        raise ValueError(f"k must be in [1, {n_cols}]")
    if mode == "exhaustive":
        total = math.comb(n_cols, k)
        if total > EXHAUSTIVE_SUPPORT_LIMIT:
            raise ValueError(
                f"exhaustive scan over {total} supports exceeds the {EXHAUSTIVE_SUPPORT_LIMIT} limit"
            )
        supports = combinations(range(n_cols), k)
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        supports = (
            tuple(sorted(rng.choice(n_cols, size=k, replace=False))) for _ in range(n_trials)
        )
    else:
        raise ValueError("mode must be 'exhaustive' or 'sampled'")

    best_delta = -1.0
    best_support: tuple[int, ...] = ()
    for support in supports:
        d = _support_delta(a, list(support))
        if d > best_delta:
            best_delta, best_support = d, tuple(support)
    return RicEstimate(k=k, delta=best_delta, extremal_support=best_support)


def count_nonzero_rows_cols(phi: np.ndarray) -> tuple[int, int]:
    mask = np.abs(phi) > 0.0
    return int(mask.any(axis=1).sum()), int(mask.any(axis=0).sum())


def sandwich_check(
    a: np.ndarray, b: np.ndarray, phi: np.ndarray, delta: float, row_col_budget: int
) -> SandwichResult:
    """Verify (1-delta)^2 ||Phi||_F^2 <= ||A Phi B^H||_F^2 <= (1+delta)^2 ||Phi||_F^2.

    `delta` should be the level-`row_col_budget` restricted isometry constant
    of both factors (their max); the bound is then a theorem, so any failure
    flags an implementation bug rather than bad luck.
    """
    phi = np.asarray(phi)
    rows, cols = count_nonzero_rows_cols(phi)
    if rows > row_col_budget or cols > row_col_budget:
        raise ValueError(
            f"phi has {rows} nonzero rows / {cols} cols, over the budget {row_col_budget}"
        )
    phi_energy = float(np.linalg.norm(phi)) ** 2
    lower = (1.0 - delta) ** 2
    upper = (1.0 + delta) ** 2
    if phi_energy == 0.0:
        return SandwichResult(ok=True, ratio=1.0, lower_bound=lower, upper_bound=upper)
    ratio = float(np.linalg.norm(a @ phi @ b.conj().T)) ** 2 / phi_energy
    ok = lower <= ratio <= upper
    return SandwichResult(ok=ok, ratio=ratio, lower_bound=lower, upper_bound=upper)


def exact_recovery_condition(delta: float) -> bool:
    """Whether the restricted isometry constant is below the exact-recovery threshold."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return delta < RECOVERY_THRESHOLD


def gaussian_matrix(rows: int, cols: int, seed, complex_valued: bool = True) -> np.ndarray:
    """iid Gaussian test matrix with variance 1/rows per entry (unit expected column norm)."""
    rng = np.random.default_rng(seed)
    if complex_valued:
        return (
            rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
        ) / np.sqrt(2.0 * rows)
    return rng.standard_normal((rows, cols)) / np.sqrt(rows)
