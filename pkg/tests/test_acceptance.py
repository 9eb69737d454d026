"""Acceptance suite.

One test per criterion; each prints a single PASS/FAIL line (run with -s to
see them live). The heavier criteria run a few hundred seeded trials each and
use two worker processes; the whole module takes tens of minutes.
"""

import math
from itertools import combinations

import numpy as np
import pytest

from mmwave_ce import (
    AngleGrid,
    ArrayConfig,
    EntrySamplingOperator,
    SandwichOperator,
    adjoint_mismatch,
    build_dictionary,
    direct_cs_estimate,
    empirical_ric,
    exact_recovery_condition,
    fista_l1_continuation,
    gen_rc_codebook,
    grid_channel_from_supports,
    observe,
    sample_complexity_bounds,
    sample_support,
    sandwich_check,
    size_codebooks,
    svt_complete,
    two_stage_estimate,
)
from mmwave_ce.config import config_from_dict
from mmwave_ce.experiments import run_trials, trial_seed
from mmwave_ce.ripcheck import gaussian_matrix
from mmwave_ce.sounding import ObservationSet

WORKERS = 2
TRIALS = 100


def _report(name: str, ok: bool, detail: str):
    print(f"\n[ACCEPTANCE {'PASS' if ok else 'FAIL'}] {name}: {detail}")


def _rate(results) -> float:
    return sum(r.success for r in results) / len(results)


def _pooled_stderr(r1: float, r2: float, n: int) -> float:
    return math.sqrt(r1 * (1 - r1) / n + r2 * (1 - r2) / n)


def _paper_channel(on_grid: bool, spread_aoa=15.0, spread_aod=10.0) -> dict:
    return {
        "num_clusters": 2,
        "mean_aoa_deg": [30.0, -30.0],
        "mean_aod_deg": [30.0, -30.0],
        "spread_aoa_deg": spread_aoa,
        "spread_aod_deg": spread_aod,
        "rays_aoa": 10,
        "rays_aod": 10,
        "on_grid": on_grid,
    }


def _matched_cells(cfg, points, pipelines, schemes, trials=TRIALS):
    """Run every (point, pipeline, scheme) cell with seeds matched per (point, trial)."""
    cells = {}
    for point in points:
        seeds = [
            trial_seed(cfg.base_seed, cfg.sweep.axis, point, "paired", "paired", i)
            for i in range(trials)
        ]
        for pipeline in pipelines:
            for scheme in schemes:
                cells[(point, pipeline, scheme)] = run_trials(
                    cfg, point, pipeline, scheme, seeds, workers=WORKERS
                )
    return cells


# ---------------------------------------------------------------------------
# Criterion 1: exact on-grid recovery at 32 antennas


def test_exact_on_grid_recovery():
    cfg = config_from_dict({
        "name": "ongrid-recovery",
        "arrays": {"n_bs": 32, "n_ms": 32},
        "channel": _paper_channel(on_grid=True),
        "sweep": {"axis": "t", "values": [288]},
        "pipelines": ["two_stage"],
        "trials": 50,
        "success": {"metric": "rel_error", "threshold": 1e-3},
    })
    results = run_trials(cfg, 288, "two_stage", "rc", seeds=range(50), workers=WORKERS)
    rate = _rate(results)
    slowest = max(r.wall_time for r in results)
    detail = (
        f"rel_error<=1e-3 in {sum(r.success for r in results)}/50 seeds "
        f"(need >=45); slowest trial {slowest:.1f}s (limit 60s)"
    )
    ok = rate >= 0.9 and slowest <= 60.0
    _report("exact on-grid recovery (32 ant, T=288, N_Z=N_F=24)", ok, detail)
    assert slowest <= 60.0
    assert rate >= 0.9, detail


# ---------------------------------------------------------------------------
# Criterion 2: success-rate ordering vs measurement count, RC vs MBC


@pytest.fixture(scope="module")
def t_sweep_cells():
    cfg = config_from_dict({
        "name": "t-ordering",
        "arrays": {"n_bs": 64, "n_ms": 64},
        "channel": _paper_channel(on_grid=True),
        "sounding": {"schemes": ["rc", "mbc"], "sizing": "ratio", "sampling_ratio": 0.5},
        "sweep": {"axis": "t", "values": [96, 160, 240, 288]},
        "pipelines": ["two_stage", "direct_cs"],
    })
    return cfg, _matched_cells(
        cfg, cfg.sweep.values, ("two_stage", "direct_cs"), ("rc", "mbc")
    )


def test_success_ordering_vs_measurements(t_sweep_cells):
    cfg, cells = t_sweep_cells
    problems = []
    lines = []
    for scheme in ("rc", "mbc"):
        for point in cfg.sweep.values:
            r_ts = _rate(cells[(point, "two_stage", scheme)])
            r_dc = _rate(cells[(point, "direct_cs", scheme)])
            informative = (0.1 < r_ts < 0.9) or (0.1 < r_dc < 0.9)
            stderr = _pooled_stderr(r_ts, r_dc, TRIALS)
            lines.append(f"{scheme} T={point:g}: ts={r_ts:.2f} dc={r_dc:.2f}")
            if informative and not (r_ts - r_dc > stderr):
                problems.append(
                    f"{scheme} T={point:g}: two-stage {r_ts:.2f} vs direct {r_dc:.2f} "
                    f"(margin {r_ts - r_dc:.3f} <= stderr {stderr:.3f})"
                )
    ok = not problems
    _report("two-stage >= direct at informative T", ok, "; ".join(lines + problems))
    assert ok, problems


def test_rc_outperforms_mbc(t_sweep_cells):
    cfg, cells = t_sweep_cells
    problems = []
    details = []
    for pipeline in ("two_stage", "direct_cs"):
        means, ses = {}, {}
        for scheme in ("rc", "mbc"):
            rates = [_rate(cells[(point, pipeline, scheme)]) for point in cfg.sweep.values]
            means[scheme] = float(np.mean(rates))
            ses[scheme] = math.sqrt(
                sum(r * (1 - r) / TRIALS for r in rates)
            ) / len(rates)
        margin = means["rc"] - means["mbc"]
        stderr = math.sqrt(ses["rc"] ** 2 + ses["mbc"] ** 2)
        details.append(
            f"{pipeline}: rc={means['rc']:.3f} mbc={means['mbc']:.3f} "
            f"(margin {margin:.3f}, stderr {stderr:.3f})"
        )
        if not margin > stderr:
            problems.append(details[-1])
    ok = not problems
    _report("RC outperforms MBC for both pipelines", ok, "; ".join(details))
    assert ok, problems


# ---------------------------------------------------------------------------
# Criterion 3: angular-spread crossover at T=288


def test_spread_crossover():
    cfg = config_from_dict({
        "name": "spread-crossover",
        "arrays": {"n_bs": 64, "n_ms": 64},
        "channel": _paper_channel(on_grid=True),
        "sounding": {"schemes": ["rc"], "sizing": "fixed", "n_z": 24, "n_f": 24},
        "t": 288,
        "sweep": {"axis": "spread", "values": [6.0, 18.0, 22.0]},
        "pipelines": ["two_stage", "direct_cs"],
    })
    cells = _matched_cells(cfg, cfg.sweep.values, ("two_stage", "direct_cs"), ("rc",))
    rates = {
        (point, p): _rate(cells[(point, p, "rc")])
        for point in cfg.sweep.values
        for p in ("two_stage", "direct_cs")
    }
    lines = [
        f"spread={pt:g}: ts={rates[(pt, 'two_stage')]:.2f} dc={rates[(pt, 'direct_cs')]:.2f}"
        for pt in cfg.sweep.values
    ]

    problems = []
    r_dc, r_ts = rates[(6.0, "direct_cs")], rates[(6.0, "two_stage")]
    if not (r_dc - r_ts > _pooled_stderr(r_dc, r_ts, TRIALS)):
        problems.append(f"at 6 deg direct ({r_dc:.2f}) does not beat two-stage ({r_ts:.2f})")
    for pt in (18.0, 22.0):
        r_ts, r_dc = rates[(pt, "two_stage")], rates[(pt, "direct_cs")]
        if not (r_ts - r_dc > _pooled_stderr(r_ts, r_dc, TRIALS)):
            problems.append(f"at {pt:g} deg two-stage ({r_ts:.2f}) does not beat direct ({r_dc:.2f})")
    ok = not problems
    _report("spread crossover (direct wins at 6 deg, two-stage at >=18 deg)", ok,
            "; ".join(lines + problems))
    assert ok, problems


# ---------------------------------------------------------------------------
# Criterion 4: NMSE ordering vs SNR


def test_nmse_ordering_vs_snr():
    cfg = config_from_dict({
        "name": "snr-ordering",
        "arrays": {"n_bs": 64, "n_ms": 64},
        "channel": _paper_channel(on_grid=False),
        "sounding": {"schemes": ["rc"], "sizing": "fixed", "n_z": 24, "n_f": 24},
        "t": 288,
        "sweep": {"axis": "snr", "values": [5.0, 10.0, 15.0, 20.0, 25.0, 30.0]},
        "pipelines": ["two_stage", "direct_cs"],
    })
    cells = _matched_cells(cfg, cfg.sweep.values, ("two_stage", "direct_cs"), ("rc",))
    lines, problems = [], []
    for snr in cfg.sweep.values:
        m_ts = float(np.mean([t.nmse for t in cells[(snr, "two_stage", "rc")]]))
        m_dc = float(np.mean([t.nmse for t in cells[(snr, "direct_cs", "rc")]]))
        lines.append(f"snr={snr:g}: ts={m_ts:.3f} dc={m_dc:.3f}")
        if snr >= 15.0 and not m_ts <= m_dc:
            problems.append(f"at {snr:g} dB two-stage NMSE {m_ts:.3f} > direct {m_dc:.3f}")
    ok = not problems
    _report("mean NMSE two-stage <= direct for SNR >= 15 dB", ok, "; ".join(lines + problems))
    assert ok, problems


# ---------------------------------------------------------------------------
# Criterion 5: sandwich bound suite and constructive recovery


def test_sandwich_bound_suite():
    a = gaussian_matrix(16, 32, seed=11)
    b = gaussian_matrix(16, 32, seed=12)
    delta = max(empirical_ric(a, 4).delta, empirical_ric(b, 4).delta)
    rng = np.random.default_rng(13)
    failures = 0
    for _ in range(1000):
        n_rows = int(rng.integers(1, 5))
        n_cols = int(rng.integers(1, 5))
        rows = rng.choice(32, size=n_rows, replace=False)
        cols = rng.choice(32, size=n_cols, replace=False)
        phi = np.zeros((32, 32), complex)
        phi[np.ix_(rows, cols)] = rng.standard_normal((n_rows, n_cols)) + 1j * rng.standard_normal(
            (n_rows, n_cols)
        )
        if not sandwich_check(a, b, phi, delta=delta, row_col_budget=4).ok:
            failures += 1
    ok = failures == 0
    _report("two-sided bound with exhaustive level-4 constant (1000 matrices)",
            ok, f"failures={failures}, delta4={delta:.3f}")
    assert ok


def test_recovery_condition_implies_exact_recovery():
    found = None
    for seed in range(40):
        a = gaussian_matrix(160, 8, seed=seed)
        b = gaussian_matrix(160, 8, seed=500 + seed)
        delta = max(empirical_ric(a, 2).delta, empirical_ric(b, 2).delta)
        if exact_recovery_condition(delta):
            found = (a, b, delta)
            break
    assert found is not None, "no Gaussian pair met the recovery condition in 40 seeds"
    a, b, delta = found
    op = SandwichOperator(a, b.conj().T)
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(100):
        x = np.zeros((8, 8), complex)
        x[rng.integers(8), rng.integers(8)] = rng.standard_normal() + 1j * rng.standard_normal()
        g = op.forward(x)
        x_hat, _ = fista_l1_continuation(op, g, target_residual=1e-9 * np.linalg.norm(g))
        worst = max(worst, np.linalg.norm(x_hat - x) / np.linalg.norm(x))
    ok = worst <= 1e-6
    _report("recovery condition implies exact l1 recovery (100 instances)",
            ok, f"delta2={delta:.3f} < {0.21685:.5f}, worst rel error {worst:.2e}")
    assert ok, worst


# ---------------------------------------------------------------------------
# Criterion 6: l0-oracle equivalence


def _l0_best_pair(a_cols: np.ndarray, y: np.ndarray):
    best, best_resid = None, np.inf
    for s in combinations(range(a_cols.shape[1]), 2):
        sub = a_cols[:, s]
        coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
        resid = np.linalg.norm(y - sub @ coef)
        if resid < best_resid:
            best, best_resid = s, resid
    return tuple(sorted(best))


def test_l0_oracle_equivalence():
    t = 16  # noiseless measurement count, >= 12 per the criterion
    bs = ms = ArrayConfig(8)
    grid = AngleGrid.sine_uniform(8)
    dic = build_dictionary(bs, grid)
    n_z, n_f = size_codebooks(t, 0.5)
    matches = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        hv = np.zeros((8, 8), complex)
        idx = rng.choice(64, size=2, replace=False)
        hv.flat[idx] = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        h = dic @ hv @ dic.conj().T
        z = gen_rc_codebook(8, n_z, seed=seed + 100)
        f = gen_rc_codebook(8, n_f, seed=seed + 200)
        omega = sample_support(n_z, n_f, t, seed=seed + 300)
        obs = observe(h, z, f, omega, sigma=0.0)
        op = EntrySamplingOperator(z.matrix.conj().T @ dic, dic.conj().T @ f.matrix, omega)
        # dense copy of the operator for the exhaustive oracle
        a_cols = np.zeros((t, 64), complex)
        for c in range(64):
            e = np.zeros((8, 8), complex)
            e.flat[c] = 1.0
            a_cols[:, c] = op.forward(e)
        oracle = _l0_best_pair(a_cols, obs.values)
        x, _ = fista_l1_continuation(op, obs.values, target_residual=1e-8 * np.linalg.norm(obs.values))
        mine = tuple(sorted(np.argsort(np.abs(x).ravel())[-2:]))
        matches += oracle == mine
    ok = matches >= 95
    _report("FISTA continuation matches exhaustive l0 search", ok, f"{matches}/100 support matches")
    assert ok, matches


# ---------------------------------------------------------------------------
# Criterion 7: numerical contracts


def test_numerical_contracts():
    rng = np.random.default_rng(23)
    # pipeline operators on realistic matrices
    n, n_z = 32, 16
    dic = build_dictionary(ArrayConfig(n), AngleGrid.sine_uniform(n))
    z = gen_rc_codebook(n, n_z, seed=1)
    f = gen_rc_codebook(n, n_z, seed=2)
    omega = sample_support(n_z, n_z, 128, seed=3)
    left, right = z.matrix.conj().T @ dic, dic.conj().T @ f.matrix
    ops = [SandwichOperator(left, right), EntrySamplingOperator(left, right, omega)]
    worst_adj = max(adjoint_mismatch(op, probes=20, seed=5) for op in ops)

    # smooth-part gradient vs central differences
    op = ops[0]
    y = rng.standard_normal(op.out_shape) + 1j * rng.standard_normal(op.out_shape)

    def fval(x):
        return 0.5 * np.linalg.norm(op.forward(x) - y) ** 2

    h = 1e-5
    worst_grad = 0.0
    for _ in range(10):
        x = rng.standard_normal(op.in_shape) + 1j * rng.standard_normal(op.in_shape)
        g = op.adjoint(op.forward(x) - y)
        i, j = rng.integers(op.in_shape[0]), rng.integers(op.in_shape[1])
        e = np.zeros(op.in_shape, complex)
        e[i, j] = h
        d_re = (fval(x + e) - fval(x - e)) / (2 * h)
        d_im = (fval(x + 1j * e) - fval(x - 1j * e)) / (2 * h)
        scale = max(abs(g[i, j]), 1e-12)
        worst_grad = max(
            worst_grad, abs(d_re - g[i, j].real) / scale, abs(d_im - g[i, j].imag) / scale
        )

    # tiny completion instance (unit-scale 2x2 needs an instance-scaled tau)
    omega2 = np.array([[0, 0], [0, 1], [1, 0]])
    obs2 = ObservationSet(omega=omega2, values=np.ones(3, complex), sigma=0.0)
    y2, _ = svt_complete(obs2, (2, 2), tau=2000.0, step=1.5, max_iter=20000, tol=1e-8)
    svt_err = abs(y2[1, 1] - 1.0)

    # empirical RIC against an independent eigen-scan
    a = gaussian_matrix(20, 40, seed=29, complex_valued=False)
    est = empirical_ric(a, k=2)
    worst_ric = -np.inf
    for s in combinations(range(40), 2):
        sub = a[:, list(s)]
        w = np.linalg.eigvalsh(sub.conj().T @ sub)
        worst_ric = max(worst_ric, w[-1] - 1.0, 1.0 - w[0])
    ric_gap = abs(est.delta - worst_ric)

    ok = worst_adj <= 1e-10 and worst_grad <= 1e-5 and svt_err <= 1e-2 and ric_gap <= 1e-10
    _report(
        "numerical contracts",
        ok,
        f"adjoint mismatch {worst_adj:.1e} (<=1e-10); gradient FD error {worst_grad:.1e} "
        f"(<=1e-5); 2x2 completion error {svt_err:.1e} (<=1e-2); RIC oracle gap {ric_gap:.1e} "
        f"(<=1e-10)",
    )
    assert worst_adj <= 1e-10
    assert worst_grad <= 1e-5
    assert svt_err <= 1e-2
    assert ric_gap <= 1e-10


# ---------------------------------------------------------------------------
# Criterion 8: sample-complexity trend


def _transition_point(success_by_t: dict[int, float]) -> int | None:
    for t in sorted(success_by_t):
        if success_by_t[t] >= 0.5:
            return t
    return None


def _c8_trial(args) -> bool:
    p, num_clusters, t, seed, pipeline = args
    n = 32
    bs = ms = ArrayConfig(n)
    grid = AngleGrid.sine_uniform(n)
    dic = build_dictionary(bs, grid)
    rng = np.random.default_rng(seed)
    starts = rng.choice(np.arange(2, n - p - 2, max(p + 3, 6)), size=num_clusters, replace=False)
    supports = [
        (list(range(int(s), int(s) + p)), list(range(int(s) + 1, int(s) + 1 + p)))
        for s in starts
    ]
    real = grid_channel_from_supports(bs, ms, grid, grid, supports, seed=seed + 1000)
    n_z, n_f = size_codebooks(t, 0.5)
    z = gen_rc_codebook(n, n_z, seed=seed + 2000)
    f = gen_rc_codebook(n, n_f, seed=seed + 3000)
    omega = sample_support(n_z, n_f, t, seed=seed + 4000)
    obs = observe(real.h, z, f, omega, sigma=0.0)
    est = (
        two_stage_estimate(obs, z, f, dic, dic)
        if pipeline == "two_stage"
        else direct_cs_estimate(obs, z, f, dic, dic)
    )
    return bool(np.linalg.norm(est.h_hat - real.h) / np.linalg.norm(real.h) <= 1e-2)


def _controlled_cell(p, num_clusters, t, trials, pipeline):
    from concurrent.futures import ProcessPoolExecutor

    base = p * 1009 + num_clusters * 101 + t * 13
    jobs = [(p, num_clusters, t, base + i, pipeline) for i in range(trials)]
    with ProcessPoolExecutor(max_workers=WORKERS) as pool:
        return sum(pool.map(_c8_trial, jobs)) / trials


def test_sample_complexity_trend():
    trials = 30
    ts_ladder = (24, 40, 64, 96, 140, 200, 280, 380)
    dc_ladder = (8, 14, 24, 40, 64, 96, 140, 200)

    ts_transition = {}
    for num_clusters in (1, 2, 3):
        rates = {t: _controlled_cell(2, num_clusters, t, trials, "two_stage") for t in ts_ladder}
        ts_transition[num_clusters] = _transition_point(rates)

    dc_transition = {}
    for p in (1, 2, 3):
        rates = {t: _controlled_cell(p, 1, t, trials, "direct_cs") for t in dc_ladder}
        dc_transition[p] = _transition_point(rates)

    predicted = {
        (p, l): sample_complexity_bounds(p, l, 32, 32)
        for p, l in [(2, 1), (2, 2), (2, 3), (1, 1), (3, 1)]
    }
    ts_vals = [ts_transition[l] for l in (1, 2, 3)]
    dc_vals = [dc_transition[p] for p in (1, 2, 3)]
    ok = (
        all(v is not None for v in ts_vals + dc_vals)
        and ts_vals[0] < ts_vals[1] < ts_vals[2]
        and dc_vals[0] < dc_vals[1] < dc_vals[2]
    )
    _report(
        "phase-transition scaling",
        ok,
        f"two-stage T* by clusters {ts_transition} (bound t_min_two_stage "
        f"{[predicted[(2, l)]['t_min_two_stage'] for l in (1, 2, 3)]}); "
        f"direct T* by spread {dc_transition} (bound t_min_direct "
        f"{[predicted[(p, 1)]['t_min_direct'] for p in (1, 2, 3)]})",
    )
    assert ok, (ts_transition, dc_transition)
