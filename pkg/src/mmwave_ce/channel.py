"""Clustered geometric mmWave channel generator with angular spreads.

Each scattering cluster contributes a rank-1 outer product of a transmit-side
and a receive-side ray bundle, so a channel with L clusters has rank at most L
while its beamspace representation stays sparse (a few occupied angle bins per
cluster in each domain).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arrays import AngleGrid, ArrayConfig, build_dictionary, steering_matrix

SPEED_OF_LIGHT = 2.998e8  # m/s

# Entries below this fraction of the largest magnitude count as zero when
# measuring beamspace support sizes.
SPARSITY_REL_THRESHOLD = 1e-8


@dataclass(frozen=True)
class ClusterChannelConfig:
    """Cluster channel: per-cluster mean angles, angular spreads and ray counts.

    Angles are radians. `rays_aoa` (`rays_aod`) is the number of distinct
    receive-side (transmit-side) rays per cluster, for rays_aoa * rays_aod
    paths per cluster in total. `distance_m` and `carrier_hz` set the path
    gain scale rho = (4*pi*D*fc/c)^2.
    """

    num_clusters: int
    mean_aoa: tuple[float, ...]
    mean_aod: tuple[float, ...]
    spread_aoa: float
    spread_aod: float
    rays_aoa: int = 10
    rays_aod: int = 10
    distance_m: float = 30.0
    carrier_hz: float = 28e9
    on_grid: bool = True

    def __post_init__(self):
        if self.num_clusters < 1:
            raise ValueError("num_clusters must be >= 1")
        if len(self.mean_aoa) != self.num_clusters or len(self.mean_aod) != self.num_clusters:
            raise ValueError("need one mean AoA and one mean AoD per cluster")
        if self.spread_aoa < 0 or self.spread_aod < 0:
            raise ValueError("angular spreads must be >= 0")
        if self.rays_aoa < 1 or self.rays_aod < 1:
            raise ValueError("ray counts must be >= 1")
        if self.distance_m <= 0 or self.carrier_hz <= 0:
            raise ValueError("distance and carrier frequency must be > 0")


def path_gain_rho(cfg: ClusterChannelConfig) -> float:
    """Free-space attenuation factor rho = (4*pi*D*fc/c)^2; path gains have variance 1/rho."""
    return (4.0 * np.pi * cfg.distance_m * cfg.carrier_hz / SPEED_OF_LIGHT) ** 2


@dataclass
class ClusterDraw:
    """One cluster's drawn rays: angle shifts, per-ray gains, and (on grid) bin indices."""

    mean_aoa: float
    mean_aod: float
    aoa_shifts: np.ndarray
    aod_shifts: np.ndarray
    gains_aoa: np.ndarray  # alpha_i, receive-side bundle coefficients
    gains_aod: np.ndarray  # beta_j, transmit-side bundle coefficients
    aoa_angles: np.ndarray  # synthesis angles (snapped to the grid when on grid)
    aod_angles: np.ndarray
    aoa_bins: np.ndarray | None = None
    aod_bins: np.ndarray | None = None


@dataclass
class ChannelRealization:
    """Ground-truth channel draw: dense matrix, ray table, optional beamspace truth."""

    h: np.ndarray
    clusters: list[ClusterDraw]
    hv_truth: np.ndarray | None
    p_measured: int
    rank_truth: int

    @property
    def rays(self) -> np.ndarray:
        """Flat per-path table with one row per (cluster, aoa ray, aod ray) combination."""
        rows = []
        for l, c in enumerate(self.clusters):
            for i in range(len(c.aoa_shifts)):
                for j in range(len(c.aod_shifts)):
                    rows.append(
                        (l, c.aoa_shifts[i], c.aod_shifts[j], c.gains_aoa[i], c.gains_aod[j])
                    )
        return np.array(
            rows,
            dtype=[
                ("cluster", int),
                ("aoa_shift", float),
                ("aod_shift", float),
                ("gain_alpha", complex),
                ("gain_beta", complex),
            ],
        )


@dataclass(frozen=True)
class SparsityReport:
    p: int
    nnz_rows: int
    nnz_cols: int
    nnz_total: int


def _support_count(vec: np.ndarray, rel_threshold: float) -> int:
    mags = np.abs(vec)
    top = mags.max(initial=0.0)
    if top == 0.0:
        return 0
    return int(np.count_nonzero(mags > rel_threshold * top))


def _bin_coefficients(bins: np.ndarray, gains: np.ndarray, size: int) -> np.ndarray:
    vec = np.zeros(size, dtype=complex)
    np.add.at(vec, bins, gains)
    return vec


def numerical_rank(m: np.ndarray, rel_cutoff: float = 1e-8) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_cutoff * s[0]))


def draw_channel(
    cfg: ClusterChannelConfig,
    bs: ArrayConfig,
    ms: ArrayConfig,
    grid_bs: AngleGrid,
    grid_ms: AngleGrid,
    seed,
) -> ChannelRealization:
    """Draw a random cluster channel.

    Per cluster, angle shifts are uniform in (-spread/2, +spread/2) around the
    mean angle and the two gain bundles are independent circular complex
    Gaussians with variance rho^(-1/2) each, so every per-path gain product
    has the variance 1/rho expected of free-space propagation. In on-grid
    mode every ray angle is snapped to its nearest grid point (sine-domain
    metric) and the exact beamspace matrix is assembled alongside the channel.
    """
    half_aoa, half_aod = cfg.spread_aoa / 2.0, cfg.spread_aod / 2.0
    for l in range(cfg.num_clusters):
        if abs(cfg.mean_aoa[l]) + half_aoa > np.pi / 2 or abs(cfg.mean_aod[l]) + half_aod > np.pi / 2:
            raise ValueError(
                f"cluster {l}: mean angle plus half spread leaves [-pi/2, pi/2]"
            )

    rng = np.random.default_rng(seed)
    rho = path_gain_rho(cfg)
    # std per complex coefficient such that var(alpha) = var(beta) = rho^(-1/2)
    comp_std = rho ** (-0.25) / np.sqrt(2.0)

    clusters: list[ClusterDraw] = []
    for l in range(cfg.num_clusters):
        aoa_shifts = rng.uniform(-half_aoa, half_aoa, size=cfg.rays_aoa)
        aod_shifts = rng.uniform(-half_aod, half_aod, size=cfg.rays_aod)
        alpha = comp_std * (
            rng.standard_normal(cfg.rays_aoa) + 1j * rng.standard_normal(cfg.rays_aoa)
        )
        beta = comp_std * (
            rng.standard_normal(cfg.rays_aod) + 1j * rng.standard_normal(cfg.rays_aod)
        )
        aoa_angles = cfg.mean_aoa[l] - aoa_shifts
        aod_angles = cfg.mean_aod[l] - aod_shifts
        draw = ClusterDraw(
            mean_aoa=cfg.mean_aoa[l],
            mean_aod=cfg.mean_aod[l],
            aoa_shifts=aoa_shifts,
            aod_shifts=aod_shifts,
            gains_aoa=alpha,
            gains_aod=beta,
            aoa_angles=aoa_angles,
            aod_angles=aod_angles,
        )
        if cfg.on_grid:
            draw.aoa_bins = grid_bs.nearest_bin(aoa_angles)
            draw.aod_bins = grid_ms.nearest_bin(aod_angles)
            draw.aoa_angles = grid_bs.points[draw.aoa_bins]
            draw.aod_angles = grid_ms.points[draw.aod_bins]
        clusters.append(draw)

    if cfg.on_grid:
        hv = np.zeros((grid_bs.size, grid_ms.size), dtype=complex)
        for c in clusters:
            avec = _bin_coefficients(c.aoa_bins, c.gains_aoa, grid_bs.size)
            bvec = _bin_coefficients(c.aod_bins, c.gains_aod, grid_ms.size)
            hv += np.outer(avec, bvec)
        a_bs = build_dictionary(bs, grid_bs)
        a_ms = build_dictionary(ms, grid_ms)
        h = a_bs @ hv @ a_ms.conj().T
    else:
        hv = None
        h = np.zeros((bs.num_antennas, ms.num_antennas), dtype=complex)
        for c in clusters:
            u = steering_matrix(bs, c.aoa_angles) @ c.gains_aoa
            v = steering_matrix(ms, c.aod_angles).conj() @ c.gains_aod
            h += np.outer(u, v)

    p = _measured_p(clusters, grid_bs, grid_ms)
    real = ChannelRealization(
        h=h,
        clusters=clusters,
        hv_truth=hv,
        p_measured=p,
        rank_truth=numerical_rank(h),
    )
    return real


def _measured_p(clusters: list[ClusterDraw], grid_bs: AngleGrid, grid_ms: AngleGrid) -> int:
    """Largest beamspace support size of any cluster's coefficient bundle.

    On-grid clusters carry their bins; off-grid rays are projected to the
    nearest bin, giving the support the theory bounds would see.
    """
    p = 0
    for c in clusters:
        aoa_bins = c.aoa_bins if c.aoa_bins is not None else grid_bs.nearest_bin(c.aoa_angles)
        aod_bins = c.aod_bins if c.aod_bins is not None else grid_ms.nearest_bin(c.aod_angles)
        avec = _bin_coefficients(aoa_bins, c.gains_aoa, grid_bs.size)
        bvec = _bin_coefficients(aod_bins, c.gains_aod, grid_ms.size)
        p = max(
            p,
            _support_count(avec, SPARSITY_REL_THRESHOLD),
            _support_count(bvec, SPARSITY_REL_THRESHOLD),
        )
    return p


def grid_channel_from_supports(
    bs: ArrayConfig,
    ms: ArrayConfig,
    grid_bs: AngleGrid,
    grid_ms: AngleGrid,
    supports: list[tuple[list[int], list[int]]],
    seed,
    gain_scale: float = 1.0,
) -> ChannelRealization:
    """Synthesize an on-grid channel with prescribed per-cluster bin supports.

    `supports` lists, per cluster, the occupied AoA bins and AoD bins. Gains
    are unit-scale circular complex Gaussians times `gain_scale`. Used by
    experiments that need exact control over (p, L).
    """
    rng = np.random.default_rng(seed)
    hv = np.zeros((grid_bs.size, grid_ms.size), dtype=complex)
    clusters: list[ClusterDraw] = []
    for aoa_bins, aod_bins in supports:
        aoa_bins = np.asarray(aoa_bins, dtype=int)
        aod_bins = np.asarray(aod_bins, dtype=int)
        alpha = gain_scale * (
            rng.standard_normal(len(aoa_bins)) + 1j * rng.standard_normal(len(aoa_bins))
        ) / np.sqrt(2.0)
        beta = gain_scale * (
            rng.standard_normal(len(aod_bins)) + 1j * rng.standard_normal(len(aod_bins))
        ) / np.sqrt(2.0)
        avec = _bin_coefficients(aoa_bins, alpha, grid_bs.size)
        bvec = _bin_coefficients(aod_bins, beta, grid_ms.size)
        hv += np.outer(avec, bvec)
        clusters.append(
            ClusterDraw(
                mean_aoa=float(grid_bs.points[aoa_bins[0]]),
                mean_aod=float(grid_ms.points[aod_bins[0]]),
                aoa_shifts=np.zeros(len(aoa_bins)),
                aod_shifts=np.zeros(len(aod_bins)),
                gains_aoa=alpha,
                gains_aod=beta,
                aoa_angles=grid_bs.points[aoa_bins],
                aod_angles=grid_ms.points[aod_bins],
                aoa_bins=aoa_bins,
                aod_bins=aod_bins,
            )
        )
    a_bs = build_dictionary(bs, grid_bs)
    a_ms = build_dictionary(ms, grid_ms)
    h = a_bs @ hv @ a_ms.conj().T
    return ChannelRealization(
        h=h,
        clusters=clusters,
        hv_truth=hv,
        p_measured=_measured_p(clusters, grid_bs, grid_ms),
        rank_truth=numerical_rank(h),
    )


def measure_sparsity(
    real: ChannelRealization, rel_threshold: float = SPARSITY_REL_THRESHOLD
) -> SparsityReport:
    """Support statistics of the beamspace truth.

    p is the largest per-cluster support size across both angle domains;
    row/column/entry counts come from the assembled beamspace matrix. Only
    available for on-grid realizations, which carry an exact beamspace truth.
    """
    if real.hv_truth is None:
        raise ValueError("realization has no beamspace truth (off-grid draw)")
    hv = real.hv_truth
    mags = np.abs(hv)
    top = mags.max(initial=0.0)
    if top == 0.0:
        return SparsityReport(p=0, nnz_rows=0, nnz_cols=0, nnz_total=0)
    mask = mags > rel_threshold * top
    n1, n2 = hv.shape
    p = 0
    for c in real.clusters:
        avec = _bin_coefficients(c.aoa_bins, c.gains_aoa, n1)
        bvec = _bin_coefficients(c.aod_bins, c.gains_aod, n2)
        p = max(p, _support_count(avec, rel_threshold), _support_count(bvec, rel_threshold))
    return SparsityReport(
        p=p,
        nnz_rows=int(np.count_nonzero(mask.any(axis=1))),
        nnz_cols=int(np.count_nonzero(mask.any(axis=0))),
        nnz_total=int(np.count_nonzero(mask)),
    )
