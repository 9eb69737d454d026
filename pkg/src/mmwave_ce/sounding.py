"""Analog beamforming/combining codebooks and random entry sampling of the
beam-domain measurement matrix Y = Z^H H F."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arrays import ArrayConfig, steering_vector

SCHEME_RC = "rc"
SCHEME_MBC = "mbc"


@dataclass(frozen=True)
class Codebook:
    """Constant-modulus analog codebook: one unit-norm column per beam."""

    matrix: np.ndarray = field(repr=False)
    scheme: str = SCHEME_RC
    subarrays: int = 1

    @property
    def num_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_beams(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class ObservationSet:
    """Observed entries of an N_Z x N_F beam-domain matrix.

    `omega` holds T distinct (row, col) index pairs, `values` the (possibly
    noisy) observed entries, `sigma` the per-entry noise standard deviation.
    """

    omega: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    sigma: float = 0.0

    def __post_init__(self):
        if self.omega.ndim != 2 or self.omega.shape[1] != 2:
            raise ValueError("omega must be a (T, 2) index array")
        if len(self.values) != len(self.omega):
            raise ValueError("values length must match omega")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    def __len__(self) -> int:
        return len(self.omega)


def gen_rc_codebook(n_ant: int, n_beams: int, seed) -> Codebook:
    """Random coding: every entry on the circle of radius 1/sqrt(N), phases iid uniform."""
    if n_beams < 1:
        raise ValueError("n_beams must be >= 1")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n_ant, n_beams))
    m = np.exp(1j * phases) / np.sqrt(n_ant)
    # columns are unit norm by construction; renormalize anyway to pin the invariant
    m /= np.linalg.norm(m, axis=0, keepdims=True)
    return Codebook(matrix=m, scheme=SCHEME_RC)


def gen_mbc_codebook(n_ant: int, n_beams: int, num_subarrays: int, seed) -> Codebook:
    """Multiple-beam coding: each column splits the array into subarrays, each
    steered toward its own random direction (uniform in the sine domain)."""
    if n_beams < 1:
        raise ValueError("n_beams must be >= 1")
    if num_subarrays < 1 or n_ant % num_subarrays != 0:
        raise ValueError(f"num_subarrays {num_subarrays} must divide n_ant {n_ant}")
    seg_len = n_ant // num_subarrays
    seg_cfg = ArrayConfig(num_antennas=seg_len)
    rng = np.random.default_rng(seed)
    cols = np.empty((n_ant, n_beams), dtype=complex)
    for b in range(n_beams):
        segments = []
        for _ in range(num_subarrays):
            angle = np.arcsin(rng.uniform(-1.0, 1.0))
            segments.append(steering_vector(seg_cfg, angle))
        col = np.concatenate(segments)
        cols[:, b] = col / np.linalg.norm(col)
    return Codebook(matrix=cols, scheme=SCHEME_MBC, subarrays=num_subarrays)


def size_codebooks(t: int, sampling_ratio: float) -> tuple[int, int]:
    """Smallest square codebook sizes keeping T observed entries at the given
    fraction of the beam-domain matrix."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if not (0.0 < sampling_ratio <= 1.0):
        raise ValueError("sampling_ratio must be in (0, 1]")
    target = t / sampling_ratio
    n = int(math.floor(math.sqrt(target)))
    while n * n < target - 1e-9:
        n += 1
    n = max(n, 1)
    return n, n


def sample_support(n_z: int, n_f: int, t: int, seed) -> np.ndarray:
    """T distinct (row, col) pairs drawn uniformly without replacement."""
    if t > n_z * n_f:
        raise ValueError(f"t={t} exceeds matrix size {n_z}x{n_f}")
    rng = np.random.default_rng(seed)
    flat = rng.choice(n_z * n_f, size=t, replace=False)
    return np.stack(np.unravel_index(flat, (n_z, n_f)), axis=1)


def observe(
    h: np.ndarray,
    z_book: Codebook,
    f_book: Codebook,
    omega: np.ndarray,
    sigma: float,
    seed=None,
) -> ObservationSet:
    """Sample entries of Y = Z^H H F on `omega`, adding circular complex
    Gaussian noise of variance sigma^2 per observed entry."""
    if z_book.num_antennas != h.shape[0] or f_book.num_antennas != h.shape[1]:
        raise ValueError("codebook antenna counts do not match the channel")
    omega = np.asarray(omega)
    if omega.size and (
        omega[:, 0].max() >= z_book.num_beams or omega[:, 1].max() >= f_book.num_beams
    ):
        raise ValueError("omega indexes outside the beam-domain matrix")
    if len(np.unique(omega[:, 0] * f_book.num_beams + omega[:, 1])) != len(omega):
        raise ValueError("omega contains repeated beam pairs")
    y = z_book.matrix.conj().T @ h @ f_book.matrix
    values = y[omega[:, 0], omega[:, 1]]
    if sigma > 0:
        rng = np.random.default_rng(seed)
        noise = (
            rng.standard_normal(len(values)) + 1j * rng.standard_normal(len(values))
        ) * (sigma / np.sqrt(2.0))
        values = values + noise
    return ObservationSet(omega=omega, values=values, sigma=float(sigma))


def sigma_from_snr(h: np.ndarray, snr_db: float) -> float:
    """Noise std matching SNR = 10*log10(||H||_F^2 / (N_BS*N_MS*sigma^2))."""
    energy = float(np.linalg.norm(h) ** 2)
    if energy == 0.0:
        raise ValueError("cannot set an SNR for a zero channel")
    n_bs, n_ms = h.shape
    return math.sqrt(energy / (n_bs * n_ms * 10.0 ** (snr_db / 10.0)))
