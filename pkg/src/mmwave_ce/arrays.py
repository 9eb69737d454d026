"""Uniform linear array geometry: steering vectors, sine-domain angle grids,
and beamspace dictionary matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayConfig:
    """A uniform linear array described by its element count and d/lambda spacing."""

    num_antennas: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError(f"num_antennas must be >= 1, got {self.num_antennas}")
        if self.spacing_over_wavelength <= 0:
            raise ValueError("spacing_over_wavelength must be > 0")


@dataclass(frozen=True)
class AngleGrid:
    """Angle grid for a beamspace dictionary, uniform in the sine domain.

    `points` are radians in [-pi/2, pi/2), strictly increasing, with
    sin(points) uniformly spaced over [-1, 1).
    """

    size: int
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("grid size must be >= 1")
        if len(self.points) != self.size:
            raise ValueError("points length does not match size")
        if self.size > 1 and not np.all(np.diff(self.points) > 0):
            raise ValueError("grid points must be strictly increasing")

    @classmethod
    def sine_uniform(cls, size: int) -> "AngleGrid":
        sines = -1.0 + 2.0 * np.arange(size) / size
        return cls(size=size, points=np.arcsin(sines))

    def nearest_bin(self, angle) -> np.ndarray:
        """Index of the grid point closest in the sine domain (the grid's natural metric)."""
        idx = np.rint((np.sin(angle) + 1.0) * self.size / 2.0).astype(int)
        return np.clip(idx, 0, self.size - 1)


def steering_vector(cfg: ArrayConfig, angle: float) -> np.ndarray:
    """Unit-norm ULA response for a plane wave arriving from `angle` (radians).

    Entry n is exp(j*2*pi*(d/lambda)*n*sin(angle)) / sqrt(N).
    """
    n = np.arange(cfg.num_antennas)
    phase = 2.0 * np.pi * cfg.spacing_over_wavelength * np.sin(angle)
    return np.exp(1j * phase * n) / np.sqrt(cfg.num_antennas)


def steering_matrix(cfg: ArrayConfig, angles: np.ndarray) -> np.ndarray:
    """Stack of steering vectors, one column per angle."""
    n = np.arange(cfg.num_antennas)[:, None]
    phases = 2.0 * np.pi * cfg.spacing_over_wavelength * np.sin(np.atleast_1d(angles))[None, :]
    return np.exp(1j * n * phases) / np.sqrt(cfg.num_antennas)


def build_dictionary(cfg: ArrayConfig, grid: AngleGrid) -> np.ndarray:
    """Beamspace dictionary: num_antennas x grid.size, column i = steering_vector(grid.points[i]).

    At critical sampling (grid.size == num_antennas, d/lambda = 1/2) the
    dictionary is unitary, which keeps the beamspace transform lossless;
    beamspace pipelines use grids at least as large as the array.
    """
    return steering_matrix(cfg, grid.points)
