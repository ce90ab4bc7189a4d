"""Initial density matrices: single Gaussian and symmetric double Gaussian."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import DensityField, SpatialGrid, trace
from .units import HBAR

MIN_POINTS_PER_SIGMA = 2.0


@dataclass(frozen=True)
class GaussianSpec:
    center: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"Gaussian width must be positive, got {self.width}")


def default_width(omega_R: float, mass: float, hbar: float = HBAR) -> float:
    """Ground-state width of the local harmonic well of the quartic potential.

    V_R''(+-x0) = 4 M w_R^2, so the local frequency is 2 w_R and the position
    standard deviation of the ground state is sqrt(hbar / (2 M * 2 w_R)).
    """
    return math.sqrt(hbar / (2.0 * mass * 2.0 * omega_R))


def gaussian_wavefunction(x, center: float, width: float) -> np.ndarray:
    """(2 pi s^2)^(-1/4) exp(-(x - c)^2 / 4 s^2); |phi|^2 has standard deviation s."""
    x = np.asarray(x, dtype=float)
    return (2.0 * math.pi * width**2) ** -0.25 * np.exp(-((x - center) ** 2) / (4.0 * width**2))


def _check_fits(center: float, width: float, grid: SpatialGrid) -> None:
    if abs(center) + 3.0 * width >= grid.half_width:
        raise ValueError(
            f"Gaussian at {center:g} A with width {width:g} A leaks past the grid "
            f"boundary +-{grid.half_width:g} A (3 sigma rule)"
        )
    if width / grid.spacing < MIN_POINTS_PER_SIGMA:
        raise ValueError(
            f"Gaussian width {width:g} A is under-resolved: {width / grid.spacing:.2f} "
            f"points per sigma (need >= {MIN_POINTS_PER_SIGMA:g})"
        )


def _pure(psi: np.ndarray, grid: SpatialGrid) -> DensityField:
    psi = psi.astype(np.complex128)
    psi[0] = psi[-1] = 0.0  # Dirichlet boundary
    return DensityField(grid, np.outer(psi, psi.conj()))


def gaussian_pure(g: GaussianSpec, grid: SpatialGrid) -> DensityField:
    _check_fits(g.center, g.width, grid)
    field = _pure(gaussian_wavefunction(grid.points, g.center, g.width), grid)
    field.values /= trace(field)
    return field


def double_gaussian_norm(center: float, width: float) -> float:
    """N for psi = N (phi_- + phi_+); includes the overlap exp(-c^2 / 2 s^2)."""
    overlap = math.exp(-(center**2) / (2.0 * width**2))
    return 1.0 / math.sqrt(2.0 * (1.0 + overlap))


def double_gaussian(center: float, width: float, grid: SpatialGrid) -> DensityField:
    """Pure state of two identical Gaussians at +-center."""
    if center <= 0:
        raise ValueError(f"double Gaussian needs center > 0, got {center}")
    _check_fits(center, width, grid)
    x = grid.points
    # phi(x; -c) is phi(-x; c) exactly, which keeps the state mirror symmetric on the grid
    phi_plus = gaussian_wavefunction(x, center, width)
    psi = double_gaussian_norm(center, width) * (phi_plus + phi_plus[::-1])
    return _pure(psi, grid)
