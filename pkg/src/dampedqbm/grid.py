"""Spatial grid, density-matrix container and grid quadratures.

All integrals use the trapezoid rule. The density matrix is stored as a
complex ``(n, n)`` array with entry ``[i, j] = rho(x_i, y_j)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

IMAG_TOL = 1e-10


class CorruptedStateError(ValueError):
    """Raised when a field violates a structural invariant (e.g. complex trace)."""


@dataclass(frozen=True)
class SpatialGrid:
    half_width: float
    n_points: int
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.n_points % 2 == 0:
            raise ValueError(f"even point count ({self.n_points}): x = 0 must be a grid node")
        if self.n_points < 5:
            raise ValueError(f"n_points must be >= 5, got {self.n_points}")
        # (k - c) h rather than -L + k h: exact antisymmetry and an exact zero node
        pts = (np.arange(self.n_points) - self.center) * self.spacing
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def center(self) -> int:
        return self.n_points // 2

    def weights(self) -> np.ndarray:
        """1D trapezoid weights over [-L, L]."""
        w = np.full(self.n_points, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w

    def half_weights(self, side: str) -> np.ndarray:
        """Trapezoid weights over [-L, 0] ("left") or [0, L] ("right")."""
        w = self.weights()
        c = self.center
        if side == "left":
            w[c + 1:] = 0.0
        elif side == "right":
            w[:c] = 0.0
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        w[c] *= 0.5
        return w


MIN_POINTS = 33


def make_grid(half_width: float, n_points: int, *, min_points: int = MIN_POINTS) -> SpatialGrid:
    """Build a symmetric grid on [-half_width, half_width] with an odd point count."""
    if n_points % 2 == 0:
        raise ValueError(f"even point count ({n_points}): x = 0 must be a grid node")
    if n_points < min_points:
        raise ValueError(f"n_points must be >= {min_points}, got {n_points}")
    return SpatialGrid(float(half_width), int(n_points))


@dataclass
class DensityField:
    """Reduced density matrix sampled on ``grid`` (units 1/Angstrom)."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        n = self.grid.n_points
        if self.values.shape != (n, n):
            raise ValueError(f"field shape {self.values.shape} does not match grid ({n}, {n})")

    def copy(self) -> "DensityField":
        return DensityField(self.grid, self.values.copy())

    def reflected(self) -> "DensityField":
        """Field under (x, y) -> (-x, -y)."""
        return DensityField(self.grid, self.values[::-1, ::-1].copy())

    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.values)


def _real_checked(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL:
        raise CorruptedStateError(f"{what} has imaginary part {z.imag:.3e}")
    return float(z.real)


def weighted_sum(weights: np.ndarray, values: np.ndarray) -> complex:
    """Correctly rounded sum of weights * values (independent of summation order)."""
    prod = (weights * values).ravel()
    if np.iscomplexobj(prod):
        return complex(math.fsum(prod.real), math.fsum(prod.imag))
    return math.fsum(prod)


def pairwise_sum(weights: np.ndarray, values: np.ndarray) -> float:
    """Fast sum of weights * values (numpy pairwise summation, real values)."""
    return float(np.sum(weights * values))


def trace(field: DensityField) -> float:
    w = field.grid.weights()
    return _real_checked(weighted_sum(w, field.diagonal()), "trace")


def hermiticity_defect(field: DensityField) -> float:
    v = field.values
    return float(np.max(np.abs(v - v.conj().T))) if v.size else 0.0


def relative_hermiticity_defect(field: DensityField) -> float:
    scale = float(np.max(np.abs(field.values)))
    return hermiticity_defect(field) / scale if scale > 0 else 0.0


class Quadrant(enum.Enum):
    """Regions of the (x, y) plane; x indexes rows, y columns."""

    OFF_RIGHT_LEFT = "x>0,y<0"
    OFF_LEFT_RIGHT = "x<0,y>0"
    DIAG_LEFT = "x<0,y<0"
    DIAG_RIGHT = "x>0,y>0"


_SIDES = {
    Quadrant.OFF_RIGHT_LEFT: ("right", "left"),
    Quadrant.OFF_LEFT_RIGHT: ("left", "right"),
    Quadrant.DIAG_LEFT: ("left", "left"),
    Quadrant.DIAG_RIGHT: ("right", "right"),
}


def plane_weights(wx: np.ndarray, wy: np.ndarray) -> np.ndarray:
    return np.outer(wx, wy)


def abs_integral(field: DensityField, weights: np.ndarray | None = None) -> float:
    """Trapezoid integral of |rho| with 2D ``weights``.

    The full-plane default is summed exactly, so it is invariant under
    reflection to the last bit. Explicit weights use the faster pairwise sum.
    """
    if weights is None:
        w = field.grid.weights()
        return float(weighted_sum(plane_weights(w, w), np.abs(field.values)))
    return pairwise_sum(weights, np.abs(field.values))


def quadrant_weights(grid: SpatialGrid, region: Quadrant | str) -> np.ndarray:
    """2D weights of one quadrant.

    Nodes on x = 0 or y = 0 carry half weight. The origin lies on the diagonal,
    so its weight is split between the two diagonal quadrants only; the four
    quadrants still sum to the full-plane weights and a purely diagonal field
    has zero off-diagonal integral.
    """
    region = Quadrant(region)
    sx, sy = _SIDES[region]
    w = plane_weights(grid.half_weights(sx), grid.half_weights(sy))
    c = grid.center
    h = grid.spacing
    w[c, c] = 0.5 * h * h if sx == sy else 0.0
    return w


def quadrant_integral(field: DensityField, region: Quadrant | str) -> float:
    """Integral of |rho| over one quadrant (see :func:`quadrant_weights`)."""
    return abs_integral(field, quadrant_weights(field.grid, region))
