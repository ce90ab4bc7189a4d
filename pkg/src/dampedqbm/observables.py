"""Measured quantities: l1 coherence, relative coherence, well-transfer
probability, purity, plus the time-series container they are recorded in."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .grid import DensityField, Quadrant, _real_checked, abs_integral, plane_weights, quadrant_integral, weighted_sum

log = logging.getLogger(__name__)

COHERENCE_FLOOR = 1e-8


@dataclass
class ObservableSeries:
    label: str
    times: np.ndarray
    values: np.ndarray
    params_fingerprint: str = ""
    sweep_value: str = ""
    truncated: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1D arrays of equal length")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return self.times.size

    @property
    def column(self) -> str:
        return f"{self.label}@{self.sweep_value}" if self.sweep_value else self.label

    def at(self, t: float) -> float:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no sample at t = {t}")
        return float(self.values[i])


def fingerprint(params: dict) -> str:
    """Stable short hash of a parameter mapping."""
    blob = json.dumps(params, sort_keys=True, default=repr).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _axis_weights(grid, side: str, limit: float | None) -> np.ndarray:
    w = grid.half_weights(side)
    if limit is None or limit >= grid.half_width:
        return w
    if limit <= 0:
        raise ValueError("integration limit must be positive")
    x = grid.points
    k = int(np.floor(limit / grid.spacing + 1e-9))
    edge = grid.center + k if side == "right" else grid.center - k
    inside = np.abs(x) <= k * grid.spacing * (1 + 1e-12)
    w = np.where(inside, w, 0.0)
    if k > 0:
        w[edge] = 0.5 * grid.spacing
    return w


def l1_coherence(field: DensityField, L_int: float | None = None) -> float:
    """Integral of |rho(x, y)| over x in [0, L_int], y in [-L_int, 0].

    ``L_int`` defaults to the grid half-width. When it falls between nodes the
    trapezoid rule is applied up to the last node inside.
    """
    g = field.grid
    if L_int is not None and L_int > g.half_width * (1 + 1e-12):
        raise ValueError(f"L_int = {L_int} exceeds the grid half-width {g.half_width}")
    if L_int is None or L_int >= g.half_width:
        return quadrant_integral(field, Quadrant.OFF_RIGHT_LEFT)
    w = plane_weights(_axis_weights(g, "right", L_int), _axis_weights(g, "left", L_int))
    w[g.center, g.center] = 0.0
    return abs_integral(field, w)


def left_probability(field: DensityField) -> float:
    w = field.grid.half_weights("left")
    return _real_checked(weighted_sum(w, field.diagonal()), "left probability")


def right_probability(field: DensityField) -> float:
    w = field.grid.half_weights("right")
    return _real_checked(weighted_sum(w, field.diagonal()), "right probability")


def purity(field: DensityField) -> float:
    """tr(rho^2) = double integral of |rho|^2 with trapezoid weights."""
    w = field.grid.weights()
    return float(w @ (np.abs(field.values) ** 2) @ w)


def boundary_flux(field: DensityField) -> float:
    """Largest |rho| on the outermost interior ring of the grid."""
    v = np.abs(field.values)
    if v.shape[0] < 3:
        return float(v.max(initial=0.0))
    return float(max(v[1, :].max(), v[-2, :].max(), v[:, 1].max(), v[:, -2].max()))


def min_eigenvalue(field: DensityField, max_points: int = 129) -> float:
    """Most negative eigenvalue of the sampled operator (rho * h), on a
    subsampled grid of at most ``max_points`` nodes."""
    n = field.grid.n_points
    stride = max(1, int(np.ceil((n - 1) / (max_points - 1))))
    sub = field.values[::stride, ::stride]
    h = field.grid.spacing * stride
    herm = 0.5 * (sub + sub.conj().T)
    return float(np.linalg.eigvalsh(herm * h).min())


def relative_coherence(damped: ObservableSeries, undamped: ObservableSeries, floor: float = COHERENCE_FLOOR) -> ObservableSeries:
    """Pointwise C_damped / C_undamped.

    The output is cut at the first time the undamped coherence drops below
    ``floor``; ``truncated`` is set when that happens.
    """
    if damped.times.shape != undamped.times.shape or not np.array_equal(damped.times, undamped.times):
        raise ValueError("relative_coherence needs identical time stamps")
    below = np.nonzero(undamped.values < floor)[0]
    end = int(below[0]) if below.size else len(undamped)
    if below.size:
        log.warning("undamped coherence below %.1e at t = %.3g fs; C_R truncated", floor, undamped.times[end])
    return ObservableSeries(
        label="C_R",
        times=damped.times[:end],
        values=damped.values[:end] / undamped.values[:end],
        params_fingerprint=damped.params_fingerprint,
        sweep_value=damped.sweep_value,
        truncated=bool(below.size),
    )
