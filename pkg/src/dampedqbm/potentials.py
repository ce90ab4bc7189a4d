"""Renormalized, damping-induced and full potentials (energies in eV).

The full potential felt by the system is the renormalized potential plus the
inverted harmonic term ``-M gamma mu x^2 / 2`` produced by the damped bath.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .units import PROTON_MASS

# Parameter set used to define the reference slope of the linear control potential.
REF_OMEGA_R = 0.025  # 1/fs
REF_X0 = 2.5  # Angstrom
REF_GAMMA = 2.5e-4  # 1/fs
REF_MU = 1.0  # 1/fs
REFERENCE_POSITION = 2.5  # Angstrom


@dataclass(frozen=True)
class QuarticDoubleWell:
    omega_R: float
    x0: float

    def __post_init__(self):
        if self.omega_R <= 0 or self.x0 <= 0:
            raise ValueError("quartic double well needs omega_R > 0 and x0 > 0")


@dataclass(frozen=True)
class Linear:
    slope_factor: float
    reference_gradient: float


@dataclass(frozen=True)
class Free:
    pass


Variant = Union[QuarticDoubleWell, Linear, Free]


@dataclass(frozen=True)
class PotentialSpec:
    variant: Variant
    mass: float = PROTON_MASS


@dataclass(frozen=True)
class DampingParams:
    gamma: float
    mu: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("γ must be ≥ 0")
        if self.mu < 0:
            raise ValueError("μ must be ≥ 0")


def v_renormalized(x, spec: PotentialSpec):
    """Quartic double well (M w^2 / 2 x0^2)(x - x0)^2 (x + x0)^2."""
    var = spec.variant
    if not isinstance(var, QuarticDoubleWell):
        raise TypeError(f"v_renormalized needs a quartic double well, got {type(var).__name__}")
    x = np.asarray(x, dtype=float)
    pref = spec.mass * var.omega_R**2 / (2.0 * var.x0**2)
    return pref * (x * x - var.x0 * var.x0) ** 2


def v_damping(x, mass: float, d: DampingParams):
    return -0.5 * mass * d.gamma * d.mu * np.asarray(x, dtype=float) ** 2


def v_full(x, spec: PotentialSpec, d: DampingParams):
    var = spec.variant
    x = np.asarray(x, dtype=float)
    if isinstance(var, QuarticDoubleWell):
        return v_renormalized(x, spec) + v_damping(x, spec.mass, d)
    if isinstance(var, Linear):
        return var.slope_factor * var.reference_gradient * x
    if isinstance(var, Free):
        return v_damping(x, spec.mass, d)
    raise TypeError(f"unknown potential variant {var!r}")


def dv_full_dx(x, spec: PotentialSpec, d: DampingParams):
    """Analytic derivative of :func:`v_full`."""
    var = spec.variant
    x = np.asarray(x, dtype=float)
    damping = -spec.mass * d.gamma * d.mu * x
    if isinstance(var, QuarticDoubleWell):
        pref = 2.0 * spec.mass * var.omega_R**2 / var.x0**2
        return pref * x * (x**2 - var.x0**2) + damping
    if isinstance(var, Linear):
        return np.full_like(x, var.slope_factor * var.reference_gradient)
    if isinstance(var, Free):
        return damping
    raise TypeError(f"unknown potential variant {var!r}")


def well_minima(spec: PotentialSpec, d: DampingParams) -> tuple[float, float]:
    """Minima of the full double-well potential, +-x0 sqrt(1 + gamma mu / 2 w_R^2)."""
    var = spec.variant
    if not isinstance(var, QuarticDoubleWell):
        raise TypeError("well_minima is only defined for the quartic double well")
    xm = var.x0 * math.sqrt(1.0 + d.gamma * d.mu / (2.0 * var.omega_R**2))
    return -xm, xm


def barrier_height(spec: PotentialSpec, d: DampingParams) -> float:
    """V_F(0) - V_F(x_min)."""
    _, xm = well_minima(spec, d)
    return float(v_full(0.0, spec, d) - v_full(xm, spec, d))


def reference_gradient(mass: float = PROTON_MASS) -> float:
    """|dV_F/dx| at x = 2.5 A for the reference double-well parameter set."""
    spec = PotentialSpec(QuarticDoubleWell(REF_OMEGA_R, REF_X0), mass)
    d = DampingParams(REF_GAMMA, REF_MU)
    return abs(float(dv_full_dx(REFERENCE_POSITION, spec, d)))


def linear_spec(slope_factor: float, mass: float = PROTON_MASS) -> PotentialSpec:
    return PotentialSpec(Linear(slope_factor, reference_gradient(mass)), mass)


def profile(grid, spec: PotentialSpec, d: DampingParams) -> np.ndarray:
    """V_F sampled on the grid nodes; computed once per run."""
    return np.asarray(v_full(grid.points, spec, d), dtype=float)
