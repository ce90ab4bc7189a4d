"""Reduced-resolution invariant checks behind ``dampedqbm validate``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import EvolutionParams, MasterEquation, StepperConfig, evolve
from .grid import make_grid, relative_hermiticity_defect, trace
from .potentials import DampingParams, Free, PotentialSpec, QuarticDoubleWell, dv_full_dx, well_minima
from .states import GaussianSpec, default_width, double_gaussian, gaussian_pure
from .units import HBAR, PROTON_MASS, ROOM_KT


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _bisect(f, lo, hi, tol=1e-13):
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def check_well_minima() -> Check:
    worst = 0.0
    for omega, gamma, mu in [(0.025, 2.5e-4, 1.0), (0.005, 2.5e-4, 1.0), (0.01, 1e-4, 0.3)]:
        spec = PotentialSpec(QuarticDoubleWell(omega, 2.5))
        d = DampingParams(gamma, mu)
        xm = well_minima(spec, d)[1]
        root = _bisect(lambda x: float(dv_full_dx(x, spec, d)), 2.5 * (1 + 1e-9), 40.0)
        worst = max(worst, abs(root - xm))
    return Check("well minima vs bisection", worst < 1e-8, f"max |dx| = {worst:.2e} A")


def check_rhs(n_points: int) -> Check:
    grid = make_grid(8.0, n_points)
    p = EvolutionParams(kT=ROOM_KT, gamma=2.5e-4, mu=1.0)
    op = MasterEquation(grid, p, PotentialSpec(QuarticDoubleWell(0.025, 2.5)))
    rho = double_gaussian(2.5, 0.5, grid).values
    fast = op.rhs(rho)
    slow = sum(op.terms(rho).values())
    err = np.max(np.abs(fast - slow)) / np.max(np.abs(slow))
    herm = np.max(np.abs(fast - fast.conj().T))
    dtr = abs(np.dot(grid.weights(), np.diagonal(fast)))
    ok = err < 1e-12 and herm == 0.0 and dtr < 1e-10
    return Check("RHS kernel vs term sum", ok, f"rel err {err:.1e}, herm {herm:.1e}, d(trace)/dt {dtr:.1e}")


def check_conservation(n_points: int, t_end: float = 5.0) -> Check:
    grid = make_grid(8.0, n_points)
    p = EvolutionParams(kT=ROOM_KT, gamma=2.5e-4, mu=1.0)
    pot = PotentialSpec(QuarticDoubleWell(0.025, 2.5))
    op = MasterEquation(grid, p, pot)
    n_sub = math.ceil(0.5 / op.stable_dt())
    worst_tr = worst_h = 0.0

    def obs(t, f):
        nonlocal worst_tr, worst_h
        worst_tr = max(worst_tr, abs(trace(f) - 1))
        worst_h = max(worst_h, relative_hermiticity_defect(f))

    evolve(double_gaussian(2.5, 0.5, grid), StepperConfig(0.5 / n_sub, t_end, n_sub), p, pot, obs, operator=op)
    return Check("trace / Hermiticity", worst_tr < 1e-6 and worst_h < 1e-10, f"|tr-1| {worst_tr:.1e}, herm {worst_h:.1e}")


def check_free_spreading(n_points: int, t: float = 20.0) -> Check:
    grid = make_grid(8.0, n_points)
    sigma = 0.5
    p = EvolutionParams(kT=ROOM_KT)
    pot = PotentialSpec(Free())
    op = MasterEquation(grid, p, pot)
    n_sub = math.ceil(0.5 / op.stable_dt())
    final = evolve(gaussian_pure(GaussianSpec(0.0, sigma), grid), StepperConfig(0.5 / n_sub, t, n_sub), p, pot, operator=op)
    x = grid.points
    dens = final.diagonal().real * grid.weights()
    var = float(np.sum(dens * x**2) / np.sum(dens))
    expect = sigma**2 + (HBAR * t / (2 * PROTON_MASS * sigma)) ** 2
    rel = abs(var - expect) / expect
    return Check("free Gaussian spreading", rel < 0.01, f"rel err {rel:.2e}")


def run_checks(n_points: int = 129) -> list[Check]:
    return [
        check_well_minima(),
        check_rhs(n_points),
        check_conservation(n_points),
        check_free_spreading(n_points),
    ]
