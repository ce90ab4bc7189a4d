"""Master-equation right-hand side and the explicit time stepper.

The equation integrated for rho(x, y, t) is

    d rho/dt = (i hbar / 2M)(d_xx - d_yy) rho
               - (i / hbar)(V_F(x) - V_F(y)) rho
               - gamma (x - y)(d_x - d_y) rho
               - (2 M gamma kT / hbar^2)(x - y)^2 rho

discretized with 3-point second differences, 2-point central first
differences and rho = 0 on the boundary ring. The kernel is written in
explicit real arithmetic so that the RHS of a Hermitian input is Hermitian to
the last bit; RK4 combinations with real coefficients keep it that way.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numba
import numpy as np

from .grid import DensityField, SpatialGrid
from .potentials import DampingParams, PotentialSpec, profile
from .units import HBAR, PROTON_MASS

log = logging.getLogger(__name__)

TRACE_DRIFT_LIMIT = 1e-4
# RK4 stability interval on the imaginary axis is |z| <= 2 sqrt(2)
RK4_IMAG_BOUND = 2.0 * math.sqrt(2.0)
DEFAULT_SAFETY = 0.8
PROBE_STEPS = 100
PROBE_GROWTH_LIMIT = 1.05


class NumericalError(RuntimeError):
    """Evolution aborted: non-finite values or a stability violation."""

    def __init__(self, message: str, *, step: int | None = None, location=None, term: str | None = None):
        super().__init__(message)
        self.step = step
        self.location = location
        self.term = term


@dataclass(frozen=True, kw_only=True)
class EvolutionParams:
    kT: float
    gamma: float = 0.0
    mu: float = 0.0
    hbar: float = HBAR
    mass: float = PROTON_MASS

    def __post_init__(self):
        for name in ("kT", "hbar", "mass"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.gamma < 0:
            raise ValueError("γ must be ≥ 0")
        if self.mu < 0:
            raise ValueError("μ must be ≥ 0")

    @property
    def damping(self) -> DampingParams:
        return DampingParams(self.gamma, self.mu)

    @property
    def decoherence_coefficient(self) -> float:
        """2 M gamma kT / hbar^2, in 1/(A^2 fs)."""
        return 2.0 * self.mass * self.gamma * self.kT / self.hbar**2


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    record_every: int = 1

    def __post_init__(self):
        if self.dt < 0 or self.t_end < 0:
            raise ValueError("dt and t_end must be non-negative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.dt == 0 and self.t_end > 0:
            raise ValueError("dt = 0 with t_end > 0")

    @property
    def n_steps(self) -> int:
        if self.t_end == 0:
            return 0
        n = self.t_end / self.dt
        steps = int(round(n))
        if abs(n - steps) > 1e-9 * max(1.0, n):
            raise ValueError(f"t_end = {self.t_end} is not an integer multiple of dt = {self.dt}")
        return steps


@numba.njit(cache=True, nogil=True, fastmath=False)
def _rhs_kernel(r, out, x, v, hbar, kin, inv2h, gamma, dcoef):
    n = r.shape[0]
    for j in range(n):
        out[0, j] = 0.0
        out[n - 1, j] = 0.0
    for i in range(1, n - 1):
        out[i, 0] = 0.0
        out[i, n - 1] = 0.0
        xi = x[i]
        vi = v[i]
        for j in range(1, n - 1):
            north = r[i + 1, j]
            south = r[i - 1, j]
            east = r[i, j + 1]
            west = r[i, j - 1]
            c = r[i, j]
            s = (north + south) - (east + west)
            d = (north - south) - (east - west)
            sep = xi - x[j]
            phase = (vi - v[j]) / hbar
            b = -gamma * sep * inv2h
            q = dcoef * (sep * sep)
            re = -kin * s.imag + b * d.real + phase * c.imag - q * c.real
            im = kin * s.real + b * d.imag - phase * c.real - q * c.imag
            out[i, j] = complex(re, im)
    return out


@numba.njit(cache=True, nogil=True)
def _stage(out, y, a, k):
    """out = y + a k, in place of four numpy passes."""
    n, m = y.shape
    for i in range(n):
        for j in range(m):
            out[i, j] = complex(y[i, j].real + a * k[i, j].real, y[i, j].imag + a * k[i, j].imag)
    return out


@numba.njit(cache=True, nogil=True)
def _combine(out, y, dt6, k1, k2, k3, k4):
    """out = y + dt/6 (k1 + 2 k2 + 2 k3 + k4)."""
    n, m = y.shape
    for i in range(n):
        for j in range(m):
            re = (k1[i, j].real + k4[i, j].real) + 2.0 * (k2[i, j].real + k3[i, j].real)
            im = (k1[i, j].imag + k4[i, j].imag) + 2.0 * (k2[i, j].imag + k3[i, j].imag)
            out[i, j] = complex(y[i, j].real + dt6 * re, y[i, j].imag + dt6 * im)
    return out


TERMS = ("kinetic", "potential", "dissipation", "decoherence")


class MasterEquation:
    """Discretized master-equation operator for one grid / parameter set.

    The potential profile is sampled once at construction.
    """

    def __init__(self, grid: SpatialGrid, params: EvolutionParams, potential: PotentialSpec):
        if potential.mass != params.mass:
            raise ValueError("potential mass and evolution mass differ")
        self.grid = grid
        self.params = params
        self.potential = potential
        self.x = np.ascontiguousarray(grid.points, dtype=np.float64)
        self.v = np.ascontiguousarray(profile(grid, potential, params.damping), dtype=np.float64)
        h = grid.spacing
        self._kin = params.hbar / (2.0 * params.mass * h * h)
        self._inv2h = 1.0 / (2.0 * h)
        self._dcoef = params.decoherence_coefficient
        n = grid.n_points
        self._buf = [np.zeros((n, n), dtype=np.complex128) for _ in range(5)]

    def rhs(self, values: np.ndarray, out: Optional[np.ndarray] = None) -> np.ndarray:
        if out is None:
            out = np.empty_like(values)
        p = self.params
        return _rhs_kernel(values, out, self.x, self.v, p.hbar, self._kin, self._inv2h, p.gamma, self._dcoef)

    def terms(self, values: np.ndarray) -> dict[str, np.ndarray]:
        """The four RHS contributions separately (slow; diagnostics only)."""
        p = self.params
        h = self.grid.spacing
        r = values
        c = r[1:-1, 1:-1]
        north, south = r[2:, 1:-1], r[:-2, 1:-1]
        east, west = r[1:-1, 2:], r[1:-1, :-2]
        xi = self.x[1:-1, None]
        yj = self.x[None, 1:-1]
        vi = self.v[1:-1, None]
        vj = self.v[None, 1:-1]
        inner = {
            "kinetic": 1j * p.hbar / (2 * p.mass * h * h) * ((north + south) - (east + west)),
            "potential": -1j / p.hbar * (vi - vj) * c,
            "dissipation": -p.gamma * (xi - yj) / (2 * h) * ((north - south) - (east - west)),
            "decoherence": -self._dcoef * (xi - yj) ** 2 * c,
        }
        out = {}
        for name, val in inner.items():
            full = np.zeros_like(r)
            full[1:-1, 1:-1] = val
            out[name] = full
        return out

    def spectral_bound(self) -> float:
        """Upper bound on the magnitude of the discrete operator's eigenvalues (1/fs)."""
        p = self.params
        h = self.grid.spacing
        L = self.grid.half_width
        kinetic = 2.0 * p.hbar / (p.mass * h * h)
        potential = float(self.v.max() - self.v.min()) / p.hbar
        dissipation = p.gamma * 2.0 * L * 2.0 / h
        decoherence = self._dcoef * (2.0 * L) ** 2
        return kinetic + potential + dissipation + decoherence

    def stable_dt(self, safety: float = DEFAULT_SAFETY) -> float:
        return safety * RK4_IMAG_BOUND / self.spectral_bound()

    def step(self, values: np.ndarray, dt: float, out: Optional[np.ndarray] = None) -> np.ndarray:
        """One classical RK4 step. ``values`` is not modified."""
        k1, k2, k3, k4, tmp = self._buf
        self.rhs(values, k1)
        self.rhs(_stage(tmp, values, 0.5 * dt, k1), k2)
        self.rhs(_stage(tmp, values, 0.5 * dt, k2), k3)
        self.rhs(_stage(tmp, values, dt, k3), k4)
        if out is None:
            out = np.empty_like(values)
        return _combine(out, values, dt / 6.0, k1, k2, k3, k4)

    def diagnose(self, values: np.ndarray, step: int) -> NumericalError:
        """Build a diagnostic for a state whose update went non-finite."""
        with np.errstate(all="ignore"):
            terms = self.terms(values)
        for name in TERMS:
            bad = ~np.isfinite(terms[name])
            if bad.any():
                i, j = np.argwhere(bad)[0]
                loc = (float(self.x[i]), float(self.x[j]))
                return NumericalError(
                    f"non-finite {name} term at step {step}, (x, y) = {loc}", step=step, location=loc, term=name
                )
        mags = {name: float(np.max(np.abs(t))) for name, t in terms.items()}
        worst = max(mags, key=mags.get)
        i, j = np.unravel_index(np.argmax(np.abs(terms[worst])), values.shape)
        loc = (float(self.x[i]), float(self.x[j]))
        return NumericalError(
            f"non-finite state at step {step}; largest term {worst} ({mags[worst]:.3e}) at (x, y) = {loc}; "
            "reduce dt",
            step=step,
            location=loc,
            term=worst,
        )


def _diag_trace(values: np.ndarray, w: np.ndarray) -> float:
    return float(np.dot(w, np.diagonal(values)).real)


@dataclass
class ProbeResult:
    dt: float
    growth: float
    stable: bool
    c_stab: float = field(default=0.0)


def probe_stability(op: MasterEquation, dt: float, steps: int = PROBE_STEPS, seed: int = 0) -> ProbeResult:
    """Step Hermitian white noise ``steps`` times and measure Frobenius-norm growth.

    Every physical term is norm-preserving or contracting apart from the weak
    dissipative expansion, so growth beyond ``PROBE_GROWTH_LIMIT`` means dt sits
    outside the RK4 stability region for the grid's stiffest modes.
    """
    n = op.grid.n_points
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = a + a.conj().T
    a[0, :] = a[-1, :] = a[:, 0] = a[:, -1] = 0.0
    norm0 = np.linalg.norm(a)
    cur = a
    nxt = np.empty_like(a)
    for _ in range(steps):
        op.step(cur, dt, out=nxt)
        cur, nxt = nxt, cur
    growth = float(np.linalg.norm(cur) / norm0)
    p = op.params
    c_stab = dt * p.hbar / (p.mass * op.grid.spacing**2)
    return ProbeResult(dt, growth, bool(np.isfinite(growth) and growth < PROBE_GROWTH_LIMIT), c_stab)


def calibrate_dt(op: MasterEquation, record_interval: float, dt_max: float | None = None, attempts: int = 6):
    """Pick the largest dt that divides ``record_interval``, respects the spectral
    bound and passes the noise probe; halve the candidate on probe failure."""
    target = op.stable_dt() if dt_max is None else min(dt_max, op.stable_dt())
    for _ in range(attempts):
        n_sub = max(1, math.ceil(record_interval / target - 1e-12))
        dt = record_interval / n_sub
        probe = probe_stability(op, dt)
        if probe.stable:
            return dt, n_sub, probe
        log.warning("stability probe failed at dt=%.4g fs (growth %.3g); halving", dt, probe.growth)
        target = dt / 2.0
    raise NumericalError(f"could not find a stable dt below {target:.3g} fs; reduce dt")


Observer = Callable[[float, DensityField], None]


def step(field: DensityField, dt: float, params: EvolutionParams, potential: PotentialSpec) -> DensityField:
    """One RK4 step of ``field``; raises NumericalError on blow-up or trace drift."""
    if dt == 0:
        return field.copy()
    op = MasterEquation(field.grid, params, potential)
    out = op.step(field.values, dt)
    _check_step(op, field.values, out, 1, field.grid.weights())
    return DensityField(field.grid, out)


def _check_step(op: MasterEquation, before: np.ndarray, after: np.ndarray, n: int, w: np.ndarray) -> float:
    tr = np.dot(w, np.diagonal(after))
    if not np.isfinite(tr) or not np.isfinite(after).all():
        raise op.diagnose(before, n)
    drift = abs(tr.real - _diag_trace(before, w))
    if drift > TRACE_DRIFT_LIMIT:
        raise NumericalError(
            f"trace drift {drift:.3e} in one step at step {n} exceeds {TRACE_DRIFT_LIMIT:g}; reduce dt", step=n
        )
    return float(tr.real)


def evolve(
    initial: DensityField,
    cfg: StepperConfig,
    params: EvolutionParams,
    potential: PotentialSpec,
    observer: Optional[Observer] = None,
    *,
    operator: Optional[MasterEquation] = None,
) -> DensityField:
    """Integrate from t = 0 to ``cfg.t_end``.

    ``observer(t, field)`` is called at t = 0 and every ``cfg.record_every``
    steps with a snapshot copy. Exceptions from the observer propagate and
    stop the run.
    """
    grid = initial.grid
    op = operator or MasterEquation(grid, params, potential)
    n_steps = cfg.n_steps
    w = grid.weights()
    cur = initial.values.copy()
    nxt = np.empty_like(cur)
    if observer is not None:
        observer(0.0, DensityField(grid, cur.copy()))
    for n in range(1, n_steps + 1):
        op.step(cur, cfg.dt, out=nxt)
        _check_step(op, cur, nxt, n, w)
        cur, nxt = nxt, cur
        if observer is not None and n % cfg.record_every == 0:
            observer(n * cfg.dt, DensityField(grid, cur.copy()))
    return DensityField(grid, cur)
