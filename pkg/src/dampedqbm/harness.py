"""Scenario catalog and the sweep runner that reproduces the decoherence,
well-transfer and rescaling studies."""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .evolution import (
    EvolutionParams,
    MasterEquation,
    NumericalError,
    StepperConfig,
    evolve,
    probe_stability,
)
from .grid import DensityField, SpatialGrid, make_grid, relative_hermiticity_defect, trace
from .io import ConfigError, format_value, validate_overrides, write_csv, write_manifest
from .observables import (
    ObservableSeries,
    boundary_flux,
    fingerprint,
    l1_coherence,
    left_probability,
    min_eigenvalue,
    purity,
    relative_coherence,
)
from .potentials import Free, PotentialSpec, QuarticDoubleWell, linear_spec, well_minima
from .states import GaussianSpec, default_width, double_gaussian, gaussian_pure
from .units import HBAR, C_LIGHT, mass_from_mev

log = logging.getLogger(__name__)

BOUNDARY_FLUX_LIMIT = 1e-8

COMMON = {
    "kT": 0.0259,
    "mass_mev": 938.0,
    "n_points": 257,
    "x0": 2.5,
    "sigma": None,
    "dt": None,
    "workers": 1,
}

# Sweep lists are artifact choices; the fixed parameters come from the study setups.
_DECOHERENCE = {"half_width": 8.0, "t_end": 50.0, "record_interval": 0.5, "omega_R": 0.025}
_TRANSFER = {"half_width": 14.0, "t_end": 1000.0, "record_interval": 5.0, "omega_R": 0.005, "n_points": 385}


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    kind: str  # "decoherence" | "transfer" | "rescaled"
    sweep_key: str
    sweep_symbol: str
    defaults: dict
    fixed_keys: tuple[str, ...]

    @property
    def allowed_keys(self) -> set[str]:
        return set(COMMON) | {"half_width", "t_end", "record_interval", "omega_R", self.sweep_key} | set(self.fixed_keys)


CATALOG: dict[str, Scenario] = {
    s.name: s
    for s in [
        Scenario(
            "decoherence-mu",
            "relative coherence C_R(t) vs the mu = 0 twin, sweeping mu at fixed gamma",
            "decoherence",
            "mu_list",
            "mu",
            {**_DECOHERENCE, "gamma": 2.5e-4, "mu_list": [0.1, 0.5, 1.0]},
            ("gamma",),
        ),
        Scenario(
            "decoherence-slope",
            "C_g(t): coherence on a linear ramp of slope g relative to g = 1, undamped bath",
            "decoherence",
            "g_list",
            "g",
            # The ramp pushes both peaks downhill, so the box is wider. The
            # momentum they pick up (F t / hbar ~ 10 / A at g = 2, 50 fs) needs a
            # finer grid than the bound-state scenarios.
            {**_DECOHERENCE, "half_width": 10.0, "n_points": 1281, "gamma": 2.5e-4, "g_list": [0.5, 1.0, 2.0]},
            ("gamma",),
        ),
        Scenario(
            "decoherence-gamma",
            "relative coherence C_R(t) at mu = 1 /fs, sweeping gamma (one mu = 0 twin per gamma)",
            "decoherence",
            "gamma_list",
            "gamma",
            # at gamma = 5e-4 C(50 fs) has decayed to ~5e-5 and needs the finer grid
            {**_DECOHERENCE, "n_points": 385, "mu": 1.0, "gamma_list": [1.25e-4, 2.5e-4, 5e-4]},
            ("mu",),
        ),
        Scenario(
            "transfer-mu",
            "left-well probability P(t) sweeping mu at fixed gamma, plus the gamma = 0 baseline",
            "transfer",
            "mu_list",
            "mu",
            {**_TRANSFER, "gamma": 2.5e-4, "mu_list": [0.0, 0.01, 0.1, 0.5]},
            ("gamma",),
        ),
        Scenario(
            "transfer-gamma-weak",
            "left-well probability P(t) at mu = 0.01 /fs, sweeping gamma",
            "transfer",
            "gamma_list",
            "gamma",
            {**_TRANSFER, "mu": 0.01, "gamma_list": [1.25e-4, 2.5e-4, 5e-4]},
            ("mu",),
        ),
        Scenario(
            "transfer-gamma-strong",
            "left-well probability P(t) at mu = 1 /fs, sweeping gamma",
            "transfer",
            "gamma_list",
            "gamma",
            {**_TRANSFER, "mu": 1.0, "gamma_list": [1.25e-4, 2.5e-4, 5e-4]},
            ("mu",),
        ),
        Scenario(
            "rescaled-free",
            "absolute coherence C(t), free particle plus V_D with gamma = gamma0/a, mu = mu0*a",
            "rescaled",
            "a_list",
            "a",
            {
                **_DECOHERENCE,
                "t_end": 30.0,
                "gamma0": 2.5e-4,
                "mu0": 1.0,
                "a_list": [0.5, 1.0, 2.0, 4.0],
            },
            ("gamma0", "mu0"),
        ),
    ]
}


@dataclass
class RunSpec:
    """One evolution inside a scenario."""

    label: str
    tag: str
    params: EvolutionParams
    potential: PotentialSpec
    initial: Callable[[SpatialGrid], DensityField]
    observable: str  # "C" or "P_left"


@dataclass
class ScenarioResult:
    series: list[ObservableSeries]
    manifest: dict
    csv_path: Path | None = None
    manifest_path: Path | None = None

    def get(self, column: str) -> ObservableSeries:
        for s in self.series:
            if s.column == column:
                return s
        raise KeyError(f"no series {column!r}; have {[s.column for s in self.series]}")


def resolve(name: str, overrides: dict | None = None) -> tuple[Scenario, dict]:
    """Merge scenario defaults with validated overrides."""
    if name not in CATALOG:
        raise ConfigError(f"unknown scenario {name!r}; known: {', '.join(CATALOG)}")
    sc = CATALOG[name]
    overrides = validate_overrides(overrides or {})
    unknown = set(overrides) - sc.allowed_keys
    if unknown:
        raise ConfigError(f"keys not used by {name}: {', '.join(sorted(unknown))}")
    return sc, {**COMMON, **sc.defaults, **overrides}


def _sigma(cfg: dict, mass: float) -> float:
    return cfg["sigma"] if cfg["sigma"] is not None else default_width(cfg["omega_R"], mass)


def plan_runs(sc: Scenario, cfg: dict) -> list[RunSpec]:
    mass = mass_from_mev(cfg["mass_mev"])
    kT = cfg["kT"]
    x0 = cfg["x0"]
    sigma = _sigma(cfg, mass)
    well = PotentialSpec(QuarticDoubleWell(cfg["omega_R"], x0), mass)

    def params(gamma, mu):
        return EvolutionParams(kT=kT, gamma=gamma, mu=mu, mass=mass)

    def double(grid):
        return double_gaussian(x0, sigma, grid)

    runs: list[RunSpec] = []
    sweep = cfg[sc.sweep_key]
    if sc.name == "decoherence-mu":
        for mu in dict.fromkeys([0.0, *sweep]):
            runs.append(RunSpec("C", format_value(mu), params(cfg["gamma"], mu), well, double, "C"))
    elif sc.name == "decoherence-gamma":
        for g in dict.fromkeys(sweep):
            runs.append(RunSpec("C", format_value(g), params(g, cfg["mu"]), well, double, "C"))
            runs.append(RunSpec("C_undamped", format_value(g), params(g, 0.0), well, double, "C"))
    elif sc.name == "decoherence-slope":
        for gs in dict.fromkeys([1.0, *sweep]):
            runs.append(RunSpec("C", format_value(gs), params(cfg["gamma"], 0.0), linear_spec(gs, mass), double, "C"))
    elif sc.name == "rescaled-free":
        free = PotentialSpec(Free(), mass)
        for a in dict.fromkeys(sweep):
            p = params(cfg["gamma0"] / a, cfg["mu0"] * a)
            runs.append(RunSpec("C", format_value(a), p, free, double, "C"))
    elif sc.kind == "transfer":
        if sc.sweep_key == "mu_list":
            pairs = [(cfg["gamma"], mu) for mu in dict.fromkeys(sweep)]
        else:
            pairs = [(g, cfg["mu"]) for g in dict.fromkeys(sweep)]
        for gamma, mu in pairs:
            value = mu if sc.sweep_key == "mu_list" else gamma
            runs.append(RunSpec("P_left", format_value(value), params(gamma, mu), well, _single_at_minimum(well, gamma, mu, sigma), "P_left"))
        if sc.name == "transfer-mu":
            runs.append(RunSpec("P_left", "baseline", params(0.0, 0.0), well, _single_at_minimum(well, 0.0, 0.0, sigma), "P_left"))
    else:  # pragma: no cover - catalog and planner are kept in sync
        raise ConfigError(f"no planner for {sc.name}")
    return runs


def _single_at_minimum(well: PotentialSpec, gamma: float, mu: float, sigma: float):
    from .potentials import DampingParams

    xm = well_minima(well, DampingParams(gamma, mu))[1]

    def build(grid):
        return gaussian_pure(GaussianSpec(xm, sigma), grid)

    return build


def decoherence_time(cfg: dict, gamma: float) -> float:
    """1 / (2 M gamma kT (2 x_min)^2 / hbar^2), the off-diagonal decay time of the initial peaks."""
    mass = mass_from_mev(cfg["mass_mev"])
    rate = 2 * mass * gamma * cfg["kT"] * (2 * cfg["x0"]) ** 2 / HBAR**2
    return math.inf if rate == 0 else 1.0 / rate


def _guard_mu_range(sc: Scenario, cfg: dict, runs: list[RunSpec]) -> list[str]:
    warnings = []
    if sc.kind != "decoherence":
        return warnings
    for r in runs:
        p = r.params
        if p.mu > 0 and decoherence_time(cfg, p.gamma) < 1.0 / p.mu:
            msg = (
                f"{r.label}@{r.tag}: decoherence time {decoherence_time(cfg, p.gamma):.3g} fs is shorter than "
                f"the bath damping time 1/mu = {1 / p.mu:.3g} fs"
            )
            log.warning(msg)
            warnings.append(msg)
    return warnings


def _choose_dt(ops: list[MasterEquation], cfg: dict):
    """Shared dt for every run in the scenario (twins never mix step sizes)."""
    record = cfg["record_interval"]
    if cfg["dt"] is not None:
        target = cfg["dt"]
    else:
        target = min(op.stable_dt() for op in ops)
    n_sub = max(1, math.ceil(record / target - 1e-9))
    for _ in range(6):
        dt = record / n_sub
        probes = [probe_stability(op, dt) for op in ops]
        if all(p.stable for p in probes):
            return dt, n_sub, probes
        if cfg["dt"] is not None:
            worst = max(p.growth for p in probes)
            raise NumericalError(f"dt = {dt:.4g} fs fails the stability probe (growth {worst:.3g}); reduce dt")
        n_sub *= 2
    raise NumericalError("no stable dt found; reduce dt")


def _simulate(run: RunSpec, grid: SpatialGrid, op: MasterEquation, dt: float, n_sub: int, t_end: float):
    times, main, tr, pur, herm = [], [], [], [], []
    stats = {"boundary_flux_max": 0.0}
    measure = l1_coherence if run.observable == "C" else left_probability

    def observer(t, f):
        times.append(t)
        main.append(measure(f))
        tr.append(trace(f))
        pur.append(purity(f))
        herm.append(relative_hermiticity_defect(f))
        bf = boundary_flux(f)
        stats["boundary_flux_max"] = max(stats["boundary_flux_max"], bf)
        if bf > BOUNDARY_FLUX_LIMIT:
            raise NumericalError(
                f"{run.label}@{run.tag}: |rho| = {bf:.3e} on the outer ring at t = {t:g} fs; increase half_width"
            )

    initial = run.initial(grid)
    final = evolve(initial, StepperConfig(dt, t_end, n_sub), run.params, run.potential, observer, operator=op)
    fp = fingerprint({"gamma": run.params.gamma, "mu": run.params.mu, "kT": run.params.kT, "potential": repr(run.potential)})
    mk = lambda label, vals: ObservableSeries(label, times, vals, fp, run.tag)  # noqa: E731
    series = {
        "main": mk(run.label, main),
        "trace": mk(f"trace_{run.label}" if run.label != run.observable else "trace", tr),
        "purity": mk(f"purity_{run.label}" if run.label != run.observable else "purity", pur),
        "hermiticity": mk(f"herm_{run.label}" if run.label != run.observable else "herm", herm),
    }
    stats.update(
        trace_error_max=float(np.max(np.abs(np.asarray(tr) - 1.0))),
        hermiticity_max=float(np.max(herm)),
        min_eigenvalue_final=min_eigenvalue(final),
    )
    return series, stats


def _derived(sc: Scenario, cfg: dict, runs: list[RunSpec], results: dict) -> list[ObservableSeries]:
    """Ratio series, one per sweep entry (duplicate entries give duplicate series)."""
    out = []
    main = {(r.label, r.tag): results[id(r)][0]["main"] for r in runs}
    tags = [format_value(v) for v in cfg[sc.sweep_key]]
    if sc.name == "decoherence-mu":
        base = main[("C", format_value(0.0))]
        out = [relative_coherence(main[("C", tag)], base) for tag in tags]
    elif sc.name == "decoherence-gamma":
        out = [relative_coherence(main[("C", tag)], main[("C_undamped", tag)]) for tag in tags]
    elif sc.name == "decoherence-slope":
        ref = main[("C", format_value(1.0))]
        for tag in tags:
            s = relative_coherence(main[("C", tag)], ref)
            s.label = "C_g"
            out.append(s)
    return out


def run_scenario(
    name: str,
    overrides: dict | None = None,
    out_dir: str | Path | None = None,
    workers: int | None = None,
) -> ScenarioResult:
    """Run every sweep value of a catalog scenario (plus its baselines).

    When ``out_dir`` is given, ``<name>.csv`` and ``<name>.manifest.json``
    are written there; the manifest is written first with status "running"
    and finalized with "ok" or "failed".
    """
    sc, cfg = resolve(name, overrides)
    workers = workers or cfg["workers"]
    out_dir = Path(out_dir) if out_dir is not None else None
    csv_path = out_dir / f"{name}.csv" if out_dir else None
    man_path = out_dir / f"{name}.manifest.json" if out_dir else None
    manifest = {
        "scenario": name,
        "description": sc.description,
        "status": "running",
        "code_version": __version__,
        "parameters": {k: v for k, v in cfg.items()},
        "sweep": {"key": sc.sweep_key, "values": cfg[sc.sweep_key], "artifact_choice": sc.sweep_key not in (overrides or {})},
        "artifact_choices": ["kT default 0.0259 eV", "sigma = ground-state width of the local well", "sweep lists"],
        "units": {"energy": "eV", "time": "fs", "length": "Angstrom", "hbar": HBAR, "c": C_LIGHT},
        "outputs": {"csv": str(csv_path) if csv_path else None, "manifest": str(man_path) if man_path else None},
        "start_wall_time": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if man_path:
        write_manifest(manifest, man_path)

    try:
        grid = make_grid(cfg["half_width"], cfg["n_points"])
        runs = plan_runs(sc, cfg)
        manifest["warnings"] = _guard_mu_range(sc, cfg, runs)
        mass = runs[0].params.mass
        manifest["parameters"].update(mass=mass, sigma=_sigma(cfg, mass))
        ops = [MasterEquation(grid, r.params, r.potential) for r in runs]
        dt, n_sub, probes = _choose_dt(ops, cfg)
        manifest["grid"] = {"half_width": grid.half_width, "n_points": grid.n_points, "spacing": grid.spacing}
        manifest["stepper"] = {
            "scheme": "classical RK4",
            "dt": dt,
            "record_every": n_sub,
            "record_interval": cfg["record_interval"],
            "t_end": cfg["t_end"],
            "stability_probe": [
                {"run": f"{r.label}@{r.tag}", "growth": p.growth, "c_stab": p.c_stab, "stable": p.stable}
                for r, p in zip(runs, probes)
            ],
        }
        t_end = cfg["t_end"]

        def job(k):
            return _simulate(runs[k], grid, ops[k], dt, n_sub, t_end)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                done = list(pool.map(job, range(len(runs))))
        else:
            done = [job(k) for k in range(len(runs))]
        results = {id(r): d for r, d in zip(runs, done)}
    except Exception as exc:
        manifest.update(status="failed", error=f"{type(exc).__name__}: {exc}", end_wall_time=time.strftime("%Y-%m-%dT%H:%M:%S%z"))
        if man_path:
            write_manifest(manifest, man_path)
        raise

    series: list[ObservableSeries] = []
    for r in runs:
        series.extend(results[id(r)][0].values())
    series.extend(_derived(sc, cfg, runs, results))
    manifest["runs"] = {f"{r.label}@{r.tag}": results[id(r)][1] for r in runs}
    manifest["boundary_flux_max"] = max(s["boundary_flux_max"] for _, s in done)
    if csv_path:
        write_csv(series, csv_path)
    manifest.update(status="ok", end_wall_time=time.strftime("%Y-%m-%dT%H:%M:%S%z"))
    if man_path:
        write_manifest(manifest, man_path)
    return ScenarioResult(series, manifest, csv_path, man_path)
