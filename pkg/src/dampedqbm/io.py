"""Config parsing and CSV / manifest serialization."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .observables import ObservableSeries


class ConfigError(ValueError):
    """Bad override: unknown key, wrong type or unphysical value."""


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {s!r}")
    return v


def _float_list(s: str) -> list[float]:
    items = [x for x in s.replace("[", "").replace("]", "").split(",") if x.strip()]
    if not items:
        raise ValueError("empty list")
    return [_float(x) for x in items]


def _int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(f"{s!r} is not an integer")
    return int(v)


# key -> (parser, constraint, human name); constraint is "pos" (> 0) or "nonneg" (>= 0)
KEYS = {
    "kT": (_float, "pos", "kT"),
    "gamma": (_float, "nonneg", "γ"),
    "mu": (_float, "nonneg", "μ"),
    "gamma0": (_float, "pos", "γ0"),
    "mu0": (_float, "pos", "μ0"),
    "omega_R": (_float, "pos", "ω_R"),
    "x0": (_float, "pos", "x0"),
    "sigma": (_float, "pos", "σ"),
    "mass_mev": (_float, "pos", "M"),
    "mu_list": (_float_list, "nonneg", "μ"),
    "gamma_list": (_float_list, "nonneg", "γ"),
    "a_list": (_float_list, "pos", "a"),
    "g_list": (_float_list, "pos", "g"),
    "n_points": (_int, "pos", "n_points"),
    "half_width": (_float, "pos", "half_width"),
    "dt": (_float, "pos", "dt"),
    "t_end": (_float, "pos", "t_end"),
    "record_interval": (_float, "pos", "record_interval"),
    "workers": (_int, "pos", "workers"),
}


def _check(key: str, value) -> None:
    _, constraint, human = KEYS[key]
    values = value if isinstance(value, list) else [value]
    for v in values:
        if constraint == "pos" and not v > 0:
            raise ConfigError(f"{human} must be > 0 (got {v})")
        if constraint == "nonneg" and v < 0:
            raise ConfigError(f"{human} must be ≥ 0 (got {v})")
    if key == "n_points" and value % 2 == 0:
        raise ConfigError(f"n_points must be odd (got {value})")


def coerce(key: str, raw) -> object:
    """Parse and validate one override value."""
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}")
    parser = KEYS[key][0]
    if isinstance(raw, str):
        try:
            value = parser(raw.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    elif parser is _float_list:
        value = [float(v) for v in (raw if isinstance(raw, (list, tuple)) else [raw])]
    elif parser is _int:
        if isinstance(raw, float) and raw != int(raw):
            raise ConfigError(f"bad value for {key}: {raw!r} is not an integer")
        value = int(raw)
    else:
        value = float(raw)
    _check(key, value)
    return value


def _parse_pair(text: str, where: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"{where}: expected key=value, got {text!r}")
    key, _, val = text.partition("=")
    return key.strip(), val.strip()


def parse_config(path: str | Path | None = None, flags: Sequence[str] = ()) -> dict:
    """Read ``key=value`` lines (``#`` comments) from ``path``, then apply
    ``flags`` (same syntax) on top. Returns a typed override map."""
    out: dict = {}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, val = _parse_pair(line, f"{path}:{lineno}")
            out[key] = coerce(key, val)
    for flag in flags:
        key, val = _parse_pair(flag, "--set")
        out[key] = coerce(key, val)
    return out


def validate_overrides(overrides: dict) -> dict:
    return {k: coerce(k, v) for k, v in overrides.items()}


def format_value(v: float) -> str:
    return format(float(v), ".12g")


def write_csv(series: Iterable[ObservableSeries], path: str | Path) -> Path:
    """One column per series, rows on the union of time stamps.

    Missing samples (e.g. a truncated ratio series) are left empty.
    """
    series = list({s.column: s for s in series}.values())  # duplicate columns written once
    path = Path(path)
    times = np.unique(np.concatenate([s.times for s in series])) if series else np.array([])
    columns = []
    for s in series:
        col = {float(t): float(v) for t, v in zip(s.times, s.values)}
        columns.append(col)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_fs"] + [s.column for s in series])
            for t in times:
                row = [format_value(t)]
                for col in columns:
                    v = col.get(float(t))
                    row.append("" if v is None else format_value(v))
                w.writerow(row)
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc}") from exc
    return path


def read_csv(path: str | Path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Inverse of :func:`write_csv`: column name -> (times, values)."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    t_all = np.array([float(r[0]) for r in body])
    for k, name in enumerate(header[1:], start=1):
        mask = np.array([r[k] != "" for r in body], dtype=bool)
        vals = np.array([float(r[k]) for r in body if r[k] != ""])
        out[name] = (t_all[mask] if body else t_all, vals)
    return out


def write_manifest(manifest: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path
