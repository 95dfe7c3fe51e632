"""Run configuration: TOML parsing, validation, canonical hashing.

Every numeric constraint owned by the core modules is re-checked here at
parse time so a bad config fails before any computation starts, with the
offending field named.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .diagnostics import DiagnosticsError, FitConfig
from .grid import Grid, GridError
from .integrator import IntegratorConfig, IntegratorError, WavePacket
from .nonlinearity import RhsMode
from .potential import Potential, PotentialError, potential_from_spec

__all__ = ["RunConfig", "ConfigError", "load_config", "parse_config",
           "config_hash"]


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


@dataclass
class RunConfig:
    raw: dict
    grid: Grid
    potential: Potential
    mode: RhsMode
    packets: list
    integrator: IntegratorConfig
    fit: FitConfig
    seed: int
    output_dir: str | None
    phase_probe: float | None = None

    @property
    def hash(self) -> str:
        return config_hash(self.raw)


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}.{key}", "required field missing")
    return table[key]


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a table")

    gtab = _require(raw, "grid", "config")
    n_points = _require(gtab, "n_points", "grid")
    length = _require(gtab, "length", "grid")
    try:
        grid = Grid(n_points, float(length))
    except GridError as exc:
        name = "grid.n_points" if "n_points" in str(exc) else "grid.length"
        raise ConfigError(name, str(exc)) from exc

    ptab = _require(raw, "potential", "config")
    try:
        pot = potential_from_spec(ptab)
    except PotentialError as exc:
        raise ConfigError("potential", str(exc)) from exc

    mode_str = raw.get("mode", "hartree-fock")
    try:
        mode = RhsMode(mode_str)
    except ValueError as exc:
        raise ConfigError(
            "mode", f"must be one of {[m.value for m in RhsMode]}, "
            f"got {mode_str!r}") from exc

    packets_raw = _require(raw, "initial_data", "config")
    if not isinstance(packets_raw, list) or not packets_raw:
        raise ConfigError("initial_data", "must be a nonempty array of tables")
    packets = []
    for i, ptable in enumerate(packets_raw):
        where = f"initial_data[{i}]"
        kind = ptable.get("kind", "gaussian")
        if kind not in ("gaussian", "plane_wave"):
            raise ConfigError(f"{where}.kind", f"unknown packet kind {kind!r}")
        weight = float(_require(ptable, "weight", where))
        if weight < 0:
            raise ConfigError(f"{where}.weight", "must be nonnegative")
        width = float(ptable.get("width", 1.0))
        if kind == "gaussian" and width <= 0:
            raise ConfigError(f"{where}.width", "must be positive")
        packets.append(WavePacket(
            weight=weight,
            amplitude=float(_require(ptable, "amplitude", where)),
            center=float(ptable.get("center", 0.0)),
            frequency=float(ptable.get("frequency", 0.0)),
            width=width,
            kind=kind,
        ))

    itab = _require(raw, "integrator", "config")
    try:
        integ = IntegratorConfig(
            dt=float(_require(itab, "dt", "integrator")),
            scheme=itab.get("scheme", "ifrk4"),
            t_start=float(itab.get("t_start", 1.0)),
            t_end=float(_require(itab, "t_end", "integrator")),
            snapshot_ratio=float(itab.get("snapshot_ratio", np.sqrt(2.0))),
            extra_snapshots=tuple(itab.get("extra_snapshots", ())),
            dealias=bool(itab.get("dealias", False)),
            boundary_tol=float(itab.get("boundary_tol", 1e-6)),
        )
    except IntegratorError as exc:
        raise ConfigError("integrator", str(exc)) from exc

    ftab = raw.get("fit", {})
    try:
        fit = FitConfig(
            alpha=float(ftab.get("alpha", 0.05)),
            theta=float(ftab.get("theta", 0.5)),
            beta=float(ftab.get("beta", 0.125)),
            window=tuple(ftab.get("window", (4.0, 64.0))),
        )
    except DiagnosticsError as exc:
        raise ConfigError("fit", str(exc)) from exc

    probe = ftab.get("phase_probe")
    if probe is None and packets:
        heaviest = max(packets, key=lambda p: p.weight)
        probe = heaviest.frequency

    seed = int(raw.get("seed", 0))
    output_dir = raw.get("output_dir")
    return RunConfig(raw=raw, grid=grid, potential=pot, mode=mode,
                     packets=packets, integrator=integ, fit=fit, seed=seed,
                     output_dir=output_dir,
                     phase_probe=None if probe is None else float(probe))


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError("config", f"file not found: {path}")
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"TOML parse error: {exc}") from exc
    return parse_config(raw)
