"""Sectioned TOML configs for the command-line driver.

A protocol run is one document with [ensemble], [couplings], [protocol],
[metrology] and [output] tables (plus [sweep] for parameter sweeps); a
coupling report uses [well], [geometry] and [interactions] instead.
Validation is strict: unknown keys, wrong types and out-of-range values
are all rejected, and every error message names the dotted key path so
the offending line is easy to find.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import tomli

from .constants import HBAR
from .couplings import DoubleWellSpec, GaussianBarrier
from .oracle import Couplings

__all__ = [
    "ConfigError",
    "TauGrid",
    "Protocol",
    "Metrology",
    "Output",
    "Sweep",
    "RunConfig",
    "ParamsConfig",
    "load_run_config",
    "load_params_config",
    "parse_run_config",
    "parse_params_config",
]

OPTIMAL = "optimal"


class ConfigError(ValueError):
    """A config document is unusable; the message names the bad key."""


class _Section:
    """One TOML table with typed, path-tagged key extraction."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a table")
        self._data = dict(data)
        self.path = path

    def _take(self, key, required, default):
        if key in self._data:
            return self._data.pop(key)
        if required:
            raise ConfigError(f"{self.path}.{key}: required key is missing")
        return default

    def number(self, key, required=False, default=None):
        value = self._take(key, required, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{self.path}.{key}: expected a number")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{self.path}.{key}: must be finite")
        return value

    def integer(self, key, required=False, default=None):
        value = self._take(key, required, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self.path}.{key}: expected an integer")
        return value

    def boolean(self, key, required=False, default=None):
        value = self._take(key, required, default)
        if value is None:
            return None
        if not isinstance(value, bool):
            raise ConfigError(f"{self.path}.{key}: expected true or false")
        return value

    def string(self, key, required=False, default=None, choices=None):
        value = self._take(key, required, default)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ConfigError(f"{self.path}.{key}: expected a string")
        if choices is not None and value not in choices:
            raise ConfigError(
                f"{self.path}.{key}: expected one of {', '.join(choices)}, got {value!r}"
            )
        return value

    def raw(self, key, required=False, default=None):
        return self._take(key, required, default)

    def has(self, key) -> bool:
        return key in self._data

    def close(self):
        if self._data:
            names = ", ".join(sorted(self._data))
            raise ConfigError(f"{self.path}: unknown key(s): {names}")


@dataclass(frozen=True)
class TauGrid:
    """Evaluation-time grid: count points from start to stop, both ends in."""

    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise ConfigError("protocol.tau_grid.spacing: expected linear or log")
        if self.count < 1:
            raise ConfigError("protocol.tau_grid.count: must be at least 1")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("protocol.tau_grid: start and stop must be finite")
        if self.count > 1 and not self.stop > self.start:
            raise ConfigError("protocol.tau_grid: stop must exceed start (grid is increasing)")
        if self.spacing == "log" and self.start <= 0.0:
            raise ConfigError("protocol.tau_grid: log spacing needs start > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class Protocol:
    kind: str
    grid: TauGrid
    tau_rot: Optional[Union[float, str]] = None  # float, or "optimal" (gid)
    beta: Optional[float] = None
    theta: Optional[float] = None


@dataclass(frozen=True)
class Metrology:
    compute_tilde: bool = False
    dense_cap: int = 4096  # largest N for dense reduced-state work


@dataclass(frozen=True)
class Output:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class RunConfig:
    N: int
    M: int
    couplings: Couplings
    protocol: Protocol
    metrology: Metrology
    output: Output
    sweep: Optional[Sweep] = None


@dataclass(frozen=True)
class ParamsConfig:
    spec: DoubleWellSpec
    displacement: tuple
    scattering_length: float
    c_dd: float
    output: Output


def _read_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    except tomli.TOMLDecodeError as exc:
        # tomli already reports line and column
        raise ConfigError(f"{path}: {exc}") from None


def _known_sections(doc: dict, allowed, source: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: expected a TOML document")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"{source}: unknown section(s): {', '.join(unknown)}")


def _parse_grid(raw) -> TauGrid:
    sec = _Section(raw, "protocol.tau_grid")
    grid = TauGrid(
        start=sec.number("start", required=True),
        stop=sec.number("stop", required=True),
        count=sec.integer("count", required=True),
        spacing=sec.string("spacing", default="linear", choices=("linear", "log")),
    )
    sec.close()
    return grid


def _parse_protocol(raw) -> Protocol:
    sec = _Section(raw, "protocol")
    kind = sec.string("kind", required=True, choices=("gie", "gid"))
    grid = _parse_grid(sec.raw("tau_grid", required=True))

    if kind == "gie":
        for key in ("tau_rot", "beta", "theta"):
            if sec.has(key):
                raise ConfigError(f"protocol.{key}: only gid runs have a rotation step")
        sec.close()
        return Protocol(kind=kind, grid=grid)

    if grid.start < 0.0:
        raise ConfigError("protocol.tau_grid.start: gid dephasing times start at 0")

    raw_rot = sec.raw("tau_rot", required=True)
    if isinstance(raw_rot, str):
        if raw_rot != OPTIMAL:
            raise ConfigError(f"protocol.tau_rot: expected a number or {OPTIMAL!r}")
        tau_rot: Union[float, str] = OPTIMAL
    elif isinstance(raw_rot, bool) or not isinstance(raw_rot, (int, float)):
        raise ConfigError(f"protocol.tau_rot: expected a number or {OPTIMAL!r}")
    else:
        tau_rot = float(raw_rot)
        if not (math.isfinite(tau_rot) and tau_rot >= 0.0):
            raise ConfigError("protocol.tau_rot: must be finite and non-negative")

    beta = sec.number("beta")
    theta = sec.number("theta")
    if (beta is None) == (theta is None):
        raise ConfigError("protocol: gid runs take exactly one of beta, theta")
    sec.close()
    return Protocol(kind=kind, grid=grid, tau_rot=tau_rot, beta=beta, theta=theta)


def _parse_couplings(raw, kind: str) -> Couplings:
    if raw is None:
        if kind == "gid":
            return Couplings(0.0, 0.0, 1.0, dimensionless=True)
        raise ConfigError("couplings: required section is missing for gie runs")
    sec = _Section(raw, "couplings")
    c = Couplings(
        chi_cont=sec.number("chi_cont", default=0.0),
        chi_loc=sec.number("chi_loc", default=0.0),
        chi_nloc=sec.number("chi_nloc", default=1.0 if kind == "gid" else 0.0),
        dimensionless=sec.boolean("dimensionless", default=(kind == "gid")),
    )
    sec.close()
    if kind == "gid" and (
        not c.dimensionless or c.chi_cont != 0.0 or c.chi_loc != 0.0 or c.chi_nloc != 1.0
    ):
        # the gid engine works on the rescaled axis where tau already
        # carries the nonlocal rate; other couplings have no meaning there
        raise ConfigError(
            "couplings: gid runs are fixed to chi_nloc = 1, chi_cont = chi_loc = 0, "
            "dimensionless = true (tau and tau_rot absorb the physical rates)"
        )
    return c


def _parse_metrology(raw) -> Metrology:
    if raw is None:
        return Metrology()
    sec = _Section(raw, "metrology")
    met = Metrology(
        compute_tilde=sec.boolean("compute_tilde", default=False),
        dense_cap=sec.integer("dense_cap", default=4096),
    )
    sec.close()
    if met.dense_cap < 1:
        raise ConfigError("metrology.dense_cap: must be at least 1")
    return met


def _parse_output(raw, path_label="output") -> Output:
    if raw is None:
        return Output()
    sec = _Section(raw, path_label)
    out = Output(
        path=sec.string("path"),
        format=sec.string("format", default="csv", choices=("csv", "json")),
    )
    sec.close()
    if out.path is not None and not out.path:
        raise ConfigError(f"{path_label}.path: must not be empty")
    return out


def _parse_sweep(raw) -> Sweep:
    sec = _Section(raw, "sweep")
    parameter = sec.string("parameter", required=True)
    if parameter != "N":
        raise ConfigError("sweep.parameter: only N sweeps are supported")
    values = sec.raw("values", required=True)
    sec.close()
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values: expected a nonempty list")
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"sweep.values[{i}]: expected an integer >= 1")
        out.append(v)
    if len(set(out)) != len(out):
        raise ConfigError("sweep.values: duplicate entries")
    return Sweep(parameter=parameter, values=tuple(out))


def parse_run_config(doc: dict, source: str = "config") -> RunConfig:
    _known_sections(
        doc, ("ensemble", "couplings", "protocol", "metrology", "output", "sweep"), source
    )
    if "ensemble" not in doc:
        raise ConfigError(f"{source}: missing [ensemble] section")
    if "protocol" not in doc:
        raise ConfigError(f"{source}: missing [protocol] section")

    ens = _Section(doc["ensemble"], "ensemble")
    N = ens.integer("N", required=True)
    M = ens.integer("M", required=True)
    ens.close()
    if N < 1:
        raise ConfigError("ensemble.N: must be at least 1")
    if M < 2:
        raise ConfigError("ensemble.M: need at least two ensembles")

    protocol = _parse_protocol(doc["protocol"])
    couplings = _parse_couplings(doc.get("couplings"), protocol.kind)
    metrology = _parse_metrology(doc.get("metrology"))
    output = _parse_output(doc.get("output"))
    sweep = _parse_sweep(doc["sweep"]) if "sweep" in doc else None

    if metrology.compute_tilde:
        biggest = max(sweep.values) if sweep else N
        if biggest > metrology.dense_cap:
            raise ConfigError(
                f"metrology.compute_tilde: needs dense reduced states, but N = {biggest} "
                f"exceeds dense_cap = {metrology.dense_cap}"
            )
        if protocol.kind == "gid" and M != 2:
            raise ConfigError(
                "metrology.compute_tilde: gid reduced states are only available for M = 2"
            )
    return RunConfig(
        N=N,
        M=M,
        couplings=couplings,
        protocol=protocol,
        metrology=metrology,
        output=output,
        sweep=sweep,
    )


def parse_params_config(doc: dict, source: str = "config") -> ParamsConfig:
    _known_sections(doc, ("well", "geometry", "interactions", "output"), source)
    for name in ("well", "geometry", "interactions"):
        if name not in doc:
            raise ConfigError(f"{source}: missing [{name}] section")

    well = _Section(doc["well"], "well")
    mass = well.number("mass", required=True)
    omega_x = well.number("omega_x", required=True)
    omega_y = well.number("omega_y", required=True)
    omega_z = well.number("omega_z", required=True)
    height = well.number("barrier_height", default=0.0)
    width = well.number("barrier_width", default=None)
    grid_points = well.integer("grid_points", default=None)
    half_span = well.number("grid_half_span", default=None)
    well.close()
    if mass <= 0.0 or min(omega_x, omega_y, omega_z) <= 0.0:
        raise ConfigError("well: mass and trap frequencies must be positive")
    if height < 0.0:
        raise ConfigError("well.barrier_height: must be non-negative")
    sigma_x = math.sqrt(HBAR / (mass * omega_x))
    if width is None:
        if height > 0.0:
            raise ConfigError("well.barrier_width: required when barrier_height > 0")
        width = sigma_x  # unused placeholder for the flat case
    elif width <= 0.0:
        raise ConfigError("well.barrier_width: must be positive")
    grid = None
    if grid_points is not None or half_span is not None:
        n = 1025 if grid_points is None else grid_points
        h = 10.0 if half_span is None else half_span
        if h <= 0.0:
            raise ConfigError("well.grid_half_span: must be positive (units of sigma_x)")
        grid = (-h * sigma_x, h * sigma_x, n)
    try:
        spec = DoubleWellSpec(
            mass=mass,
            omega_x=omega_x,
            omega_y=omega_y,
            omega_z=omega_z,
            barrier=GaussianBarrier(height=height, width=width),
            grid=grid,
        )
    except ValueError as exc:
        raise ConfigError(f"well: {exc}") from None

    geo = _Section(doc["geometry"], "geometry")
    separation = geo.number("separation", default=None)
    displacement = geo.raw("displacement", default=None)
    geo.close()
    if (separation is None) == (displacement is None):
        raise ConfigError("geometry: supply exactly one of separation, displacement")
    if separation is not None:
        if separation <= 0.0:
            raise ConfigError("geometry.separation: must be positive")
        delta = (float(separation), 0.0, 0.0)
    else:
        if (
            not isinstance(displacement, list)
            or len(displacement) != 3
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in displacement)
        ):
            raise ConfigError("geometry.displacement: expected three numbers")
        delta = tuple(float(v) for v in displacement)
        if not all(math.isfinite(v) for v in delta) or not any(delta):
            raise ConfigError("geometry.displacement: must be finite and nonzero")

    inter = _Section(doc["interactions"], "interactions")
    a_s = inter.number("scattering_length", required=True)
    c_dd = inter.number("c_dd", required=True)
    inter.close()
    if c_dd < 0.0:
        raise ConfigError("interactions.c_dd: must be non-negative")

    output = _parse_output(doc.get("output"))
    if output.format != "json" and doc.get("output", {}).get("format") is not None:
        raise ConfigError("output.format: coupling reports are JSON documents")
    return ParamsConfig(
        spec=spec,
        displacement=delta,
        scattering_length=a_s,
        c_dd=c_dd,
        output=Output(path=output.path, format="json"),
    )


def load_run_config(path: str) -> RunConfig:
    return parse_run_config(_read_toml(path), source=path)


def load_params_config(path: str) -> ParamsConfig:
    return parse_params_config(_read_toml(path), source=path)
