"""Scenario configuration: JSON schema, thermal room model, irradiance sources.

A scenario file is a JSON object with the fields of :class:`ScenarioConfig`:

    {
      "dt": 0.1,
      "steps": 10000,
      "alpha": 1.0,
      "seed": 0,
      "diffusion_enabled": true,
      "objective": {"gamma_mat": [[...], ...], "gamma_vec": [...], "offset": 0.0},
      "irradiance": {"kind": "square_wave", "period_s": 0.3, "low_w": 0.0, "high_w": 1e4},
      "resources": [
        {"type": "heater", "id": "h1", "p_heat": 15000.0, "lock_steps": 10,
         "band": {"t_min": 20.0, "t_max": 24.0}, "initially_on": false,
         "room": {"c_th": 2e5, "kappa": 1000.0, "t_out": 15.0, "t_init": 22.0}},
        {"type": "multi_heater", "id": "bank", "lock_steps": 10,
         "band": {"t_min": 20.0, "t_max": 24.0},
         "heaters": [{"p_heat": 1000.0, "initially_on": false,
                      "room": {"c_th": 1e5, "kappa": 500.0, "t_out": 15.0, "t_init": 21.0}}]},
        {"type": "pv", "id": "pv1", "p_max": 1e4, "phi": 0.7854},
        {"type": "delayed", "id": "d1", "tau": 3,
         "base_set": {"vertices": [[1, 0], [6, 0]]}, "initial": [1, 0]},
        {"type": "ideal", "id": "x1", "initial": [0, 0]}
      ]
    }

Irradiance kinds: ``constant{value_w}``, ``square_wave{period_s, low_w,
high_w}`` (starts high; half-period in steps is max(1, round(period_s /
(2 dt))) with banker's rounding, so a 300 ms period at dt = 0.1 s runs as
2 steps high / 2 steps low, an effective 400 ms period), and
``random_walk{sigma, max_w, seed?, init_w?}`` (clamped to [0, max_w]; the
walk seed defaults to the scenario seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, GeometryError
from .discrete import ComfortBand
from .geometry import ConvexPolygon, Setpoint
from .gridagent import QuadraticObjective


@dataclass(frozen=True)
class ThermalParams:
    """First-order room model: heat capacity, loss coefficient, outside temp."""

    c_th: float    # J / degC
    kappa: float   # W / degC
    t_out: float   # degC
    t_init: float  # degC

    def __post_init__(self):
        if not (math.isfinite(self.c_th) and self.c_th > 0):
            raise ConfigError("thermal capacity c_th must be positive")
        if self.kappa < 0:
            raise ConfigError("loss coefficient kappa must be non-negative")


def thermal_step(room: ThermalParams, t_now: float, heating_power: float, dt: float) -> float:
    """Explicit first-order update: T' = T + (dt/c_th) (kappa (t_out - T) + |P|)."""
    return t_now + (dt / room.c_th) * (room.kappa * (room.t_out - t_now) + abs(heating_power))


# ---------------------------------------------------------------------------
# Irradiance


@dataclass(frozen=True)
class ConstantIrradiance:
    value_w: float

    def at(self, k: int, dt: float) -> float:
        if k < 0:
            raise ConfigError("irradiance step index must be >= 0")
        return self.value_w


@dataclass(frozen=True)
class SquareWaveIrradiance:
    period_s: float
    low_w: float
    high_w: float

    def at(self, k: int, dt: float) -> float:
        if k < 0:
            raise ConfigError("irradiance step index must be >= 0")
        half = max(1, round(self.period_s / (2.0 * dt)))
        return self.high_w if (k // half) % 2 == 0 else self.low_w


class RandomWalkIrradiance:
    """Seeded clamped random walk; values are cached so lookups are random access."""

    def __init__(self, sigma: float, max_w: float, seed: int = 0, init_w: float | None = None):
        if sigma < 0 or max_w <= 0:
            raise ConfigError("random walk needs sigma >= 0 and max_w > 0")
        self.sigma = float(sigma)
        self.max_w = float(max_w)
        self.seed = int(seed)
        self.init_w = float(init_w) if init_w is not None else self.max_w / 2.0
        self._values = [min(max(self.init_w, 0.0), self.max_w)]
        self._rng = np.random.default_rng(self.seed)

    def at(self, k: int, dt: float) -> float:
        if k < 0:
            raise ConfigError("irradiance step index must be >= 0")
        while len(self._values) <= k:
            nxt = self._values[-1] + self.sigma * float(self._rng.standard_normal())
            self._values.append(min(max(nxt, 0.0), self.max_w))
        return self._values[k]


IrradianceProfile = Union[ConstantIrradiance, SquareWaveIrradiance, RandomWalkIrradiance]


def irradiance_at(profile: IrradianceProfile, k: int, dt: float) -> float:
    """Available PV power (W) at step index k >= 0."""
    return profile.at(k, dt)


# ---------------------------------------------------------------------------
# Resource configs


@dataclass(frozen=True)
class HeaterResource:
    id: str
    p_heat: float
    band: ComfortBand
    room: ThermalParams
    lock_steps: int = 10
    initially_on: bool = False
    type: str = "heater"


@dataclass(frozen=True)
class MultiHeaterUnit:
    p_heat: float
    room: ThermalParams
    initially_on: bool = False


@dataclass(frozen=True)
class MultiHeaterResource:
    id: str
    band: ComfortBand
    heaters: tuple[MultiHeaterUnit, ...]
    lock_steps: int = 10
    type: str = "multi_heater"


@dataclass(frozen=True)
class PvResource:
    id: str
    p_max: float
    phi: float
    type: str = "pv"


@dataclass(frozen=True)
class DelayedResource:
    id: str
    tau: int
    base_set: ConvexPolygon
    initial: Setpoint
    type: str = "delayed"


@dataclass(frozen=True)
class IdealResource:
    id: str
    initial: Setpoint = Setpoint(0.0, 0.0)
    type: str = "ideal"


ResourceConfig = Union[
    HeaterResource, MultiHeaterResource, PvResource, DelayedResource, IdealResource
]


@dataclass
class ScenarioConfig:
    """Full closed-loop scenario description."""

    dt: float
    steps: int
    objective: QuadraticObjective
    alpha: float
    resources: list[ResourceConfig]
    irradiance: IrradianceProfile | None = None
    diffusion_enabled: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError("dt must be positive")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigError("alpha must be positive")
        if self.objective.dim != 2 * len(self.resources):
            raise ConfigError(
                f"objective dimension {self.objective.dim} != 2 * {len(self.resources)} resources"
            )
        ids = [r.id for r in self.resources]
        if len(set(ids)) != len(ids):
            raise ConfigError("resource ids must be unique")
        if self.irradiance is None and any(r.type == "pv" for r in self.resources):
            raise ConfigError("pv resources require an irradiance profile")


# ---------------------------------------------------------------------------
# JSON loading


def polygon_from_spec(obj) -> ConvexPolygon:
    """Polygon literal: {"vertices": [[p, q], ...]} or {"interval": [lo, hi]}."""
    if isinstance(obj, dict) and "vertices" in obj:
        return ConvexPolygon(obj["vertices"])
    if isinstance(obj, dict) and "interval" in obj:
        lo, hi = obj["interval"]
        return ConvexPolygon.interval(float(lo), float(hi))
    raise ConfigError(f"cannot parse polygon spec: {obj!r}")


def polygon_to_spec(poly: ConvexPolygon) -> dict:
    return {"vertices": [[v.p, v.q] for v in poly.vertices]}


def _band_from(obj) -> ComfortBand:
    try:
        return ComfortBand(float(obj["t_min"]), float(obj["t_max"]))
    except (KeyError, TypeError, GeometryError) as exc:
        raise ConfigError(f"bad comfort band: {obj!r}") from exc


def _thermal_from(obj) -> ThermalParams:
    try:
        return ThermalParams(
            float(obj["c_th"]), float(obj["kappa"]), float(obj["t_out"]), float(obj["t_init"])
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad thermal params: {obj!r}") from exc


def _resource_from(obj, index: int) -> ResourceConfig:
    kind = obj.get("type")
    rid = obj.get("id", f"r{index}")
    if kind == "heater":
        return HeaterResource(
            id=rid,
            p_heat=float(obj["p_heat"]),
            band=_band_from(obj["band"]),
            room=_thermal_from(obj["room"]),
            lock_steps=int(obj.get("lock_steps", 10)),
            initially_on=bool(obj.get("initially_on", False)),
        )
    if kind == "multi_heater":
        units = tuple(
            MultiHeaterUnit(
                p_heat=float(h["p_heat"]),
                room=_thermal_from(h["room"]),
                initially_on=bool(h.get("initially_on", False)),
            )
            for h in obj["heaters"]
        )
        if not units:
            raise ConfigError("multi_heater needs at least one heater")
        return MultiHeaterResource(
            id=rid,
            band=_band_from(obj["band"]),
            heaters=units,
            lock_steps=int(obj.get("lock_steps", 10)),
        )
    if kind == "pv":
        return PvResource(id=rid, p_max=float(obj["p_max"]), phi=float(obj.get("phi", 0.0)))
    if kind == "delayed":
        return DelayedResource(
            id=rid,
            tau=int(obj["tau"]),
            base_set=polygon_from_spec(obj["base_set"]),
            initial=Setpoint(float(obj["initial"][0]), float(obj["initial"][1])),
        )
    if kind == "ideal":
        init = obj.get("initial", [0.0, 0.0])
        return IdealResource(id=rid, initial=Setpoint(float(init[0]), float(init[1])))
    raise ConfigError(f"unknown resource type {kind!r}")


def _irradiance_from(obj, scenario_seed: int) -> IrradianceProfile:
    kind = obj.get("kind")
    if kind == "constant":
        return ConstantIrradiance(float(obj["value_w"]))
    if kind == "square_wave":
        return SquareWaveIrradiance(
            float(obj["period_s"]), float(obj["low_w"]), float(obj["high_w"])
        )
    if kind == "random_walk":
        return RandomWalkIrradiance(
            sigma=float(obj["sigma"]),
            max_w=float(obj["max_w"]),
            seed=int(obj.get("seed", scenario_seed)),
            init_w=obj.get("init_w"),
        )
    raise ConfigError(f"unknown irradiance kind {kind!r}")


def scenario_from_dict(obj: dict) -> ScenarioConfig:
    try:
        seed = int(obj.get("seed", 0))
        jb = obj["objective"]
        objective = QuadraticObjective(
            np.asarray(jb["gamma_mat"], dtype=float),
            np.asarray(jb["gamma_vec"], dtype=float),
            float(jb.get("offset", 0.0)),
        )
        resources = [_resource_from(r, i) for i, r in enumerate(obj["resources"])]
        irr = obj.get("irradiance")
        return ScenarioConfig(
            dt=float(obj.get("dt", 0.1)),
            steps=int(obj["steps"]),
            objective=objective,
            alpha=float(obj["alpha"]),
            resources=resources,
            irradiance=_irradiance_from(irr, seed) if irr is not None else None,
            diffusion_enabled=bool(obj.get("diffusion_enabled", True)),
            seed=seed,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, GeometryError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(obj)
