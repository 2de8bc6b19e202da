"""Deterministic closed-loop harness: grid agent, followers, thermal rooms.

Each step the controller computes a request vector by projected gradient
steering from the previously implemented vector, the admissible set being
the product of the resources' current advertisements. Every resource then
maps its request to an implementable setpoint (with or without error
diffusion) and the trace records requests, implementations, accumulated
errors, the objective value, the running mean, the projection-active flag,
and room temperatures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .delayed import DelayedAgent
from .discrete import ComfortBand, HeaterAgent, HeaterState, MultiHeaterAgent
from .errors import GridTrackError, SimulationError
from .geometry import ConvexPolygon, ConvexShape, Setpoint, diameter
from .gridagent import GridAgentConfig, QuadraticObjective, gradient_step
from .scenario import (
    DelayedResource,
    HeaterResource,
    IdealResource,
    MultiHeaterResource,
    PvResource,
    ScenarioConfig,
    irradiance_at,
    thermal_step,
)
from .uncertain import PvAgent, PvParams, pv_error_bound


class _HeaterRunner:
    def __init__(self, cfg: HeaterResource):
        self.id = cfg.id
        self.room = cfg.room
        self.t = cfg.room.t_init
        self.dt = None  # set by simulator
        self.agent = HeaterAgent(
            cfg.p_heat, cfg.band, cfg.lock_steps, cfg.room.t_init, cfg.initially_on
        )
        self.room_ids = [cfg.id]

    def y0(self) -> Setpoint:
        return Setpoint(self.agent.implemented_power, 0.0)

    def advertised(self, k: int) -> ConvexShape:
        s = self.agent.implementable(self.t)
        return ConvexPolygon.interval(s.lo, s.hi)

    def step(self, k: int, req: Setpoint, diffuse: bool) -> tuple[Setpoint, list[float]]:
        t_used = self.t
        p_imp = self.agent.step(req.p, t_used, diffuse)
        self.t = thermal_step(self.room, t_used, p_imp, self.dt)
        return Setpoint(p_imp, 0.0), [t_used]

    @property
    def error(self):
        return self.agent.error

    def tracking_bound(self) -> float:
        return 0.5 * self.agent.state.p_heat


class _MultiHeaterRunner:
    def __init__(self, cfg: MultiHeaterResource):
        self.id = cfg.id
        self.units = cfg.heaters
        self.temps = [u.room.t_init for u in cfg.heaters]
        self.dt = None
        states = [
            HeaterState(u.initially_on, 0, u.p_heat, u.room.t_init) for u in cfg.heaters
        ]
        self.agent = MultiHeaterAgent(states, cfg.band, cfg.lock_steps)
        self.room_ids = [f"{cfg.id}.{j}" for j in range(len(cfg.heaters))]

    def y0(self) -> Setpoint:
        return Setpoint(self.agent.implemented_power, 0.0)

    def advertised(self, k: int) -> ConvexShape:
        s = self.agent.implementable(self.temps)
        return ConvexPolygon.interval(s.lo, s.hi)

    def step(self, k: int, req: Setpoint, diffuse: bool) -> tuple[Setpoint, list[float]]:
        used = list(self.temps)
        p_imp = self.agent.step(req.p, used, diffuse)
        self.temps = [
            thermal_step(u.room, t, -st.p_heat if st.on else 0.0, self.dt)
            for u, t, st in zip(self.units, used, self.agent.states)
        ]
        return Setpoint(p_imp, 0.0), used

    @property
    def error(self):
        return self.agent.error

    def tracking_bound(self) -> float:
        return 0.5 * max(u.p_heat for u in self.units)


class _PvRunner:
    def __init__(self, cfg: PvResource, irradiance, dt: float):
        self.id = cfg.id
        self.irradiance = irradiance
        self.dt = dt
        self.params = PvParams(cfg.p_max, cfg.phi)
        self.agent = PvAgent(self.params, irradiance_at(irradiance, 0, dt))
        self.room_ids: list[str] = []

    def y0(self) -> Setpoint:
        return Setpoint(0.0, 0.0)

    def advertised(self, k: int) -> ConvexShape:
        return self.agent.advertised()

    def step(self, k: int, req: Setpoint, diffuse: bool) -> tuple[Setpoint, list[float]]:
        p_avail = irradiance_at(self.irradiance, k, self.dt)
        return self.agent.step(req, p_avail, diffuse), []

    @property
    def error(self):
        return self.agent.error

    def tracking_bound(self) -> float:
        return pv_error_bound(self.params)


class _DelayedRunner:
    def __init__(self, cfg: DelayedResource):
        self.id = cfg.id
        self.agent = DelayedAgent(cfg.base_set, cfg.tau, cfg.initial)
        self.room_ids: list[str] = []

    def y0(self) -> Setpoint:
        return self.agent.current

    def advertised(self, k: int) -> ConvexShape:
        return self.agent.advertised()

    def step(self, k: int, req: Setpoint, diffuse: bool) -> tuple[Setpoint, list[float]]:
        # the delay rule has no diffusion variant; boundedness is structural
        return self.agent.step(req), []

    @property
    def error(self):
        return self.agent.error

    def tracking_bound(self) -> float:
        return diameter(self.agent.base_set)


class _IdealRunner:
    def __init__(self, cfg: IdealResource):
        self.id = cfg.id
        self.initial = cfg.initial
        self.room_ids: list[str] = []
        from .diffusion import ErrorState

        self.error = ErrorState()

    def y0(self) -> Setpoint:
        return self.initial

    def advertised(self, k: int):
        return None

    def step(self, k: int, req: Setpoint, diffuse: bool) -> tuple[Setpoint, list[float]]:
        self.error = self.error.update(req, req)
        return req, []

    def tracking_bound(self) -> float:
        return 0.0


def _build_runner(res, cfg: ScenarioConfig):
    if isinstance(res, HeaterResource):
        r = _HeaterRunner(res)
        r.dt = cfg.dt
        return r
    if isinstance(res, MultiHeaterResource):
        r = _MultiHeaterRunner(res)
        r.dt = cfg.dt
        return r
    if isinstance(res, PvResource):
        return _PvRunner(res, cfg.irradiance, cfg.dt)
    if isinstance(res, DelayedResource):
        return _DelayedRunner(res)
    if isinstance(res, IdealResource):
        return _IdealRunner(res)
    raise SimulationError(0, res.id, f"unknown resource config {type(res).__name__}")


@dataclass
class ScenarioTrace:
    """Per-step record of a closed-loop run.

    ``req``/``imp``/``err`` have shape (steps, n_resources, 2) holding
    (P, Q); ``running_mean`` is the cumulative mean of the implemented
    vector (2n); ``temps`` has one column per room in ``room_ids``.
    """

    resource_ids: list[str]
    room_ids: list[str]
    k: np.ndarray
    req: np.ndarray
    imp: np.ndarray
    err: np.ndarray
    j_values: np.ndarray
    running_mean: np.ndarray
    proj_active: np.ndarray
    temps: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.k)

    def resource_index(self, rid: str) -> int:
        return self.resource_ids.index(rid)

    def column_names(self) -> list[str]:
        names = ["k"]
        for rid in self.resource_ids:
            names += [
                f"{rid}.p_req", f"{rid}.q_req",
                f"{rid}.p_imp", f"{rid}.q_imp",
                f"{rid}.e_p", f"{rid}.e_q",
            ]
        names += ["J", "proj_active"]
        names += [f"{room}.temp" for room in self.room_ids]
        return names


def run_scenario(cfg: ScenarioConfig) -> ScenarioTrace:
    """Run the closed loop for cfg.steps steps; deterministic given the seed."""
    runners = [_build_runner(r, cfg) for r in cfg.resources]
    n = len(runners)
    steps = cfg.steps
    j = cfg.objective
    room_ids = [room for r in runners for room in r.room_ids]
    n_rooms = len(room_ids)

    y = np.zeros(2 * n)
    for i, r in enumerate(runners):
        y0 = r.y0()
        y[2 * i], y[2 * i + 1] = y0.p, y0.q

    k_col = np.arange(1, steps + 1, dtype=int)
    req = np.zeros((steps, n, 2))
    imp = np.zeros((steps, n, 2))
    err = np.zeros((steps, n, 2))
    j_values = np.zeros(steps)
    running_mean = np.zeros((steps, 2 * n))
    proj_active = np.zeros(steps, dtype=bool)
    temps = np.zeros((steps, n_rooms))

    y_sum = np.zeros(2 * n)
    for row in range(steps):
        k = row + 1
        adverts = [r.advertised(k) for r in runners]
        x, active = gradient_step(j, GridAgentConfig(cfg.alpha, adverts), y)
        proj_active[row] = active
        col = 0
        for i, r in enumerate(runners):
            u_req = Setpoint(x[2 * i], x[2 * i + 1])
            try:
                u_imp, room_temps = r.step(k, u_req, cfg.diffusion_enabled)
            except GridTrackError as exc:
                raise SimulationError(k, r.id, exc) from exc
            req[row, i] = (u_req.p, u_req.q)
            imp[row, i] = (u_imp.p, u_imp.q)
            err[row, i] = (r.error.e.p, r.error.e.q)
            y[2 * i], y[2 * i + 1] = u_imp.p, u_imp.q
            for t in room_temps:
                temps[row, col] = t
                col += 1
        j_values[row] = j.value(y)
        y_sum += y
        running_mean[row] = y_sum / k

    return ScenarioTrace(
        [r.id for r in runners], room_ids, k_col, req, imp, err,
        j_values, running_mean, proj_active, temps,
    )


def theoretical_bounds(cfg: ScenarioConfig) -> dict[str, float]:
    """Per-resource accumulated-error bounds implied by each agent design."""
    runners = [_build_runner(r, cfg) for r in cfg.resources]
    return {r.id: r.tracking_bound() for r in runners}


def _fmt(x: float) -> str:
    if x == 0.0:
        return "0"
    return format(float(x), ".9g")


def emit_csv(trace: ScenarioTrace, path: str | Path) -> None:
    """Write the trace; floats carry 9 significant digits, output is byte-stable."""
    path = Path(path)
    lines = [",".join(trace.column_names())]
    for row in range(trace.steps):
        parts = [str(int(trace.k[row]))]
        for i in range(len(trace.resource_ids)):
            parts += [
                _fmt(trace.req[row, i, 0]), _fmt(trace.req[row, i, 1]),
                _fmt(trace.imp[row, i, 0]), _fmt(trace.imp[row, i, 1]),
                _fmt(trace.err[row, i, 0]), _fmt(trace.err[row, i, 1]),
            ]
        parts.append(_fmt(trace.j_values[row]))
        parts.append(str(int(trace.proj_active[row])))
        for c in range(len(trace.room_ids)):
            parts.append(_fmt(trace.temps[row, c]))
        lines.append(",".join(parts))
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines))
            fh.write("\n")
    except OSError as exc:
        raise GridTrackError(f"cannot write trace to {path}: {exc}") from exc


def read_trace_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Parse an emitted trace back into named columns (floats)."""
    path = Path(path)
    try:
        with open(path, "r") as fh:
            header = fh.readline().strip().split(",")
            rows = [line.strip().split(",") for line in fh if line.strip()]
    except OSError as exc:
        raise GridTrackError(f"cannot read trace from {path}: {exc}") from exc
    data = np.array([[float(v) for v in row] for row in rows])
    if data.size == 0:
        data = data.reshape(0, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}
