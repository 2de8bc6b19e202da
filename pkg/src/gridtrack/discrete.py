"""Resource agents over finite real-power codebooks, including on/off heaters.

A discrete agent advertises the convex hull of its current codebook and
implements the codebook value nearest to ``request - accumulated error``.
That single rule keeps the accumulated error within half the largest
codebook gap, and — with ties broken toward the request — implements any
directly implementable request exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .diffusion import ErrorState
from .errors import AgentContractError, GeometryError
from .geometry import POINT_TOL, FiniteSet1D, Setpoint, project_finite

# Tolerance for matching a subset sum against a codebook value. Sums of a few
# watt-scale terms computed in different orders agree far tighter than this.
SUBSET_SUM_TOL = 1e-6


@dataclass(frozen=True)
class ComfortBand:
    """Allowed room-temperature range [t_min, t_max] in deg C."""

    t_min: float
    t_max: float

    def __post_init__(self):
        if not (self.t_min <= self.t_max):
            raise GeometryError("comfort band requires t_min <= t_max")


@dataclass(frozen=True)
class HeaterState:
    """On/off heater with a post-switch lockout.

    ``lock_remaining > 0`` forbids switching this step. ``p_heat`` is the
    consumption magnitude in W (the implemented setpoint is ``-p_heat`` when
    on, by the consumption-is-negative convention).
    """

    on: bool
    lock_remaining: int
    p_heat: float
    temperature: float

    def __post_init__(self):
        if not (math.isfinite(self.p_heat) and self.p_heat > 0):
            raise GeometryError("heater power must be finite and positive")
        if self.lock_remaining < 0:
            raise GeometryError("lock_remaining must be >= 0")

    @property
    def locked(self) -> bool:
        return self.lock_remaining > 0


def heater_implementable(h: HeaterState, band: ComfortBand) -> FiniteSet1D:
    """Implementable real-power values for one heater.

    Unlocked and too hot, or locked off: {0}. Unlocked in band:
    {-p_heat, 0}. Unlocked and too cold, or locked on: {-p_heat}.
    """
    if h.locked:
        return FiniteSet1D([-h.p_heat] if h.on else [0.0])
    if h.temperature > band.t_max:
        return FiniteSet1D([0.0])
    if h.temperature < band.t_min:
        return FiniteSet1D([-h.p_heat])
    return FiniteSet1D([-h.p_heat, 0.0])


def heater_transition(h: HeaterState, turn_on: bool, lock_steps: int) -> HeaterState:
    """Apply a switch decision; a state change engages the lock for ``lock_steps``."""
    if h.locked and turn_on != h.on:
        raise AgentContractError("cannot switch a locked heater")
    if turn_on != h.on:
        return replace(h, on=turn_on, lock_remaining=lock_steps)
    return replace(h, lock_remaining=max(0, h.lock_remaining - 1))


def _partition(heaters: Sequence[HeaterState], band: ComfortBand):
    """Indices of (locked, free-too-cold, free-in-band) heaters; free-too-hot is the rest."""
    locked, cold, free = [], [], []
    for i, h in enumerate(heaters):
        if h.locked:
            locked.append(i)
        elif h.temperature < band.t_min:
            cold.append(i)
        elif h.temperature <= band.t_max:
            free.append(i)
    return locked, cold, free


def multi_heater_implementable(heaters: Sequence[HeaterState], band: ComfortBand) -> FiniteSet1D:
    """Implementable aggregate real-power values for a bank of heaters.

    Locked heaters and free-but-too-cold heaters contribute a fixed offset;
    every subset of the free in-band heaters may be switched on on top of it.
    """
    if not heaters:
        raise GeometryError("heater bank must be non-empty")
    locked, cold, free = _partition(heaters, band)
    base = -sum(heaters[i].p_heat for i in locked if heaters[i].on)
    base -= sum(heaters[i].p_heat for i in cold)
    sums = [base]
    for i in free:
        p = heaters[i].p_heat
        sums.extend(s - p for s in list(sums))
    return FiniteSet1D(sums)


def select_heater_subset(
    target: float, heaters: Sequence[HeaterState], band: ComfortBand
) -> tuple[int, ...]:
    """Choose which free in-band heaters realize ``target`` aggregate power.

    Returns indices of the heaters to switch on among the free in-band ones
    (forced heaters are excluded; the caller keeps them at their forced
    state). Among valid subsets the coldest rooms are preferred greedily,
    with the heater index as a deterministic tie-break.
    """
    locked, cold, free = _partition(heaters, band)
    base = -sum(heaters[i].p_heat for i in locked if heaters[i].on)
    base -= sum(heaters[i].p_heat for i in cold)
    needed = base - target  # total extra consumption to switch on (>= 0)
    order = sorted(free, key=lambda i: (heaters[i].temperature, i))

    chosen: list[int] = []

    def search(pos: int, remaining: float) -> bool:
        if abs(remaining) <= SUBSET_SUM_TOL:
            return True
        if remaining < -SUBSET_SUM_TOL or pos == len(order):
            return False
        if sum(heaters[i].p_heat for i in order[pos:]) < remaining - SUBSET_SUM_TOL:
            return False
        i = order[pos]
        chosen.append(i)
        if search(pos + 1, remaining - heaters[i].p_heat):
            return True
        chosen.pop()
        return search(pos + 1, remaining)

    if not search(0, needed):
        raise AgentContractError(
            f"target {target:g} W not achievable with the current heater bank"
        )
    return tuple(sorted(chosen))


def discrete_step(
    error: ErrorState,
    codebook: FiniteSet1D,
    p_req: float,
    tie_toward_request: bool = True,
    diffuse: bool = True,
) -> tuple[float, ErrorState]:
    """One codebook step: check the request, project, update the error state.

    ``diffuse=False`` is the naive baseline (plain nearest-value projection
    with no error feedback); the error state still records what happened.
    """
    if not math.isfinite(p_req):
        raise AgentContractError(f"non-finite request {p_req}")
    if p_req < codebook.lo - POINT_TOL or p_req > codebook.hi + POINT_TOL:
        raise AgentContractError(
            f"request {p_req:g} W not in advertised profile "
            f"[{codebook.lo:g}, {codebook.hi:g}]"
        )
    x = p_req - error.e.p if diffuse else p_req
    p_imp = project_finite(codebook, x, tie_toward=p_req if tie_toward_request else None)
    return p_imp, error._advance(p_req, 0.0, p_imp, 0.0)


class DiscreteAgent:
    """Error-diffusion agent over a per-step sequence of finite codebooks.

    ``codebooks`` may be a single FiniteSet1D (constant), a sequence indexed
    by step (1-based step k uses entry k-1), or a callable ``k -> FiniteSet1D``.
    """

    def __init__(self, codebooks, tie_toward_request: bool = True):
        if isinstance(codebooks, FiniteSet1D):
            provider: Callable[[int], FiniteSet1D] = lambda k: codebooks
        elif callable(codebooks):
            provider = codebooks
        else:
            seq = list(codebooks)
            provider = lambda k: seq[k - 1]
        self._provider = provider
        self.tie_toward_request = tie_toward_request
        self.error = ErrorState()
        self.k = 0

    def current_codebook(self) -> FiniteSet1D:
        return self._provider(self.k + 1)

    def advertised(self) -> tuple[float, float]:
        """Hull [lo, hi] of the codebook for the upcoming step."""
        s = self.current_codebook()
        return (s.lo, s.hi)

    def step(self, p_req: float, diffuse: bool = True) -> float:
        codebook = self._provider(self.k + 1)
        p_imp, self.error = discrete_step(
            self.error, codebook, p_req, self.tie_toward_request, diffuse
        )
        self.k += 1
        return p_imp


class HeaterAgent:
    """Single on/off heater with comfort band, lockout, and error diffusion."""

    def __init__(
        self,
        p_heat: float,
        band: ComfortBand,
        lock_steps: int = 10,
        t_init: float = 21.0,
        initially_on: bool = False,
        tie_toward_request: bool = True,
    ):
        self.state = HeaterState(initially_on, 0, p_heat, t_init)
        self.band = band
        self.lock_steps = int(lock_steps)
        self.tie_toward_request = tie_toward_request
        self.error = ErrorState()

    @property
    def implemented_power(self) -> float:
        return -self.state.p_heat if self.state.on else 0.0

    def implementable(self, temperature: float | None = None) -> FiniteSet1D:
        st = self.state if temperature is None else replace(self.state, temperature=temperature)
        return heater_implementable(st, self.band)

    def step(self, p_req: float, temperature: float | None = None, diffuse: bool = True) -> float:
        if temperature is not None:
            self.state = replace(self.state, temperature=temperature)
        codebook = heater_implementable(self.state, self.band)
        p_imp, self.error = discrete_step(
            self.error, codebook, p_req, self.tie_toward_request, diffuse
        )
        turn_on = p_imp < -0.5 * self.state.p_heat
        self.state = heater_transition(self.state, turn_on, self.lock_steps)
        return p_imp


class MultiHeaterAgent:
    """Bank of heaters steered as one aggregate setpoint.

    Each heater sits in its own room; the subset-sum codebook is rebuilt
    every step from lock and temperature states.
    """

    def __init__(
        self,
        states: Sequence[HeaterState],
        band: ComfortBand,
        lock_steps: int = 10,
        tie_toward_request: bool = True,
    ):
        if not states:
            raise GeometryError("heater bank must be non-empty")
        self.states = list(states)
        self.band = band
        self.lock_steps = int(lock_steps)
        self.tie_toward_request = tie_toward_request
        self.error = ErrorState()

    @property
    def implemented_power(self) -> float:
        return -sum(h.p_heat for h in self.states if h.on)

    def implementable(self, temperatures: Sequence[float] | None = None) -> FiniteSet1D:
        states = self._with_temps(temperatures)
        return multi_heater_implementable(states, self.band)

    def _with_temps(self, temperatures: Sequence[float] | None) -> list[HeaterState]:
        if temperatures is None:
            return self.states
        if len(temperatures) != len(self.states):
            raise AgentContractError("one temperature per heater required")
        return [replace(h, temperature=t) for h, t in zip(self.states, temperatures)]

    def step(
        self,
        p_req: float,
        temperatures: Sequence[float] | None = None,
        diffuse: bool = True,
    ) -> float:
        self.states = self._with_temps(temperatures)
        codebook = multi_heater_implementable(self.states, self.band)
        p_imp, self.error = discrete_step(
            self.error, codebook, p_req, self.tie_toward_request, diffuse
        )
        chosen = set(select_heater_subset(p_imp, self.states, self.band))
        _, cold, free = _partition(self.states, self.band)
        new_states = []
        for i, h in enumerate(self.states):
            if h.locked:
                turn_on = h.on
            elif i in cold:
                turn_on = True
            elif i in free:
                turn_on = i in chosen
            else:  # free and too hot
                turn_on = False
            new_states.append(heater_transition(h, turn_on, self.lock_steps))
        self.states = new_states
        return p_imp
