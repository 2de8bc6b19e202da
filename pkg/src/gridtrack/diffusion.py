"""Accumulated-error state and the error-diffusion step shared by all agents.

The accumulated error after k steps is e_k = sum_{i<=k} (imp_i - req_i).
Feeding it back — implementing the projection of ``request - e`` instead of
the request itself — is what keeps e bounded for every agent in this package.
"""

from __future__ import annotations

import math
from typing import Callable, Protocol

from .errors import DomainViolation
from .geometry import ORIGIN, ConvexPolygon, Setpoint


class _Log:
    """Append-only per-step storage shared between successive ErrorState values."""

    __slots__ = ("req_p", "req_q", "imp_p", "imp_q", "e_p", "e_q")

    def __init__(self):
        self.req_p: list[float] = []
        self.req_q: list[float] = []
        self.imp_p: list[float] = []
        self.imp_q: list[float] = []
        self.e_p: list[float] = []
        self.e_q: list[float] = []

    def __len__(self) -> int:
        return len(self.req_p)

    def copy_prefix(self, k: int) -> "_Log":
        out = _Log()
        out.req_p = self.req_p[:k]
        out.req_q = self.req_q[:k]
        out.imp_p = self.imp_p[:k]
        out.imp_q = self.imp_q[:k]
        out.e_p = self.e_p[:k]
        out.e_q = self.e_q[:k]
        return out


class ErrorState:
    """Accumulated error plus the full request/implementation history.

    Behaves as a value: ``update`` returns a new state. Successive states
    share one append-only log, so updates are O(1); forking from a non-tip
    state copies the prefix. The running sum is maintained left-to-right
    with no compensation, so replaying the history reproduces ``e``
    bit-for-bit.
    """

    __slots__ = ("e", "k", "_log")

    def __init__(self, e: Setpoint = ORIGIN, k: int = 0, _log: _Log | None = None):
        self.e = e
        self.k = k
        self._log = _log if _log is not None else _Log()

    def update(self, u_req: Setpoint, u_imp: Setpoint) -> "ErrorState":
        """New state with the step appended and e advanced by (imp - req)."""
        rp, rq = float(u_req[0]), float(u_req[1])
        ip, iq = float(u_imp[0]), float(u_imp[1])
        if not (math.isfinite(rp) and math.isfinite(rq) and math.isfinite(ip) and math.isfinite(iq)):
            raise ValueError(f"non-finite setpoint in update: req={u_req}, imp={u_imp}")
        return self._advance(rp, rq, ip, iq)

    def _advance(self, rp: float, rq: float, ip: float, iq: float) -> "ErrorState":
        log = self._log
        if len(log) != self.k:
            log = log.copy_prefix(self.k)
        ep = self.e.p + (ip - rp)
        eq = self.e.q + (iq - rq)
        log.req_p.append(rp)
        log.req_q.append(rq)
        log.imp_p.append(ip)
        log.imp_q.append(iq)
        log.e_p.append(ep)
        log.e_q.append(eq)
        return ErrorState(Setpoint(ep, eq), self.k + 1, log)

    @property
    def history_req(self) -> tuple[Setpoint, ...]:
        lg = self._log
        return tuple(Setpoint(lg.req_p[i], lg.req_q[i]) for i in range(self.k))

    @property
    def history_imp(self) -> tuple[Setpoint, ...]:
        lg = self._log
        return tuple(Setpoint(lg.imp_p[i], lg.imp_q[i]) for i in range(self.k))

    @property
    def history_e(self) -> tuple[Setpoint, ...]:
        """e_1 .. e_k as recorded step by step."""
        lg = self._log
        return tuple(Setpoint(lg.e_p[i], lg.e_q[i]) for i in range(self.k))

    def columns(self) -> tuple[list[float], ...]:
        """Raw history columns (req_p, req_q, imp_p, imp_q, e_p, e_q) up to k."""
        lg = self._log
        if len(lg) == self.k:
            return (lg.req_p, lg.req_q, lg.imp_p, lg.imp_q, lg.e_p, lg.e_q)
        return (
            lg.req_p[: self.k], lg.req_q[: self.k],
            lg.imp_p[: self.k], lg.imp_q[: self.k],
            lg.e_p[: self.k], lg.e_q[: self.k],
        )

    def __repr__(self) -> str:
        return f"ErrorState(e=({self.e.p:g}, {self.e.q:g}), k={self.k})"


class SetLike(Protocol):
    def contains(self, pt, tol: float = ...) -> bool: ...


def diffuse_step(
    state: ErrorState,
    u_req: Setpoint,
    f: Callable[[Setpoint], Setpoint],
    domain: SetLike | None = None,
) -> tuple[Setpoint, ErrorState]:
    """One error-diffusion step: implement f(request - e) and update the state.

    The caller must guarantee that the compensated point lies in f's domain;
    when ``domain`` is supplied this is checked and a violation raises
    :class:`DomainViolation` carrying (request, e) — it means the
    advertise/implement contract is broken, not that the input is merely odd.
    """
    x = Setpoint(u_req[0] - state.e.p, u_req[1] - state.e.q)
    if domain is not None and not domain.contains(x):
        raise DomainViolation(u_req, state.e)
    u_imp = f(x)
    return u_imp, state.update(u_req, Setpoint(float(u_imp[0]), float(u_imp[1])))


def windowed_tracking_error(state: ErrorState, m: int) -> float:
    """Norm of (mean implemented - mean requested) over the last m+1 steps.

    Equals ||e_k - e_{k-m-1}|| / (m+1); a c-bounded agent therefore satisfies
    2c/(m+1) for any window and c/(m+1) for the full window m = k-1.
    """
    if not (0 <= m <= state.k - 1):
        raise ValueError(f"window size m={m} out of range for k={state.k}")
    n = m + 1
    rp, rq, ip, iq, _, _ = state.columns()
    lo = state.k - n
    dp = (sum(ip[lo : state.k]) - sum(rp[lo : state.k])) / n
    dq = (sum(iq[lo : state.k]) - sum(rq[lo : state.k])) / n
    return math.hypot(dp, dq)


def check_contained(state: ErrorState, g: ConvexPolygon, tol: float = 1e-9) -> bool:
    """True iff every historical accumulated error e_i (i >= 1) lies in ``g``."""
    _, _, _, _, ep, eq = state.columns()
    return all(g.contains((ep[i], eq[i]), tol) for i in range(state.k))
