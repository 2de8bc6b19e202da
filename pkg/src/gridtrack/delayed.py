"""Resource with a fixed implementation delay over a constant convex set.

A differing request starts a transition: the implemented setpoint holds its
old value for ``tau`` steps and jumps to the requested target exactly
``tau`` steps after the request. While the transition is pending the agent
advertises the singleton {held value}, which pins the controller's requests
and stops error from accruing; the advertisement reopens to the full set on
the completion step. Each completed transition telescopes the accumulated
error down to (first held value - last target), so ||e|| never exceeds the
diameter of the base set.
"""

from __future__ import annotations

from .diffusion import ErrorState
from .errors import AgentContractError, GeometryError
from .geometry import POINT_TOL, ConvexPolygon, Setpoint


class DelayedAgent:
    """Delay-tau agent over a fixed convex base set."""

    def __init__(self, base_set: ConvexPolygon, tau: int, initial: Setpoint):
        if tau < 1:
            raise GeometryError("delay must be at least one step")
        if not base_set.contains(initial):
            raise AgentContractError(f"initial setpoint {initial} outside the base set")
        self.base_set = base_set
        self.tau = int(tau)
        self.current = Setpoint(float(initial[0]), float(initial[1]))
        self.pending: tuple[Setpoint, int] | None = None  # (target, steps until completion)
        self.error = ErrorState()

    def advertised(self) -> ConvexPolygon:
        """Profile governing the next incoming request.

        Singleton {current} while a transition is pending and not yet
        completing; the base set otherwise (including the completion step).
        """
        if self.pending is not None and self.pending[1] >= 2:
            return ConvexPolygon([self.current])
        return self.base_set

    def step(self, u_req: Setpoint) -> Setpoint:
        profile = self.advertised()
        if not profile.contains(u_req, POINT_TOL):
            raise AgentContractError(
                f"request {tuple(u_req)} outside the advertised profile"
            )
        u_req = Setpoint(float(u_req[0]), float(u_req[1]))
        if self.pending is None:
            # exact comparison: any differing request starts a transition
            if u_req.p == self.current.p and u_req.q == self.current.q:
                u_imp = self.current
            else:
                self.pending = (u_req, self.tau)
                u_imp = self.current
        else:
            target, steps_left = self.pending
            if steps_left > 1:
                self.pending = (target, steps_left - 1)
                u_imp = self.current
            else:
                # completion step: the old target lands regardless of the request
                u_imp = target
                self.current = target
                self.pending = None
                if not (u_req.p == target.p and u_req.q == target.q):
                    self.pending = (u_req, self.tau)
        self.error = self.error.update(u_req, u_imp)
        return u_imp
