"""Exception types shared across the library."""


class GridTrackError(Exception):
    """Base class for all library errors."""


class GeometryError(GridTrackError):
    """Invalid geometric input (empty point set, degenerate polygon, bad index)."""


class ConfigError(GridTrackError):
    """Invalid scenario configuration or malformed input file."""


class AgentContractError(GridTrackError):
    """A request violated an agent's advertised profile or a state invariant."""


class DomainViolation(GridTrackError):
    """The error-compensated point left the approximation map's declared domain.

    Signals a broken advertise/implement contract; carries the offending
    request and the accumulated error at the time of the violation.
    """

    def __init__(self, u_req, e):
        self.u_req = u_req
        self.e = e
        super().__init__(
            f"compensated point outside map domain: request={u_req}, accumulated error={e}"
        )


class SpectralConditionError(GridTrackError):
    """Step size violates the spectral contraction condition."""


class PtiError(GridTrackError):
    """Projection-translation-invariance precondition or construction failure."""


class PtiVerificationError(PtiError):
    """A constructed superset failed randomized invariance verification."""

    def __init__(self, witness, message="constructed superset failed invariance verification"):
        self.witness = witness
        super().__init__(f"{message}: witness (u, v) = {witness}")


class SimulationError(GridTrackError):
    """A contract violation inside the closed-loop simulator, tagged with step and resource."""

    def __init__(self, step, resource, cause):
        self.step = step
        self.resource = resource
        super().__init__(f"step {step}, resource {resource!r}: {cause}")
