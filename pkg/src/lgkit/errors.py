"""Exception hierarchy shared by all lgkit modules."""


class LGKitError(Exception):
    """Base class for lgkit errors."""


class ValidationError(LGKitError, ValueError):
    """An input violates a documented precondition."""


class EmptyBranchError(LGKitError):
    """A post-measurement state was requested for a (near) zero-probability outcome."""

    def __init__(self, outcome, probability):
        super().__init__(
            f"outcome {outcome:+d} has probability {probability:.3e}; post-state undefined"
        )
        self.outcome = outcome
        self.probability = probability


class SteadyStateError(LGKitError):
    """The Liouvillian has no unique steady state."""

    def __init__(self, nullity):
        super().__init__(f"steady state not unique: null space has dimension {nullity}")
        self.nullity = nullity


class ConvergenceError(LGKitError):
    """A numerical optimisation failed to converge within its budget."""
