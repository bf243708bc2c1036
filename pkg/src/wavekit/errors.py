"""Exception hierarchy shared by all wavekit modules.

Solver failures carry enough structure (singular sets, iterate histories,
offending regions) for the CLI to emit machine-readable error objects and
map each failure class onto its exit code.
"""

from __future__ import annotations


class WavekitError(Exception):
    """Base class for all wavekit errors."""


class ConfigurationError(WavekitError):
    """Invalid configuration: bad grid, unknown option, malformed scenario.

    ``failures`` aggregates every validation message, not just the first.
    """

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = list(failures) if failures is not None else [message]


class UsageError(WavekitError):
    """API misuse: mismatched grids, non-normalized input and the like."""


class DomainError(WavekitError):
    """Function evaluated outside its mathematical domain."""


class SingularRegionError(WavekitError):
    """The energy-dependent denominator vanishes inside the domain."""

    def __init__(self, message, singular_set):
        super().__init__(message)
        self.singular_set = singular_set


class SingularCoefficientError(WavekitError):
    """A pointwise coefficient of the evolution equation is singular."""


class NonHyperbolicRegimeError(WavekitError):
    """The squared wave speed is non-positive somewhere on the grid."""

    def __init__(self, message, offending_positions):
        super().__init__(message)
        self.offending_positions = offending_positions


class NonConvergenceError(WavekitError):
    """Iterative solver hit its iteration cap; ``history`` holds iterates."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


class StateTrackingError(WavekitError):
    """Node-count tracking could not identify the requested state."""


class NoRootError(WavekitError):
    """A root bracket contained no sign change."""


class StabilityError(WavekitError):
    """Explicit time stepping became unstable (norm blow-up)."""


class InvalidScenarioError(WavekitError):
    """Scenario violates a structural precondition (e.g. V <= -E0)."""


class OutOfScopeError(WavekitError):
    """Requested feature is deliberately not implemented."""
