"""Unit systems: hbar, mass, light speed and the derived rest energy."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigurationError


@dataclass(frozen=True)
class UnitSystem:
    """Fundamental constants of a scenario.

    ``E0 = m * c**2`` is derived, never stored, so the relativistic
    invariant cannot be violated by construction.
    """

    hbar: float = 1.0
    m: float = 1.0
    c: float = 1.0
    e: float = 1.0
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("hbar", "m", "c"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"unit constant {name!r} must be > 0")

    @property
    def E0(self) -> float:
        """Rest energy m*c**2."""
        return self.m * self.c**2


#: Speed of light in atomic-like units, used as the relativistic default.
ATOMIC_C = 137.035999
