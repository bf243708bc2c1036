"""Closed-form plane-wave audit: calibration constants and per-equation
residuals for plane waves in constant potentials. Everything here is exact
real arithmetic with no grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularCoefficientError
from .units import UnitSystem

#: Guard width for vanishing denominators, relative to the energy scale.
_DENOM_EPS = 1e-300


@dataclass(frozen=True)
class PlaneWaveState:
    """A plane wave exp(i(p x - eps t)/hbar) in a constant potential V."""

    p: float
    epsilon: float
    E: float
    V: float = 0.0

    @classmethod
    def free_nonrelativistic(cls, p: float, units: UnitSystem) -> "PlaneWaveState":
        eps = p**2 / (2.0 * units.m)
        return cls(p=p, epsilon=eps, E=eps, V=0.0)

    @classmethod
    def free_relativistic(cls, p: float, units: UnitSystem) -> "PlaneWaveState":
        eps = float(np.sqrt((units.c * p) ** 2 + units.E0**2))
        return cls(p=p, epsilon=eps, E=eps, V=0.0)


def _checked_denominator(value: float, what: str) -> float:
    if abs(value) < _DENOM_EPS:
        raise SingularCoefficientError(f"singular denominator: {what} vanishes")
    return value


# -- calibration constants -------------------------------------------------

def constant_A(units: UnitSystem) -> float:
    """Stationary non-relativistic calibration constant 4/hbar^2."""
    return 4.0 / units.hbar**2


def constant_A_prime(epsilon: float) -> float:
    """Time-dependent non-relativistic calibration constant -4/eps^2."""
    if epsilon == 0.0:
        raise DomainError("constant_A_prime requires epsilon != 0")
    return -4.0 / epsilon**2


def constant_B(E: float, units: UnitSystem) -> float:
    """Free relativistic stationary constant (E^2 - E0^2)/(E0^2 hbar^2 c^2)."""
    return (E**2 - units.E0**2) / (units.E0**2 * units.hbar**2 * units.c**2)


def constant_D(epsilon: float, units: UnitSystem) -> float:
    """Potential-field relativistic stationary constant; same form as B
    with the free energy eps = E - V in place of E."""
    return constant_B(epsilon, units)


def constant_B_prime(p: float, units: UnitSystem) -> float:
    """Free relativistic time-dependent constant -p^2/(E0^2 (E0^2 + c^2 p^2))."""
    return -(p**2) / (units.E0**2 * (units.E0**2 + (units.c * p) ** 2))


def constant_D_prime(p: float, units: UnitSystem) -> float:
    """Potential-field relativistic time-dependent constant; equals B'."""
    return constant_B_prime(p, units)


# -- calibration closures: residuals of the defining substitutions ---------

def calibration_closure_nr_stationary(p: float, units: UnitSystem) -> float:
    """Plane-wave substitution residual fixing A, relative to the
    (p/hbar)^2 scale so the value is unit-independent."""
    eps = p**2 / (2.0 * units.m)
    scale = (p / units.hbar) ** 2
    return (-scale + constant_A(units) * eps * units.m / 2.0) / scale


def calibration_closure_nr_timedep(p: float, units: UnitSystem) -> float:
    """Plane-wave substitution residual fixing A'."""
    eps = p**2 / (2.0 * units.m)
    scale = (p / units.hbar) ** 2
    return (-scale + constant_A_prime(eps) * (eps * units.m / 2.0)
            * (-(eps / units.hbar) ** 2)) / scale


def calibration_closure_rel_stationary(p: float, units: UnitSystem) -> float:
    """Plane-wave substitution residual fixing B."""
    E = np.sqrt((units.c * p) ** 2 + units.E0**2)
    scale = (p / units.hbar) ** 2
    return (-scale + constant_B(E, units) * units.E0**2) / scale


def calibration_closure_rel_timedep(p: float, units: UnitSystem) -> float:
    """Plane-wave substitution residual fixing B'."""
    E = np.sqrt((units.c * p) ** 2 + units.E0**2)
    scale = (p / units.hbar) ** 2
    return (-scale + constant_B_prime(p, units) * units.E0**2
            * (-(E / units.hbar) ** 2)) / scale


def calibration_closure_pot_stationary(p: float, units: UnitSystem) -> float:
    """Plane-wave substitution residual fixing D (free limit, eps = E)."""
    eps = np.sqrt((units.c * p) ** 2 + units.E0**2)
    scale = (p / units.hbar) ** 2
    return (-scale + constant_D(eps, units) * units.E0**2) / scale


def calibration_closure_pot_timedep(p: float, units: UnitSystem) -> float:
    """Plane-wave substitution residual fixing D'."""
    eps = np.sqrt((units.c * p) ** 2 + units.E0**2)
    scale = (p / units.hbar) ** 2
    return (-scale + constant_D_prime(p, units) * units.E0**2
            * (-(eps / units.hbar) ** 2)) / scale


# -- per-equation residuals -----------------------------------------------

def residual_nr_stationary(state: PlaneWaveState, units: UnitSystem) -> float:
    """p^2/2m - (E - 2V)^2/(E - V); zero iff the plane wave solves the
    stationary modified non-relativistic equation at constant V."""
    denom = _checked_denominator(state.E - state.V, "E - V")
    return state.p**2 / (2.0 * units.m) - (state.E - 2.0 * state.V) ** 2 / denom


def residual_nr_timedep(state: PlaneWaveState, units: UnitSystem) -> float:
    """Residual of the time-dependent modified equation on the plane wave."""
    denom = _checked_denominator(state.E - state.V, "E - V")
    eps, hbar = state.epsilon, units.hbar
    return (-(eps**2) * state.p**2 / (2.0 * units.m * hbar**2)
            + (state.E - 2.0 * state.V) ** 2 / denom * eps**2 / hbar**2)


def residual_rel_stationary(state: PlaneWaveState, units: UnitSystem) -> float:
    """c^2 p^2 - [(E - V)^2 - E0^2] (1 + V/E0)^2."""
    E0 = units.E0
    if state.V <= -E0:
        raise SingularCoefficientError("requires V > -E0")
    return ((units.c * state.p) ** 2
            - ((state.E - state.V) ** 2 - E0**2) * (1.0 + state.V / E0) ** 2)


def residual_rel_timedep(state: PlaneWaveState, units: UnitSystem) -> float:
    """(E (1 + V/E0))^2 - (c^2 p^2 + E0^2); Klein-Gordon residual at V=0."""
    E0 = units.E0
    if state.V <= -E0:
        raise SingularCoefficientError("requires V > -E0")
    return (state.E * (1.0 + state.V / E0)) ** 2 - ((units.c * state.p) ** 2 + E0**2)


def residual_spin_half(state: PlaneWaveState, units: UnitSystem,
                       branch: int = +1) -> float:
    """E - (+-sqrt(c^2 p^2 + E0^2)) E0/(E0 + V) for the spin-1/2 equation."""
    E0 = units.E0
    if state.V == -E0:
        raise SingularCoefficientError("requires V != -E0")
    if branch not in (+1, -1):
        raise DomainError("branch must be +1 or -1")
    root = branch * np.sqrt((units.c * state.p) ** 2 + E0**2)
    return state.E - root * E0 / (E0 + state.V)


def residual_massless(state: PlaneWaveState, units: UnitSystem,
                      branch: int = +1) -> float:
    """E - (+-c p) E0/(E0 + V) for the massless spin-1/2 equation."""
    E0 = units.E0
    if state.V == -E0:
        raise SingularCoefficientError("requires V != -E0")
    if branch not in (+1, -1):
        raise DomainError("branch must be +1 or -1")
    return state.E - branch * units.c * state.p * E0 / (E0 + state.V)
