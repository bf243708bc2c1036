"""Potential catalog and analysis of the singular sets E = V, E = 2V,
V = -E0 that the modified equations introduce through their denominators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, UsageError
from .numgrid import Grid, RADIAL

FREE = "free"
SQUARE_WELL = "square_well"
STEP = "step"
BARRIER = "barrier"
HARMONIC = "harmonic"
COULOMB = "coulomb"
PIECEWISE_CONSTANT = "piecewise_constant"
TABULATED = "tabulated"

VARIANTS = (FREE, SQUARE_WELL, STEP, BARRIER, HARMONIC, COULOMB,
            PIECEWISE_CONSTANT, TABULATED)

E_EQUALS_V = "E_equals_V"
E_EQUALS_2V = "E_equals_2V"
V_EQUALS_MINUS_E0 = "V_equals_minus_E0"

SINGULARITY_KINDS = (E_EQUALS_V, E_EQUALS_2V, V_EQUALS_MINUS_E0)


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """Declarative description of a potential V(x).

    Only the fields relevant to ``variant`` are meaningful; the factory
    classmethods are the intended constructors.
    """

    variant: str
    center: float = 0.0
    depth: float = 0.0          # square_well
    half_width: float = 0.0     # square_well
    height: float = 0.0         # step, barrier
    edge: float = 0.0           # step
    left: float = 0.0           # barrier
    right: float = 0.0          # barrier
    omega: float = 0.0          # harmonic
    mass: float = 1.0           # harmonic
    strength: float = 0.0       # coulomb
    breakpoints: tuple = ()     # piecewise_constant
    values: tuple = ()          # piecewise_constant
    sample_x: tuple = ()        # tabulated
    sample_v: tuple = ()        # tabulated

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown potential variant {self.variant!r}")
        if self.variant == SQUARE_WELL and (self.depth <= 0 or self.half_width <= 0):
            raise ConfigurationError("square_well needs depth > 0 and half_width > 0")
        if self.variant == PIECEWISE_CONSTANT and len(self.values) != len(self.breakpoints) + 1:
            raise ConfigurationError(
                "piecewise_constant needs len(values) == len(breakpoints) + 1")
        if self.variant == TABULATED and len(self.sample_x) != len(self.sample_v):
            raise ConfigurationError("tabulated needs matching sample arrays")

    # -- factories ---------------------------------------------------------
    @classmethod
    def free(cls):
        return cls(FREE)

    @classmethod
    def square_well(cls, depth, half_width, center=0.0):
        return cls(SQUARE_WELL, center=center, depth=depth, half_width=half_width)

    @classmethod
    def step(cls, height, edge):
        return cls(STEP, height=height, edge=edge)

    @classmethod
    def barrier(cls, height, left, right):
        return cls(BARRIER, height=height, left=left, right=right)

    @classmethod
    def harmonic(cls, omega, mass=1.0, center=0.0):
        return cls(HARMONIC, center=center, omega=omega, mass=mass)

    @classmethod
    def coulomb(cls, strength):
        return cls(COULOMB, strength=strength)

    @classmethod
    def piecewise_constant(cls, breakpoints, values):
        return cls(PIECEWISE_CONSTANT, breakpoints=tuple(breakpoints),
                   values=tuple(values))

    @classmethod
    def tabulated(cls, sample_x, sample_v):
        return cls(TABULATED, sample_x=tuple(sample_x), sample_v=tuple(sample_v))

    @property
    def is_piecewise_constant(self) -> bool:
        return self.variant in (FREE, SQUARE_WELL, STEP, BARRIER, PIECEWISE_CONSTANT)


def evaluate(spec: PotentialSpec, x):
    """V(x); accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    v = spec.variant
    if v == FREE:
        out = np.zeros_like(x)
    elif v == SQUARE_WELL:
        out = np.where(np.abs(x - spec.center) <= spec.half_width, -spec.depth, 0.0)
    elif v == STEP:
        out = np.where(x >= spec.edge, spec.height, 0.0)
    elif v == BARRIER:
        out = np.where((x >= spec.left) & (x <= spec.right), spec.height, 0.0)
    elif v == HARMONIC:
        out = 0.5 * spec.mass * spec.omega**2 * (x - spec.center) ** 2
    elif v == COULOMB:
        if np.any(x <= 0.0):
            raise DomainError("coulomb potential requires x > 0")
        out = -spec.strength / x
    elif v == PIECEWISE_CONSTANT:
        idx = np.searchsorted(np.asarray(spec.breakpoints), x, side="right")
        out = np.asarray(spec.values, dtype=float)[idx]
    elif v == TABULATED:
        sx = np.asarray(spec.sample_x)
        if np.any(x < sx[0] - 1e-12) or np.any(x > sx[-1] + 1e-12):
            raise DomainError("tabulated samples do not cover the requested points")
        out = np.interp(x, sx, np.asarray(spec.sample_v))
    else:  # pragma: no cover - guarded in __post_init__
        raise ConfigurationError(f"unknown variant {v!r}")
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SingularSet:
    """Zeros of an energy-denominator condition inside a grid domain."""

    kind: str
    locations: tuple
    proximity: float  # minimal distance from any grid node, inf when empty

    def __post_init__(self):
        if self.kind not in SINGULARITY_KINDS:
            raise UsageError(f"unknown singularity kind {self.kind!r}")

    @property
    def empty(self) -> bool:
        return len(self.locations) == 0


def _condition(spec: PotentialSpec, E: float, kind: str):
    if kind == E_EQUALS_V:
        return lambda x: E - evaluate(spec, x)
    if kind == E_EQUALS_2V:
        return lambda x: E - 2.0 * evaluate(spec, x)
    if kind == V_EQUALS_MINUS_E0:
        # E carries the rest energy E0 here: zeros of V(x) + E0
        return lambda x: evaluate(spec, x) + E
    raise UsageError(f"unknown singularity kind {kind!r}")


def find_singular_set(spec: PotentialSpec, E: float, kind: str, grid: Grid,
                      scan_factor: int = 8, bisect_tol: float = 1e-12) -> SingularSet:
    """All solutions of the singularity condition inside the grid domain.

    Sign-change scanning at ``scan_factor`` times the grid density followed
    by bisection. Jump discontinuities of piecewise potentials produce sign
    changes without zeros; those are filtered by a residual check.
    """
    if not np.isfinite(E):
        raise UsageError("E must be finite")
    f = _condition(spec, E, kind)
    xs = np.linspace(grid.x_min, grid.x_max, scan_factor * grid.n_points)
    fs = np.asarray(f(xs), dtype=float)
    tol_val = 1e-9 * max(1.0, abs(E))
    roots = []
    exact = np.flatnonzero(np.abs(fs) <= 1e-15 * max(1.0, abs(E)))
    for i in exact:
        roots.append(float(xs[i]))
    sign = np.sign(fs)
    changes = np.flatnonzero((sign[:-1] * sign[1:]) < 0)
    for i in changes:
        lo, hi = xs[i], xs[i + 1]
        flo = fs[i]
        while hi - lo > bisect_tol:
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0.0:
                lo = hi = mid
                break
            if flo * fm < 0:
                hi = mid
            else:
                lo, flo = mid, fm
        x_star = 0.5 * (lo + hi)
        if abs(f(x_star)) <= tol_val:  # reject jump discontinuities
            roots.append(float(x_star))
    roots = sorted(set(round(r, 14) for r in roots))
    # merge near-duplicates from adjacent scan cells
    merged = []
    for r in roots:
        if not merged or r - merged[-1] > 10 * bisect_tol:
            merged.append(r)
    if merged:
        prox = float(min(np.min(np.abs(grid.x - r)) for r in merged))
    else:
        prox = float("inf")
    return SingularSet(kind, tuple(merged), prox)
