"""Standard-equation baselines: stationary and time-dependent Schrodinger
solvers, free Klein-Gordon / Dirac dispersion, and the analytic catalogs
(infinite well, harmonic, hydrogenic, finite-well roots) used as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConfigurationError
from .numgrid import (Grid, RADIAL, WaveField, build_laplacian,
                      build_radial_laplacian, count_nodes, inner_product,
                      lowest_eigenpairs)
from .potentials import PotentialSpec, evaluate
from .units import UnitSystem


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Eigenpairs plus solver diagnostics."""

    energies: np.ndarray
    states: list          # list[WaveField] (or SpinorField for spin solvers)
    node_counts: tuple
    diagnostics: dict = field(default_factory=dict)


def kinetic_operator(grid: Grid, units: UnitSystem, l: int = 0, order: int = 2):
    """(-hbar^2 / 2m) and the matching Laplacian for the grid kind."""
    if grid.kind == RADIAL:
        lap = build_radial_laplacian(grid, l, order)
    else:
        lap = build_laplacian(grid, order)
    return -units.hbar**2 / (2.0 * units.m), lap


def solve_schrodinger_stationary(grid: Grid, V: PotentialSpec, n_states: int,
                                 units: UnitSystem = UnitSystem(), l: int = 0,
                                 order: int = 2) -> SpectrumResult:
    """Lowest eigenpairs of -hbar^2/2m Laplacian + V by banded eigensolve."""
    factor, lap = kinetic_operator(grid, units, l, order)
    v_samples = np.asarray(evaluate(V, grid.x), dtype=float)
    energies, states = lowest_eigenpairs(lap, factor, v_samples, n_states)
    fields = [WaveField(states[:, j], grid) for j in range(n_states)]
    h_mat = factor * lap.matrix + scipy.sparse.diags(v_samples)
    residuals = [
        float(np.max(np.abs(h_mat @ f.values - e * f.values)))
        for e, f in zip(energies, fields)
    ]
    nodes = tuple(count_nodes(f.values) for f in fields)
    return SpectrumResult(energies, fields, nodes,
                          {"residuals": residuals, "method": "banded_eigensolve"})


def propagate_schrodinger(psi0: WaveField, V: PotentialSpec, dt: float, steps: int,
                          units: UnitSystem = UnitSystem(), order: int = 2):
    """Crank-Nicolson propagation; unitary in exact arithmetic."""
    if dt <= 0:
        raise ConfigurationError("dt must be > 0")
    grid = psi0.grid
    factor, lap = kinetic_operator(grid, units, 0, order)
    h_mat = (factor * lap.matrix
             + scipy.sparse.diags(np.asarray(evaluate(V, grid.x), dtype=float)))
    ident = scipy.sparse.identity(grid.n_points, format="csc")
    z = 0.5j * dt / units.hbar
    solver = scipy.sparse.linalg.splu((ident + z * h_mat).tocsc())
    rhs_mat = (ident - z * h_mat).tocsr()
    trajectory = [psi0]
    psi = psi0.values
    for _ in range(steps):
        psi = solver.solve(rhs_mat @ psi)
        trajectory.append(WaveField(psi, grid))
    return trajectory


def klein_gordon_energy(p: float, E0: float, c: float) -> float:
    """Free relativistic dispersion sqrt(c^2 p^2 + E0^2)."""
    return float(np.sqrt((c * p) ** 2 + E0**2))


def dirac_free_energies(p: float, E0: float, c: float):
    """Both branches +-sqrt(c^2 p^2 + E0^2) of the free Dirac spectrum."""
    e = klein_gordon_energy(p, E0, c)
    return (e, -e)


# -- analytic catalogs -----------------------------------------------------

def infinite_well_energy(n: int, L: float, units: UnitSystem = UnitSystem()) -> float:
    """n-th level (n >= 1) of the box of width L with hard walls."""
    return (n * np.pi * units.hbar / L) ** 2 / (2.0 * units.m)


def harmonic_energy(n: int, omega: float, units: UnitSystem = UnitSystem()) -> float:
    """n-th level (n >= 0) of the oscillator, (n + 1/2) hbar omega."""
    return (n + 0.5) * units.hbar * omega


def hydrogen_energy(n: int, k: float, units: UnitSystem = UnitSystem()) -> float:
    """n-th hydrogenic level (n >= 1) for V = -k/r."""
    return -(k**2) * units.m / (2.0 * units.hbar**2 * n**2)


def hydrogen_ground_state(grid: Grid, k: float = 1.0,
                          units: UnitSystem = UnitSystem()) -> WaveField:
    """Normalized reduced radial 1s state u(r) ~ r exp(-r/a0) on the grid."""
    a0 = units.hbar**2 / (units.m * k)
    u = grid.x * np.exp(-grid.x / a0)
    return WaveField(u, grid).normalized()


def finite_well_bound_energies(depth: float, half_width: float,
                               units: UnitSystem = UnitSystem(),
                               n_scan: int = 20000):
    """Bound energies of the standard finite square well via the matching
    conditions k tan(ka) = kappa (even) and -k cot(ka) = kappa (odd).
    """
    hbar, m = units.hbar, units.m

    def k_in(E):
        return np.sqrt(2.0 * m * (E + depth)) / hbar

    def kappa(E):
        return np.sqrt(-2.0 * m * E) / hbar

    def even(E):
        return k_in(E) * np.sin(k_in(E) * half_width) - kappa(E) * np.cos(
            k_in(E) * half_width)

    def odd(E):
        return k_in(E) * np.cos(k_in(E) * half_width) + kappa(E) * np.sin(
            k_in(E) * half_width)

    roots = []
    es = np.linspace(-depth * (1 - 1e-9), -depth * 1e-9, n_scan)
    for f in (even, odd):
        fs = f(es)
        idx = np.flatnonzero(np.sign(fs[:-1]) * np.sign(fs[1:]) < 0)
        for i in idx:
            lo, hi = es[i], es[i + 1]
            flo = f(lo)
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
                if hi - lo < 1e-14 * depth:
                    break
            roots.append(0.5 * (lo + hi))
    return sorted(roots)


def gram_matrix(states) -> np.ndarray:
    """Pairwise inner products of a list of fields."""
    n = len(states)
    g = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            g[i, j] = inner_product(states[i], states[j])
    return g
