"""Modified Dirac sector on a 1D grid: Clifford-algebra checks, the
position-dependent-prefactor Hamiltonian, the generalized stationary
eigenproblem with a Wilson stabilization term, and the massless equation.

The computational representation is the two-component 1D reduction with
alpha = sigma_x, beta = sigma_z; the 4x4 matrices are housed for algebra
checks only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import (ConfigurationError, InvalidScenarioError, StabilityError,
                     UsageError)
from .numgrid import DIRICHLET, Grid, PERIODIC, WaveField, count_nodes
from .potentials import PotentialSpec, evaluate
from .reference import SpectrumResult
from .units import UnitSystem

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Two complex component arrays on a shared 1D grid."""

    up: np.ndarray
    down: np.ndarray
    grid: Grid

    def __post_init__(self):
        object.__setattr__(self, "up", np.asarray(self.up, dtype=complex))
        object.__setattr__(self, "down", np.asarray(self.down, dtype=complex))
        n = self.grid.n_points
        if self.up.shape != (n,) or self.down.shape != (n,):
            raise UsageError("spinor components must match the grid length")

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.up, self.down])

    @classmethod
    def from_stacked(cls, vec: np.ndarray, grid: Grid) -> "SpinorField":
        n = grid.n_points
        return cls(vec[:n], vec[n:], grid)

    def norm(self) -> float:
        w = self.grid.trapezoid_weights
        return float(np.sqrt(np.sum(w * (np.abs(self.up) ** 2
                                         + np.abs(self.down) ** 2)).real))


@dataclass(frozen=True, eq=False)
class CliffordSet:
    """Alpha/beta (and Pauli) matrices with their anticommutation identities."""

    alphas: tuple
    beta: np.ndarray
    paulis: tuple
    dimension_tag: str  # "2x2" or "4x4"

    @classmethod
    def reduction_2x2(cls) -> "CliffordSet":
        return cls((SIGMA_X,), SIGMA_Z, (SIGMA_X, SIGMA_Y, SIGMA_Z), "2x2")

    @classmethod
    def full_4x4(cls) -> "CliffordSet":
        zero = np.zeros((2, 2), dtype=complex)
        alphas = tuple(np.block([[zero, s], [s, zero]]) for s in
                       (SIGMA_X, SIGMA_Y, SIGMA_Z))
        beta = np.block([[np.eye(2), zero], [zero, -np.eye(2)]]).astype(complex)
        return cls(alphas, beta, (SIGMA_X, SIGMA_Y, SIGMA_Z), "4x4")


def clifford_check(cs: CliffordSet) -> dict:
    """Max violation of every anticommutation identity of the set."""
    dim = cs.beta.shape[0]
    eye = np.eye(dim)

    def dev(m):
        return float(np.max(np.abs(m)))

    report = {}
    for i, ai in enumerate(cs.alphas):
        for k, ak in enumerate(cs.alphas):
            target = 2.0 * eye if i == k else 0.0 * eye
            report[f"alpha{i}_alpha{k}"] = dev(ai @ ak + ak @ ai - target)
    for i, ai in enumerate(cs.alphas):
        report[f"alpha{i}_beta"] = dev(ai @ cs.beta + cs.beta @ ai)
    report["beta_sq"] = dev(cs.beta @ cs.beta - eye)
    pe = np.eye(2)
    for i, si in enumerate(cs.paulis):
        report[f"sigma{i}_sq"] = dev(si @ si - pe)
    report["sigma_xy_anticommute"] = dev(
        cs.paulis[0] @ cs.paulis[1] + cs.paulis[1] @ cs.paulis[0])
    report["max_violation"] = max(report.values())
    return report


def _derivative_matrix(grid: Grid) -> scipy.sparse.csr_matrix:
    """Centered first difference; periodic wrap or Dirichlet ghost zeros."""
    n, h = grid.n_points, grid.h
    off = np.full(n - 1, 0.5 / h)
    diags = {1: off, -1: -off}
    if grid.boundary == PERIODIC:
        diags[n - 1] = np.array([-0.5 / h])
        diags[-(n - 1)] = np.array([0.5 / h])
    return scipy.sparse.diags([diags[k] for k in sorted(diags)], sorted(diags),
                              shape=(n, n), format="csr")


def _second_difference_matrix(grid: Grid) -> scipy.sparse.csr_matrix:
    n, h = grid.n_points, grid.h
    inv = 1.0 / h**2
    diags = {0: np.full(n, -2.0 * inv), 1: np.full(n - 1, inv),
             -1: np.full(n - 1, inv)}
    if grid.boundary == PERIODIC:
        diags[n - 1] = np.array([inv])
        diags[-(n - 1)] = np.array([inv])
    return scipy.sparse.diags([diags[k] for k in sorted(diags)], sorted(diags),
                              shape=(n, n), format="csr")


def _check_weight(v: np.ndarray, units: UnitSystem):
    if np.any(v <= -units.E0):
        raise InvalidScenarioError("potential must satisfy V > -E0 everywhere")


def free_dirac_matrix(grid: Grid, units: UnitSystem,
                      wilson_r: float = 0.0) -> np.ndarray:
    """Dense Hermitian 2n x 2n matrix of -i hbar c alpha d/dx + m c^2 beta,
    plus the Wilson doubling suppressor -(hbar c r h / 2) beta Laplacian."""
    n = grid.n_points
    d = _derivative_matrix(grid).toarray()
    kin = -1j * units.hbar * units.c * d
    mass = units.E0 * np.eye(n)
    if wilson_r != 0.0:
        lap = _second_difference_matrix(grid).toarray()
        mass = mass - 0.5 * units.hbar * units.c * wilson_r * grid.h * lap
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    # alpha = sigma_x couples the components, beta = sigma_z signs the mass
    h[:n, n:] = kin
    h[n:, :n] = kin
    h[:n, :n] = mass
    h[n:, n:] = -mass
    return h


def apply_modified_hamiltonian(psi: SpinorField, V: PotentialSpec,
                               units: UnitSystem) -> SpinorField:
    """E0/(E0 + V(x)) (-i hbar c alpha d/dx + m c^2 beta) psi, prefactor
    applied pointwise after differentiation (no Wilson term here)."""
    grid = psi.grid
    v = np.asarray(evaluate(V, grid.x), dtype=float)
    _check_weight(v, units)
    d = _derivative_matrix(grid)
    coeff = -1j * units.hbar * units.c
    up = coeff * (d @ psi.down) + units.E0 * psi.up
    down = coeff * (d @ psi.up) - units.E0 * psi.down
    pref = units.E0 / (units.E0 + v)
    return SpinorField(pref * up, pref * down, grid)


def solve_spin_half_stationary(grid: Grid, V: PotentialSpec, units: UnitSystem,
                               wilson_r: float = 1.0,
                               n_states: int = 8) -> SpectrumResult:
    """Generalized eigenproblem H_D psi = E (1 + V/E0) psi with a symmetric
    Wilson-stabilized Dirac operator and positive diagonal weight, sorted
    by |E|."""
    n = grid.n_points
    if n_states < 1 or n_states > 2 * n:
        raise ConfigurationError("n_states out of range")
    v = np.asarray(evaluate(V, grid.x), dtype=float)
    _check_weight(v, units)
    h_d = free_dirac_matrix(grid, units, wilson_r)
    weight = np.concatenate([1.0 + v / units.E0, 1.0 + v / units.E0])
    # the weight is diagonal and positive, so fold it in symmetrically and
    # solve a standard eigenproblem (much cheaper than the generalized path)
    root_w = np.sqrt(weight)
    vals, vecs = scipy.linalg.eigh(h_d / np.outer(root_w, root_w),
                                   driver="evd")
    vecs = vecs / root_w[:, None]
    order = np.argsort(np.abs(vals), kind="stable")[:n_states]
    energies = vals[order]
    states, nodes, residuals = [], [], []
    for idx in order:
        vec = vecs[:, idx]
        sf = SpinorField.from_stacked(vec, grid)
        nrm = sf.norm()
        sf = SpinorField(sf.up / nrm, sf.down / nrm, grid)
        states.append(sf)
        nodes.append(count_nodes(sf.up))
        residuals.append(float(np.max(np.abs(
            h_d @ vec - vals[idx] * weight * vec)) / max(np.max(np.abs(vec)), 1e-300)))
    return SpectrumResult(np.asarray(energies), states, tuple(nodes),
                          {"residuals": residuals, "wilson_r": wilson_r,
                           "method": "generalized_eigh"})


def solve_massless(grid: Grid, V: PotentialSpec, units: UnitSystem,
                   n_states: int = 8) -> SpectrumResult:
    """Stationary massless problem -i hbar c sigma d/dx psi = E (1+V/E0) psi
    as a generalized eigenproblem (naive centered difference, no mass to
    attach a Wilson term to), sorted by |E|."""
    n = grid.n_points
    if n_states < 1 or n_states > 2 * n:
        raise ConfigurationError("n_states out of range")
    v = np.asarray(evaluate(V, grid.x), dtype=float)
    _check_weight(v, units)
    d = _derivative_matrix(grid).toarray()
    kin = -1j * units.hbar * units.c * d
    a = np.zeros((2 * n, 2 * n), dtype=complex)
    a[:n, n:] = kin
    a[n:, :n] = kin
    weight = np.concatenate([1.0 + v / units.E0, 1.0 + v / units.E0])
    root_w = np.sqrt(weight)
    vals, vecs = scipy.linalg.eigh(a / np.outer(root_w, root_w), driver="evd")
    vecs = vecs / root_w[:, None]
    order = np.argsort(np.abs(vals), kind="stable")[:n_states]
    states = []
    for idx in order:
        sf = SpinorField.from_stacked(vecs[:, idx], grid)
        nrm = sf.norm()
        states.append(SpinorField(sf.up / nrm, sf.down / nrm, grid))
    return SpectrumResult(np.asarray(vals[order]), states,
                          tuple(count_nodes(s.up) for s in states),
                          {"method": "generalized_eigh", "massless": True})


def propagate_massless(psi0: SpinorField, V: PotentialSpec, dt: float,
                       steps: int, units: UnitSystem):
    """Classical RK4 stepping of i hbar phi_t = H phi with
    H = -i hbar c sigma d/dx / (1 + V/E0).

    The operator is not symmetric for non-constant V; the per-step norm is
    recorded as a diagnostic and only a 10x blow-up is an error. Returns
    (trajectory, norms).
    """
    grid = psi0.grid
    v = np.asarray(evaluate(V, grid.x), dtype=float)
    _check_weight(v, units)
    d = _derivative_matrix(grid)
    pref = 1.0 / (1.0 + v / units.E0)
    coeff = -units.c  # from (1/(i hbar)) * (-i hbar c) = -c

    def rhs(vec):
        n = grid.n_points
        up, down = vec[:n], vec[n:]
        return np.concatenate([coeff * pref * (d @ down),
                               coeff * pref * (d @ up)])

    vec = psi0.stacked()
    norm0 = psi0.norm()
    trajectory = [psi0]
    norms = [norm0]
    for k in range(steps):
        k1 = rhs(vec)
        k2 = rhs(vec + 0.5 * dt * k1)
        k3 = rhs(vec + 0.5 * dt * k2)
        k4 = rhs(vec + dt * k3)
        vec = vec + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        sf = SpinorField.from_stacked(vec, grid)
        nrm = sf.norm()
        if norm0 > 0 and nrm > 10.0 * norm0:
            raise StabilityError(f"norm grew beyond 10x at step {k + 1}")
        trajectory.append(sf)
        norms.append(nrm)
    return trajectory, norms
