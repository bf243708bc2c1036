"""Discretization primitives: uniform grids, finite-difference Laplacians,
trapezoidal quadrature and banded eigensolves.

Conventions
-----------
* Grids are uniform; dirichlet/radial grids include both endpoints while
  periodic grids identify ``x_max`` with ``x_min`` and exclude it.
* ``dirichlet`` fields vanish at the two end nodes; the operator rows for
  the end nodes are zero and near-boundary rows fold the odd-reflection
  ghost values back into the stencil (exact for functions satisfying the
  boundary condition).
* ``radial`` grids exclude the origin (x_min > 0) and carry the reduced
  function u(r) = r R(r) with Dirichlet behaviour at both ends.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import ConfigurationError, UsageError

LINE = "line"
RADIAL = "radial"
DIRICHLET = "dirichlet"
PERIODIC = "periodic"


@dataclass(frozen=True)
class Grid:
    """Uniform 1D grid, either a line segment or a radial half-line piece."""

    kind: str
    x_min: float
    x_max: float
    n_points: int
    boundary: str = DIRICHLET

    def __post_init__(self):
        failures = []
        if self.kind not in (LINE, RADIAL):
            failures.append(f"unknown grid kind {self.kind!r}")
        if self.boundary not in (DIRICHLET, PERIODIC):
            failures.append(f"unknown boundary {self.boundary!r}")
        if self.n_points < 8:
            failures.append("n_points must be >= 8")
        if not self.x_max > self.x_min:
            failures.append("x_max must exceed x_min")
        if self.kind == RADIAL:
            if self.x_min <= 0.0:
                failures.append("radial grids require x_min > 0 (origin excluded)")
            if self.boundary != DIRICHLET:
                failures.append("radial grids are dirichlet only")
        if failures:
            raise ConfigurationError("invalid grid: " + "; ".join(failures), failures)

    @property
    def h(self) -> float:
        # periodic grids identify x_max with x_min and exclude it, so the
        # n_points nodes split the full circumference
        if self.boundary == PERIODIC:
            return (self.x_max - self.x_min) / self.n_points
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def x(self) -> np.ndarray:
        if self.boundary == PERIODIC:
            return self.x_min + self.h * np.arange(self.n_points)
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @cached_property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n_points, self.h)
        if self.boundary != PERIODIC:
            w[0] = w[-1] = 0.5 * self.h
        return w

    @classmethod
    def line(cls, x_min, x_max, n_points, boundary=DIRICHLET) -> "Grid":
        return cls(LINE, x_min, x_max, n_points, boundary)

    @classmethod
    def radial(cls, r_max, n_points) -> "Grid":
        """Radial grid [h, r_max] with the first node one spacing off the origin."""
        h = r_max / n_points
        return cls(RADIAL, h, r_max, n_points, DIRICHLET)


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex amplitudes sampled on a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.values.shape != (self.grid.n_points,):
            raise UsageError(
                f"field length {self.values.shape} does not match grid "
                f"({self.grid.n_points} points)"
            )

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def normalized(self) -> "WaveField":
        n = self.norm()
        if n == 0.0:
            raise UsageError("cannot normalize the zero field")
        return WaveField(self.values / n, self.grid)


@dataclass(frozen=True, eq=False)
class BandedOperator:
    """Real banded operator tied to a grid.

    ``diagonals`` maps offsets to coefficient rows; offset k holds the
    entries ``M[i, i+k]``. Periodic wrap terms appear as long offsets
    (+-(n-1), ...) with short rows.
    """

    grid: Grid
    bandwidth: int
    diagonals: dict

    @cached_property
    def matrix(self) -> scipy.sparse.csr_matrix:
        offsets = sorted(self.diagonals)
        return scipy.sparse.diags(
            [self.diagonals[k] for k in offsets], offsets,
            shape=(self.grid.n_points, self.grid.n_points), format="csr",
        )

    def apply(self, field: WaveField) -> WaveField:
        if field.grid is not self.grid and field.grid != self.grid:
            raise UsageError("field grid does not match operator grid")
        return WaveField(self.matrix @ field.values, self.grid)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _laplacian_diagonals(n: int, h: float, order: int, boundary: str,
                         ghost_walls: bool = False) -> dict:
    """Stencil diagonals.

    ``ghost_walls=False`` puts the Dirichlet walls on the end nodes (end
    rows zero, fields pinned there); ``ghost_walls=True`` puts them one
    spacing outside the grid, so every node is an unknown (radial
    convention, wall at the origin). Odd reflection about the wall keeps
    the order-4 stencil accurate and the eigenproblem block symmetric.
    """
    inv = 1.0 / h**2
    if order == 2:
        main = np.full(n, -2.0 * inv)
        off = np.full(n - 1, inv)
        if boundary == PERIODIC:
            wrap = np.array([inv])
            return {0: main, 1: off.copy(), -1: off.copy(),
                    n - 1: wrap.copy(), -(n - 1): wrap.copy()}
        if ghost_walls:
            return {0: main, 1: off.copy(), -1: off.copy()}
        main[0] = main[-1] = 0.0
        up = off.copy(); up[0] = 0.0        # row 0
        lo = off.copy(); lo[-1] = 0.0       # row n-1
        return {0: main, 1: up, -1: lo}
    if order == 4:
        c0, c1, c2 = -30.0 / 12.0 * inv, 16.0 / 12.0 * inv, -1.0 / 12.0 * inv
        main = np.full(n, c0)
        d1 = np.full(n - 1, c1)
        d2 = np.full(n - 2, c2)
        if boundary == PERIODIC:
            return {0: main, 1: d1.copy(), -1: d1.copy(), 2: d2.copy(), -2: d2.copy(),
                    n - 1: np.full(1, c1), -(n - 1): np.full(1, c1),
                    n - 2: np.full(2, c2), -(n - 2): np.full(2, c2)}
        if ghost_walls:
            main[0] += -c2
            main[-1] += -c2
            return {0: main, 1: d1.copy(), -1: d1.copy(),
                    2: d2.copy(), -2: d2.copy()}
        main[0] = main[-1] = 0.0
        main[1] += -c2
        main[-2] += -c2
        up1 = d1.copy(); up1[0] = 0.0
        lo1 = d1.copy(); lo1[-1] = 0.0
        up2 = d2.copy(); up2[0] = 0.0
        lo2 = d2.copy(); lo2[-1] = 0.0
        return {0: main, 1: up1, -1: lo1, 2: up2, -2: lo2}
    raise ConfigurationError(f"unsupported stencil order {order} (use 2 or 4)")


def build_laplacian(grid: Grid, order: int = 2) -> BandedOperator:
    """Centered-difference second-derivative operator of the given order."""
    diags = _laplacian_diagonals(grid.n_points, grid.h, order, grid.boundary,
                                 ghost_walls=(grid.kind == RADIAL))
    return BandedOperator(grid, order // 2, diags)


def build_radial_laplacian(grid: Grid, l: int, order: int = 2) -> BandedOperator:
    """Reduced radial operator u -> u'' - l(l+1)/r^2 u on a radial grid."""
    if grid.kind != RADIAL:
        raise ConfigurationError("build_radial_laplacian requires a radial grid")
    if l < 0:
        raise ConfigurationError("angular momentum l must be >= 0")
    diags = _laplacian_diagonals(grid.n_points, grid.h, order, grid.boundary,
                                 ghost_walls=True)
    if l > 0:
        main = diags[0] - l * (l + 1) / grid.x**2
        diags = {**diags, 0: main}
    return BandedOperator(grid, order // 2, diags)


def inner_product(a: WaveField, b: WaveField) -> complex:
    """Trapezoidal <a|b> = integral of conj(a) * b."""
    if a.grid != b.grid:
        raise UsageError("inner_product requires fields on the same grid")
    w = a.grid.trapezoid_weights
    return complex(np.sum(np.conj(a.values) * w * b.values))


def count_nodes(values: np.ndarray, rel_floor: float = 1e-8) -> int:
    """Interior sign changes of the real part, ignoring near-zero samples."""
    v = np.real(values)
    scale = np.max(np.abs(v))
    if scale == 0.0:
        return 0
    v = v[np.abs(v) > rel_floor * scale]
    if v.size < 2:
        return 0
    return int(np.sum(np.signbit(v[:-1]) != np.signbit(v[1:])))


def lowest_eigenpairs(kinetic: BandedOperator, kinetic_factor: float,
                      potential: np.ndarray, n_states: int):
    """Lowest eigenpairs of ``kinetic_factor * L + diag(potential)``.

    Dirichlet/radial grids use a symmetric banded solve on the interior
    block; periodic grids fall back to a dense symmetric solve. Returned
    states live on the full grid (end values zero for Dirichlet) and are
    normalized under trapezoidal quadrature.
    """
    grid = kinetic.grid
    n = grid.n_points
    if n_states < 1:
        raise ConfigurationError("n_states must be >= 1")
    if grid.boundary == DIRICHLET:
        # Line grids pin the end nodes (walls on the grid); radial grids put
        # the walls one spacing outside, so every node is an unknown.
        lo = 0 if grid.kind == RADIAL else 1
        m = n if grid.kind == RADIAL else n - 2
        if n_states > m:
            raise ConfigurationError(f"n_states={n_states} exceeds interior size {m}")
        bw = kinetic.bandwidth
        band = np.zeros((bw + 1, m))
        for k in range(bw + 1):
            row = kinetic.diagonals.get(k)
            if row is None:
                continue
            band[k, : m - k] = kinetic_factor * row[lo : lo + m - k]
        band[0] += potential[lo : lo + m]
        vals, vecs = scipy.linalg.eig_banded(
            band, lower=True, select="i", select_range=(0, n_states - 1))
        states = np.zeros((n, n_states))
        states[lo : lo + m, :] = vecs
    else:
        if n_states > n:
            raise ConfigurationError(f"n_states={n_states} exceeds grid size {n}")
        dense = kinetic_factor * kinetic.to_dense() + np.diag(potential)
        vals, vecs = scipy.linalg.eigh(dense)
        vals, states = vals[:n_states], vecs[:, :n_states]
    w = grid.trapezoid_weights
    norms = np.sqrt(np.einsum("i,ij->j", w, states**2))
    states = states / norms
    # deterministic sign: largest-magnitude sample positive
    for j in range(states.shape[1]):
        k = int(np.argmax(np.abs(states[:, j])))
        if states[k, j] < 0:
            states[:, j] = -states[:, j]
    return np.asarray(vals, dtype=float), states
