import numpy as np
import pytest

from wavekit import spin_half as sh
from wavekit.numgrid import Grid
from wavekit.potentials import PotentialSpec
from wavekit.reference import dirac_free_energies
from wavekit.units import UnitSystem

U = UnitSystem(c=10.0)


def test_clifford_identities_2x2():
    rep = sh.clifford_check(sh.CliffordSet.reduction_2x2())
    assert rep["max_violation"] == 0.0


def test_clifford_identities_4x4():
    rep = sh.clifford_check(sh.CliffordSet.full_4x4())
    assert rep["max_violation"] == 0.0


def test_pauli_algebra():
    assert np.array_equal(sh.SIGMA_X @ sh.SIGMA_X, np.eye(2))
    np.testing.assert_array_equal(sh.SIGMA_X @ sh.SIGMA_Y
                                  - sh.SIGMA_Y @ sh.SIGMA_X,
                                  2j * sh.SIGMA_Z)


def test_free_dirac_matrix_hermitian():
    g = Grid.line(0.0, 5.0, 64, boundary="periodic")
    for r in (0.0, 1.0):
        m = sh.free_dirac_matrix(g, U, wilson_r=r)
        assert np.max(np.abs(m - m.conj().T)) < 1e-12


def test_spinor_field_stacking_roundtrip():
    g = Grid.line(0.0, 1.0, 16, boundary="periodic")
    rng = np.random.default_rng(0)
    f = sh.SpinorField(rng.normal(size=16) + 1j * rng.normal(size=16),
                       rng.normal(size=16), g)
    back = sh.SpinorField.from_stacked(f.stacked(), g)
    np.testing.assert_array_equal(back.up, f.up)
    np.testing.assert_array_equal(back.down, f.down)


def test_free_dispersion_with_wilson_term():
    L = 400.0
    g = Grid.line(0.0, L, 512, boundary="periodic")
    res = sh.solve_spin_half_stationary(g, PotentialSpec.free(), U,
                                        n_states=10, wilson_r=1.0)
    for e in res.energies:
        modes = np.arange(0, 12)
        cand = np.array([dirac_free_energies(U.hbar * 2 * np.pi * m / L,
                                             U.E0, U.c) for m in modes]).ravel()
        assert np.min(np.abs(np.abs(e) - np.abs(cand))) < 1e-3 * np.abs(e)


def test_wilson_term_lifts_doublers():
    # without the Wilson term the spectrum keeps spurious low-|E| doubler
    # states at the zone edge; with r=1 they are pushed away
    L = 40.0
    g = Grid.line(0.0, L, 128, boundary="periodic")
    naive = sh.free_dirac_matrix(g, U, wilson_r=0.0)
    wils = sh.free_dirac_matrix(g, U, wilson_r=1.0)
    en = np.sort(np.abs(np.linalg.eigvalsh(naive)))
    ew = np.sort(np.abs(np.linalg.eigvalsh(wils)))
    near_rest = 1.05 * U.E0
    assert np.sum(en < near_rest) > np.sum(ew < near_rest)


def test_constant_potential_halves_eigenvalues():
    L = 400.0
    g = Grid.line(0.0, L, 256, boundary="periodic")
    free = sh.solve_spin_half_stationary(g, PotentialSpec.free(), U,
                                         n_states=8, wilson_r=1.0)
    shifted = sh.solve_spin_half_stationary(
        g, PotentialSpec.piecewise_constant([], [U.E0]), U,
        n_states=8, wilson_r=1.0)
    # degenerate +-k multiplets may resolve to different sign members
    # between the two runs; compare magnitudes
    np.testing.assert_allclose(np.sort(np.abs(shifted.energies)),
                               np.sort(0.5 * np.abs(free.energies)),
                               atol=1e-10)


def test_massless_dispersion_order_two():
    v0 = 0.2 * U.E0
    const = PotentialSpec.piecewise_constant([], [v0])
    L = 10.0
    errs = []
    for n in (64, 128):
        g = Grid.line(0.0, L, n, boundary="periodic")
        res = sh.solve_massless(g, const, U, n_states=6)
        exact = U.c * U.hbar * (2 * np.pi / L) / (1 + v0 / U.E0)
        errs.append(min(abs(abs(e) - exact)
                        for e in res.energies if abs(e) > 1e-8))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)


def test_massless_propagation_norm_preserved():
    g = Grid.line(0.0, 10.0, 256, boundary="periodic")
    k = 2 * np.pi * 3 / 10.0
    up = np.exp(1j * k * g.x)
    psi0 = sh.SpinorField(up, up, g)
    traj, norms = sh.propagate_massless(psi0, PotentialSpec.free(),
                                        0.05 * g.h / U.c, 1000, U)
    assert abs(norms[-1] / norms[0] - 1.0) < 1e-6
    assert len(traj) == 1001


def test_massless_plane_wave_advects():
    # chiral component travels at c/(1 + V/E0)
    v0 = U.E0  # slows light-speed transport by half
    const = PotentialSpec.piecewise_constant([], [v0])
    L = 10.0
    g = Grid.line(0.0, L, 512, boundary="periodic")
    k = 2 * np.pi * 2 / L
    # sigma_x eigenvector (1,1): rightward chirality
    up = np.exp(1j * k * g.x)
    psi0 = sh.SpinorField(up, up, g)
    dt = 0.02 * g.h / U.c
    steps = 500
    traj, _ = sh.propagate_massless(psi0, const, dt, steps, U)
    vel = U.c / (1 + v0 / U.E0)
    expected = np.exp(1j * k * (g.x - vel * steps * dt))
    got = traj[-1].up / np.abs(traj[-1].up)
    assert np.max(np.abs(got - expected)) < 5e-3
