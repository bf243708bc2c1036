"""Closed-form marching through piecewise-constant coefficient regions.

All stationary 1D problems here reduce to psi'' = -w_j psi on constant
regions: oscillatory (w > 0), exponential (w < 0) or linear (w = 0).
Marching starts from psi = 0, psi' = 1 at the left wall; the Dirichlet
matching function is psi at the right wall. The marchers are vectorized
over a whole array of trial energies so that dense scans and batched
bisection stay cheap.
"""

from __future__ import annotations

import numpy as np

from .errors import NoRootError, UsageError
from .numgrid import Grid
from .potentials import PotentialSpec, evaluate


def piecewise_regions(spec: PotentialSpec, x_min: float, x_max: float):
    """Breakpoints and region values of a piecewise-constant potential
    restricted to [x_min, x_max]. Returns (edges, values) with
    len(edges) == len(values) + 1.
    """
    if not spec.is_piecewise_constant:
        raise UsageError(f"potential variant {spec.variant!r} is not piecewise-constant")
    if spec.variant == "free":
        breaks = []
    elif spec.variant == "square_well":
        breaks = [spec.center - spec.half_width, spec.center + spec.half_width]
    elif spec.variant == "step":
        breaks = [spec.edge]
    elif spec.variant == "barrier":
        breaks = [spec.left, spec.right]
    else:
        breaks = list(spec.breakpoints)
    edges = [x_min] + [b for b in breaks if x_min < b < x_max] + [x_max]
    values = [float(evaluate(spec, 0.5 * (a + b))) for a, b in zip(edges[:-1], edges[1:])]
    return np.asarray(edges), np.asarray(values)


def _step(psi, dpsi, w, width):
    """Advance (psi, psi') across one region of psi'' = -w psi. Vectorized."""
    w = np.asarray(w, dtype=float)
    psi_new = np.empty_like(psi)
    dpsi_new = np.empty_like(dpsi)

    osc = w > 0
    k = np.sqrt(w[osc])
    s, c = np.sin(k * width), np.cos(k * width)
    psi_new[osc] = c * psi[osc] + s / k * dpsi[osc]
    dpsi_new[osc] = -k * s * psi[osc] + c * dpsi[osc]
    dec = w < 0
    kap = np.sqrt(-w[dec])
    arg = np.minimum(kap * width, 700.0)  # overflow guard; renormalized after
    sh, ch = np.sinh(arg), np.cosh(arg)
    psi_new[dec] = ch * psi[dec] + sh / kap * dpsi[dec]
    dpsi_new[dec] = kap * sh * psi[dec] + ch * dpsi[dec]
    lin = w == 0
    psi_new[lin] = psi[lin] + width * dpsi[lin]
    dpsi_new[lin] = dpsi[lin]
    return psi_new, dpsi_new


def march_endpoint(widths, coeffs) -> np.ndarray:
    """psi at the right wall for the shot psi(0)=0, psi'(0)=1.

    ``coeffs`` has shape (n_trials, n_regions); rescaled after each region
    to dodge overflow (positive factors, so root locations are unchanged).
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    n = coeffs.shape[0]
    psi = np.zeros(n)
    dpsi = np.ones(n)
    for j, width in enumerate(widths):
        psi, dpsi = _step(psi, dpsi, coeffs[:, j], width)
        scale = np.maximum(np.maximum(np.abs(psi), np.abs(dpsi)), 1e-280)
        psi, dpsi = psi / scale, dpsi / scale
    return psi


def count_shot_nodes(edges, coeffs) -> int:
    """Interior zeros of the left shot, straight from the closed forms.

    Sampling-based counting is unreliable here: in a forbidden outer region
    the residual of an imperfect root grows like e^{kappa L} and either
    drowns the oscillatory amplitude or reads as a fake crossing. Counting
    zeros of R cos(k xi - phi) analytically per region avoids both.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    widths = np.diff(np.asarray(edges, dtype=float))
    psi, dpsi = 0.0, 1.0
    total = 0
    last = len(coeffs) - 1
    for j, (w, d) in enumerate(zip(coeffs, widths)):
        if w > 0:
            k = np.sqrt(w)
            phi = np.arctan2(dpsi / k, psi)
            # zeros at xi = (phi + pi/2 + m pi)/k inside (0, d)
            m_lo = int(np.ceil((-phi - np.pi / 2) / np.pi + 1e-12))
            m_hi = int(np.floor((k * d - phi - np.pi / 2) / np.pi - 1e-12))
            total += max(0, m_hi - m_lo + 1)
        elif psi != 0.0 and j != last:
            # exponential/linear region: at most one crossing, read from the
            # sign of the (renormalized) endpoint state. The final region is
            # skipped: its endpoint is the matching residual, not the field.
            end_psi, _ = _step(np.array([psi]), np.array([dpsi]),
                               np.array([w]), d)
            if np.sign(end_psi[0]) * np.sign(psi) < 0:
                total += 1
        (psi,), (dpsi,) = _step(np.array([psi]), np.array([dpsi]),
                                np.array([w]), d)
        scale = max(abs(psi), abs(dpsi), 1e-280)
        psi, dpsi = psi / scale, dpsi / scale
    return total


def sample_shot(edges, coeffs, n_per_region: int = 200):
    """Positions and psi samples of the left shot for a single trial.

    Used for node counting and for producing an output field; the samples
    are renormalized region by region, then rescaled to max |psi| = 1.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    xs_all, ps_all = [], []
    psi, dpsi = 0.0, 1.0
    for j in range(len(coeffs)):
        a, b = edges[j], edges[j + 1]
        local = np.linspace(0.0, b - a, n_per_region, endpoint=(j == len(coeffs) - 1))
        w = coeffs[j]
        if w > 0:
            k = np.sqrt(w)
            vals = np.cos(k * local) * psi + np.sin(k * local) / k * dpsi
        elif w < 0:
            kap = np.sqrt(-w)
            arg = np.minimum(kap * local, 700.0)
            vals = np.cosh(arg) * psi + np.sinh(arg) / kap * dpsi
        else:
            vals = psi + local * dpsi
        xs_all.append(a + local)
        ps_all.append(vals)
        (psi,), (dpsi,) = _step(np.array([psi]), np.array([dpsi]),
                                np.array([w]), b - a)
        scale = max(abs(psi), abs(dpsi), 1e-280)
        psi, dpsi = psi / scale, dpsi / scale
        # keep earlier samples in the same normalization as the marching state
        for i in range(len(ps_all)):
            ps_all[i] = ps_all[i] / scale
    x = np.concatenate(xs_all)
    p = np.concatenate(ps_all)
    # the last sample is the matching residual at the far wall, not a field
    # value; pin it so a leftover sign does not read as a spurious node
    p[-1] = 0.0
    m = np.max(np.abs(p))
    if m > 0:
        p = p / m
    return x, p


def bracketed_roots(matching, e_scan: np.ndarray, skip_mask=None,
                    n_bisect: int = 64):
    """Sign-change scan plus batched bisection of a vectorized matching
    function. Returns the refined roots; scan points under ``skip_mask``
    (singular energies) are dropped and sign changes across them ignored.
    """
    e_scan = np.asarray(e_scan, dtype=float)
    if skip_mask is not None:
        e_scan = e_scan[~np.asarray(skip_mask, dtype=bool)]
    vals = matching(e_scan)
    sign = np.sign(vals)
    idx = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    if idx.size == 0:
        return np.empty(0)
    lo = e_scan[idx].copy()
    hi = e_scan[idx + 1].copy()
    flo = vals[idx].copy()
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        fm = matching(mid)
        left = flo * fm <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
    return 0.5 * (lo + hi)


def linear_bound_state_energy(edges, region_potentials, state_index: int,
                              units, e_lo=None, e_hi=None, n_scan: int = 4000):
    """Energy of the ``state_index``-th Dirichlet eigenstate of the standard
    operator -hbar^2/2m psi'' + U psi on a piecewise-constant profile U.

    Exact per-region closed forms; the k-th matching root has k interior
    nodes, so selection by root order is selection by node count.
    """
    widths = np.diff(edges)
    u = np.asarray(region_potentials, dtype=float)
    length = edges[-1] - edges[0]
    scale = 2.0 * units.m / units.hbar**2
    if e_lo is None:
        e_lo = float(np.min(u))
    if e_hi is None:
        # generous upper bound: a few box levels above the requested state
        e_hi = float(np.max(u)) + (units.hbar**2 / (2 * units.m)) * (
            np.pi * (state_index + 3) / length) ** 2 * 4.0

    def matching(e_arr):
        coeffs = scale * (np.atleast_1d(e_arr)[:, None] - u[None, :])
        return march_endpoint(widths, coeffs)

    roots = bracketed_roots(matching, np.linspace(e_lo, e_hi, n_scan))
    while roots.size <= state_index:
        e_lo2, e_hi2 = e_hi, e_hi + (e_hi - e_lo)
        more = bracketed_roots(matching, np.linspace(e_lo2, e_hi2, n_scan))
        if more.size == 0 and e_hi2 > 1e8 * max(1.0, abs(e_hi)):
            raise NoRootError(f"could not find linear eigenstate {state_index}")
        roots = np.concatenate([roots, more])
        e_lo, e_hi = e_lo, e_hi2
    return float(roots[state_index])
