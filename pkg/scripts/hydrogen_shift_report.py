#!/usr/bin/env python3
"""First-order audit of the additional potential term -2V + V^2/(E - V) on
the hydrogen ground state.

The -2V expectation is exactly +2|E1| for a Coulomb potential (virial
theorem); the V^2/(E - V) part crosses a genuine pole at E = V and is
evaluated as a symmetric-excision principal value.
"""

import argparse
import json

from wavekit.modified_nr import additional_term_report
from wavekit.numgrid import Grid
from wavekit.potentials import PotentialSpec
from wavekit.reference import hydrogen_ground_state
from wavekit.units import UnitSystem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r-max", type=float, default=30.0)
    ap.add_argument("--n-points", type=int, default=200000)
    ap.add_argument("--strength", type=float, default=1.0)
    args = ap.parse_args()

    units = UnitSystem()
    grid = Grid.radial(args.r_max, args.n_points)
    psi = hydrogen_ground_state(grid, k=args.strength, units=units)
    e1 = -0.5 * units.m * args.strength**2 / units.hbar**2
    report = additional_term_report(psi, e1, PotentialSpec.coulomb(args.strength),
                                    units)
    print(json.dumps(report, indent=2, default=list))


if __name__ == "__main__":
    main()
