#!/usr/bin/env python3
"""Print the calibration constants and plane-wave residuals over a momentum
sweep, for one unit system and one constant potential offset.

Residuals should sit at machine precision for every momentum; anything
larger indicates a broken calibration constant.
"""

import argparse

import numpy as np

from wavekit.planewave import (calibration_closure_nr_stationary,
                               calibration_closure_nr_timedep,
                               calibration_closure_pot_stationary,
                               calibration_closure_pot_timedep,
                               calibration_closure_rel_stationary,
                               calibration_closure_rel_timedep, constant_A,
                               constant_B, constant_B_prime, constant_D,
                               constant_D_prime)
from wavekit.units import ATOMIC_C, UnitSystem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=float, default=ATOMIC_C, help="speed of light")
    ap.add_argument("--mass", type=float, default=1.0)
    ap.add_argument("--n-momenta", type=int, default=12)
    args = ap.parse_args()

    units = UnitSystem(m=args.mass, c=args.c)
    print(f"units: hbar=1 m={args.mass} c={args.c}  E0={units.E0:.6g}")
    print(f"A  = {constant_A(units):.12g}   (4/hbar^2)")
    p_ref = units.E0 / units.c
    print(f"B  = {constant_B(np.sqrt(2.0) * units.E0, units):.12g} at E=sqrt2*E0")
    print(f"B' = {constant_B_prime(p_ref, units):.12g} at cp=E0")
    print(f"D  = {constant_D(np.sqrt(2.0) * units.E0, units):.12g}")
    print(f"D' = {constant_D_prime(p_ref, units):.12g}")
    print()

    closures = [
        ("nr_stationary", calibration_closure_nr_stationary),
        ("nr_timedep", calibration_closure_nr_timedep),
        ("rel_stationary", calibration_closure_rel_stationary),
        ("rel_timedep", calibration_closure_rel_timedep),
        ("pot_stationary", calibration_closure_pot_stationary),
        ("pot_timedep", calibration_closure_pot_timedep),
    ]
    ratios = np.geomspace(0.3, 30.0, args.n_momenta)
    header = "cp/E0".rjust(10) + "".join(name.rjust(16) for name, _ in closures)
    print(header)
    for r in ratios:
        p = r * units.E0 / units.c
        row = f"{r:10.3f}"
        for _, closure in closures:
            row += f"{closure(p, units):16.3e}"
        print(row)


if __name__ == "__main__":
    main()
