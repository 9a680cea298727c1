"""Response of the invariant polynomials to each deformation frequency.

    python scripts/invariant_variation.py [--nmax 8]
"""
import argparse

import numpy as np

from foldhk import cotangent as cot


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nmax", type=int, default=8)
    args = ap.parse_args()
    chart = cot.FiberChart(64, 64)
    np.set_printoptions(precision=2, linewidth=140)
    print("|dp_n / g| for m (rows) against n (columns)")
    for m in range(2, args.nmax + 1):
        d = cot.Deformation(m, 0.6 + 0.8j)
        pd = cot.variation_of_invariants(d, args.nmax, chart)
        print(f"m={m}", np.abs(pd / d.amplitude))
    print("\nm=1 complex-symplectic defect", cot.complex_symplectic_defect(cot.Deformation(1, 1.0)))
    for m in range(2, 5):
        print(f"m={m} complex-symplectic defect", cot.complex_symplectic_defect(cot.Deformation(m, 1.0)))


if __name__ == "__main__":
    main()
