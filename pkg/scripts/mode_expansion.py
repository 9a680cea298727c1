"""Near-fold expansion coefficients of folded mode solutions and their laws.

    python scripts/mode_expansion.py [--M 512]
"""
import argparse

import numpy as np

from foldhk import laplacian as lap


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--M", type=int, default=512)
    args = ap.parse_args()
    x = np.linspace(0, 1, args.M + 1)
    g = 1 + 0.5 * np.cos(x)
    print(f"{'lam':>4} {'n':>3} {'bc':>9} {'f0':>11} {'f1':>11} {'f2':>11} {'f3':>11}"
          f" {'f2 law':>9} {'f3 law':>9}")
    for lam, n in ((1.0, 1), (2.0, 1), (2.0, 3), (3.0, 2), (3.0, -5)):
        for bc in ("dirichlet", "neumann"):
            e = lap.solve_folded(lam, n, bc, g).expansion
            print(f"{lam:4g} {n:3d} {bc:>9} {e.f0:11.4e} {e.f1:11.4e} {e.f2:11.4e} {e.f3:11.4e}"
                  f" {e.law_f2:9.1e} {e.law_f3:9.1e}")

    print("\ncommuted identity residual (manufactured, lam=3, n=2)")
    Ms = (64, 128, 256, 512, 1024)
    res = []
    for M in Ms:
        p, _ = lap.manufactured(3.0, 2, "dirichlet", M)
        res.append(lap.commuted_identity_check(p, lap.solve_mode(p, fit=False))["residual"])
    for M, r, o in zip(Ms[1:], res[1:], lap.observed_order(res, Ms)):
        print(f"M={M:5d} residual {r:.3e} order {o:.3f}")


if __name__ == "__main__":
    main()
