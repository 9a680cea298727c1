"""Self-convergence of the perturbed flow and the fold exponents.

    python scripts/nahm_convergence.py [--eps 0.1] [--n-modes 64]
"""
import argparse

import numpy as np

from foldhk import nahm
from foldhk.suites import fitted_order


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--n-modes", type=int, default=64)
    ap.add_argument("--x-max", type=float, default=0.5)
    args = ap.parse_args()

    hs = np.array([1 / 50, 1 / 100, 1 / 200, 1 / 400])
    res, clo = [], []
    print(f"{'h':>8} {'flow residual':>14} {'|d omega|':>12} {'wedge':>10}")
    for h in hs:
        cfg = nahm.FlowConfig(h=h, x_max=args.x_max, n_modes=args.n_modes)
        tr = nahm.integrate(nahm.perturbed_initial_state(args.eps, args.n_modes), cfg)
        hk = nahm.reconstruct(tr)
        res.append(float(np.max(nahm.nahm_residual(tr))))
        clo.append(max(nahm.closedness_residual(hk)))
        print(f"{h:8.5f} {res[-1]:14.3e} {clo[-1]:12.3e} {nahm.wedge_identity_residual(hk):10.2e}")
    print(f"orders: residual {fitted_order(hs, res):.3f}, closedness {fitted_order(hs, clo):.3f}")
    print(f"V1 exponent: {nahm.fold_asymptotics(hk, x_fit=0.1).v1_exponent:.3f}")

    cfg = nahm.FlowConfig(h=1 / 200, x_max=0.25, n_modes=args.n_modes)
    tr = nahm.integrate(nahm.normalized_initial_state(0.02, args.n_modes), cfg)
    print(nahm.fold_asymptotics(nahm.reconstruct(tr), x_fit=0.1).summary())


if __name__ == "__main__":
    main()
