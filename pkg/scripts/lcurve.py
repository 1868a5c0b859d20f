"""L-curve corner over repeated noisy draws of the cubic.

    python scripts/lcurve.py [--n-seeds 20] [--M 10] [--penalty-order 1]
"""
import argparse

import numpy as np

from groupdiff.harness import generate_samples, table1_config
from groupdiff.param_select import default_cbar_grid, lcurve_corner, lcurve_scan
from groupdiff.preprocess import group_samples


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-seeds", type=int, default=20)
    ap.add_argument("--M", type=int, default=10)
    ap.add_argument("--penalty-order", type=int, default=1, choices=(1, 2))
    args = ap.parse_args()

    cfg = table1_config(M=args.M)
    corners = []
    for seed in range(args.n_seeds):
        g = group_samples(generate_samples(cfg, seed), args.M)
        curve = lcurve_scan(g, cfg.sigma2, default_cbar_grid(), penalty_order=args.penalty_order)
        corners.append(lcurve_corner(curve)[1])
        print(f"seed {seed:>3}: c_bar = {corners[-1]:.4g}")
    print(f"median c_bar = {np.median(corners):.4g}")


if __name__ == "__main__":
    main()
