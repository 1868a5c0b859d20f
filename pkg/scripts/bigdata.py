"""Full pipeline on a million noisy samples of the smooth bump.

    python scripts/bigdata.py [--L 1000000] [--n-seeds 10]
"""
import argparse

from groupdiff.harness import bigdata_config, run_bigdata


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--L", type=int, default=10**6)
    ap.add_argument("--n-seeds", type=int, default=10)
    args = ap.parse_args()

    res = run_bigdata(bigdata_config(L=args.L, n_seeds=args.n_seeds))
    for k, v in res.medians.items():
        print(f"{k:>11} {v:.6f}")
    print(f"relative L2 error {res.relative_l2:.4f}")
    print(f"slowest run {max(r.report.runtime_ms for r in res.runs):.1f} ms")


if __name__ == "__main__":
    main()
