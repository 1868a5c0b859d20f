"""Ungrouped fit (one sample per interval) against the grouped fit on the same data.

    python scripts/baseline.py [--L 1000] [--n-seeds 20]
"""
import argparse

from groupdiff.harness import baseline_config, run_baseline

COLUMNS = ("l2_value", "linf_value", "l2_deriv", "linf_deriv")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--L", type=int, default=1000)
    ap.add_argument("--n-seeds", type=int, default=20)
    args = ap.parse_args()

    res = run_baseline(baseline_config(L=args.L, n_seeds=args.n_seeds))
    for name, med in (("ungrouped", res.baseline), ("grouped M=10", res.grouped)):
        print(f"{name:>13}: " + "  ".join(f"{c}={med[c]:.6f}" for c in COLUMNS))
    print(f"grouped L2 error no larger on {res.grouped_wins:.0%} of seeds")
    print("median runtime ms: " + ", ".join(f"{k}={v:.1f}" for k, v in res.runtime_ms.items()))


if __name__ == "__main__":
    main()
