"""Median error table for the cubic test function across group counts.

    python scripts/table1.py [--n-seeds 20] [--out table1.csv]
"""
import argparse
import time

from groupdiff.harness import table1_config, run_table1

REFERENCE = {
    5: (0.020805, 0.036963, 0.166882, 0.745254),
    10: (0.027061, 0.045420, 0.211428, 0.815453),
    50: (0.040842, 0.067272, 0.249623, 1.023243),
    100: (0.054420, 0.085524, 0.287166, 1.150439),
    200: (0.079110, 0.116156, 0.353859, 1.333828),
}
COLUMNS = ("l2_value", "linf_value", "l2_deriv", "linf_deriv")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-seeds", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    t0 = time.perf_counter()
    res = run_table1(table1_config(n_seeds=args.n_seeds, seed=args.seed))
    print(f"{'M':>5} {'N':>5} " + " ".join(f"{c:>12}" for c in COLUMNS) + "   (reference)")
    for row in res.rows:
        ref = REFERENCE.get(row["M"])
        vals = " ".join(f"{row[c]:12.6f}" for c in COLUMNS)
        refs = " ".join(f"{r:.6f}" for r in ref) if ref else ""
        print(f"{row['M']:>5} {row['N']:>5} {vals}   ({refs})")
    print(f"{time.perf_counter() - t0:.2f} s")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(res.to_csv())


if __name__ == "__main__":
    main()
