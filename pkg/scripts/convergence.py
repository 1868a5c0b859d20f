"""Derivative error as the sample count grows, with N close to L^(4/5).

    python scripts/convergence.py [--L-list 1000 10000 100000] [--noise-free --alpha 1e-6]
"""
import argparse

from groupdiff.harness import convergence_config, run_convergence


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--L-list", type=int, nargs="+", default=[1000, 10000, 100000])
    ap.add_argument("--n-seeds", type=int, default=20)
    ap.add_argument("--noise-free", action="store_true")
    ap.add_argument("--alpha", type=float)
    args = ap.parse_args()

    overrides = {"L_list": tuple(args.L_list), "n_seeds": args.n_seeds}
    if args.noise_free:
        overrides.update(sigma2=0.0, alpha=args.alpha or 1e-6, n_seeds=1)
    res = run_convergence(convergence_config(**overrides))
    for r in res.records:
        print(f"L={r['L']:>7}  M={r['M']:>4}  N={r['N']:>6}  alpha={r['alpha']:.3e}  l2_deriv={r['l2_deriv']:.6f}")
    print(f"slope of log error against log {res.against}: {res.slope:.3f}")


if __name__ == "__main__":
    main()
