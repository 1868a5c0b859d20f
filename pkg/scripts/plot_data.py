"""Write curve, group-mean and sample CSVs for one fit, ready for any plotting tool.

    python scripts/plot_data.py out/plot [--function cubic] [--M 10] [--seed 0]
"""
import argparse

from groupdiff.csvio import emit_plot_data
from groupdiff.harness import ExperimentConfig, generate_samples
from groupdiff.param_select import alpha_from_cbar
from groupdiff.preprocess import group_samples
from groupdiff.solver import fit_alpha


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir")
    ap.add_argument("--function", default="cubic")
    ap.add_argument("--L", type=int, default=1000)
    ap.add_argument("--M", type=int, default=10)
    ap.add_argument("--sigma2", type=float, default=0.2)
    ap.add_argument("--c-bar", type=float, default=0.0239)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = ExperimentConfig(function_id=args.function, L=args.L, M=args.M, sigma2=args.sigma2, c_bar=args.c_bar)
    samples = generate_samples(cfg, args.seed)
    g = group_samples(samples, args.M)
    f = fit_alpha(g, alpha_from_cbar(args.c_bar, args.sigma2, g.N))
    for p in emit_plot_data(f, g, args.out_dir, samples):
        print(p)


if __name__ == "__main__":
    main()
